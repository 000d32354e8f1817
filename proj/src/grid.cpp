#include "invlab/grid.hpp"

#include <cmath>
#include <vector>

namespace invlab {

Grid Grid::make(int d, int n) {
    if (d != 1 && d != 2)
        throw ValidationError("Grid: d must be 1 or 2, got " + std::to_string(d));
    if (n < 3)
        throw ValidationError("Grid: need n >= 3 interior points, got " + std::to_string(n));
    Grid g;
    g.d = d;
    g.n = n;
    g.h = 1.0 / (n + 1);
    return g;
}

GridField::GridField(Grid grid, Eigen::VectorXd values)
    : grid_(grid), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != grid_.node_count())
        throw ValidationError("GridField: value count does not match grid");
    check_finite("GridField construction");
}

GridField GridField::zero(const Grid& grid) {
    return GridField(grid, Eigen::VectorXd::Zero(grid.node_count()));
}

GridField GridField::constant(const Grid& grid, double c) {
    if (!std::isfinite(c)) throw ValidationError("GridField: non-finite constant");
    return GridField(grid, Eigen::VectorXd::Constant(grid.node_count(), c));
}

GridField GridField::sample(const Grid& grid, const std::function<double(double)>& fn) {
    if (grid.d != 1) throw ValidationError("GridField::sample: 1-argument sampler on d=2 grid");
    Eigen::VectorXd v(grid.node_count());
    for (int i = 0; i < grid.nodes_per_axis(); ++i) v[i] = fn(grid.coord(i));
    return GridField(grid, std::move(v));
}

GridField GridField::sample(const Grid& grid, const std::function<double(double, double)>& fn) {
    if (grid.d != 2) throw ValidationError("GridField::sample: 2-argument sampler on d=1 grid");
    Eigen::VectorXd v(grid.node_count());
    for (int i = 0; i < grid.nodes_per_axis(); ++i)
        for (int j = 0; j < grid.nodes_per_axis(); ++j)
            v[grid.flat(i, j)] = fn(grid.coord(i), grid.coord(j));
    return GridField(grid, std::move(v));
}

void GridField::check_finite(const char* where) const {
    if (!values_.allFinite())
        throw NumericalError(std::string(where) + ": non-finite value in GridField");
}

double GridField::interpolate(const std::array<double, 2>& x) const {
    const Grid& g = grid_;
    auto locate = [&](double t) {
        if (t < 0.0 || t > 1.0)
            throw ValidationError("GridField::interpolate: point outside [0,1]");
        int i = static_cast<int>(std::floor(t / g.h));
        if (i > g.n) i = g.n; // t == 1 lands in the last cell
        double w = (t - g.coord(i)) / g.h;
        return std::pair<int, double>(i, w);
    };
    auto [i, wx] = locate(x[0]);
    if (g.d == 1) {
        return (1 - wx) * (*this)(i) + wx * (*this)(i + 1);
    }
    auto [j, wy] = locate(x[1]);
    return (1 - wx) * (1 - wy) * (*this)(i, j) + (1 - wx) * wy * (*this)(i, j + 1) +
           wx * (1 - wy) * (*this)(i + 1, j) + wx * wy * (*this)(i + 1, j + 1);
}

double quad_weight(const Grid& g, int i, int j) {
    auto w1 = [&](int k) { return (k == 0 || k == g.n + 1) ? g.h / 2.0 : g.h; };
    return g.d == 1 ? w1(i) : w1(i) * w1(j);
}

double quadrature_inner(const GridField& a, const GridField& b) {
    if (a.grid() != b.grid())
        throw ValidationError("quadrature_inner: grid mismatch");
    const Grid& g = a.grid();
    double s = 0.0;
    if (g.d == 1) {
        for (int i = 0; i <= g.n + 1; ++i) s += quad_weight(g, i) * a(i) * b(i);
    } else {
        for (int i = 0; i <= g.n + 1; ++i)
            for (int j = 0; j <= g.n + 1; ++j)
                s += quad_weight(g, i, j) * a(i, j) * b(i, j);
    }
    return s;
}

namespace {

// 1d stencil application along one axis; second-order everywhere.
void derive_line(const double* u, double* out, int m, double h, int order) {
    if (order == 1) {
        out[0] = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * h);
        for (int i = 1; i < m - 1; ++i) out[i] = (u[i + 1] - u[i - 1]) / (2 * h);
        out[m - 1] = (3 * u[m - 1] - 4 * u[m - 2] + u[m - 3]) / (2 * h);
    } else {
        out[0] = (2 * u[0] - 5 * u[1] + 4 * u[2] - u[3]) / (h * h);
        for (int i = 1; i < m - 1; ++i) out[i] = (u[i + 1] - 2 * u[i] + u[i - 1]) / (h * h);
        out[m - 1] = (2 * u[m - 1] - 5 * u[m - 2] + 4 * u[m - 3] - u[m - 4]) / (h * h);
    }
}

} // namespace

GridField fd_derivative(const GridField& u, int axis, int order) {
    const Grid& g = u.grid();
    if (order != 1 && order != 2)
        throw ValidationError("fd_derivative: order must be 1 or 2");
    if (axis < 0 || axis >= g.d)
        throw ValidationError("fd_derivative: axis out of range");
    const int m = g.nodes_per_axis();
    if (order == 2 && m < 4)
        throw ValidationError("fd_derivative: grid too coarse for one-sided order-2 stencil");
    Eigen::VectorXd out(g.node_count());
    std::vector<double> line(m), dline(m);
    if (g.d == 1) {
        derive_line(u.values().data(), out.data(), m, g.h, order);
    } else if (axis == 0) {
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < m; ++i) line[i] = u(i, j);
            derive_line(line.data(), dline.data(), m, g.h, order);
            for (int i = 0; i < m; ++i) out[g.flat(i, j)] = dline[i];
        }
    } else {
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) line[j] = u(i, j);
            derive_line(line.data(), dline.data(), m, g.h, order);
            for (int j = 0; j < m; ++j) out[g.flat(i, j)] = dline[j];
        }
    }
    return GridField(g, std::move(out));
}

double discrete_norm(const GridField& u, NormKind kind) {
    const Grid& g = u.grid();
    switch (kind) {
    case NormKind::L2:
        return std::sqrt(quadrature_inner(u, u));
    case NormKind::Linf:
        return u.values().cwiseAbs().maxCoeff();
    case NormKind::H1: {
        double s = quadrature_inner(u, u);
        for (int a = 0; a < g.d; ++a) {
            GridField du = fd_derivative(u, a, 1);
            s += quadrature_inner(du, du);
        }
        return std::sqrt(s);
    }
    case NormKind::H2: {
        if (g.n < 5) throw ValidationError("discrete_norm: H2 requires n >= 5");
        double s = quadrature_inner(u, u);
        for (int a = 0; a < g.d; ++a) {
            GridField du = fd_derivative(u, a, 1);
            s += quadrature_inner(du, du);
            GridField d2u = fd_derivative(u, a, 2);
            s += quadrature_inner(d2u, d2u);
        }
        if (g.d == 2) {
            GridField dxy = fd_derivative(fd_derivative(u, 0, 1), 1, 1);
            s += quadrature_inner(dxy, dxy);
        }
        return std::sqrt(s);
    }
    case NormKind::C1: {
        if (g.n < 5) throw ValidationError("discrete_norm: C1 requires n >= 5");
        double s = u.values().cwiseAbs().maxCoeff();
        for (int a = 0; a < g.d; ++a)
            s = std::max(s, fd_derivative(u, a, 1).values().cwiseAbs().maxCoeff());
        return s;
    }
    }
    throw ValidationError("discrete_norm: unknown kind");
}

} // namespace invlab
