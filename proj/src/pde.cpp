#include "invlab/pde_solve.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace invlab {

GridField darcy_apply(const GridField& f, const GridField& u) {
    if (f.grid() != u.grid()) throw ValidationError("darcy_apply: grid mismatch");
    const Grid& g = f.grid();
    const double h2 = g.h * g.h;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(g.node_count());
    if (g.d == 1) {
        for (int i = 1; i <= g.n; ++i) {
            double fe = 0.5 * (f(i) + f(i + 1));
            double fw = 0.5 * (f(i) + f(i - 1));
            out[g.flat(i)] = (fe * (u(i + 1) - u(i)) - fw * (u(i) - u(i - 1))) / h2;
        }
    } else {
        for (int i = 1; i <= g.n; ++i) {
            for (int j = 1; j <= g.n; ++j) {
                double fe = 0.5 * (f(i, j) + f(i + 1, j));
                double fw = 0.5 * (f(i, j) + f(i - 1, j));
                double fn = 0.5 * (f(i, j) + f(i, j + 1));
                double fs = 0.5 * (f(i, j) + f(i, j - 1));
                out[g.flat(i, j)] =
                    (fe * (u(i + 1, j) - u(i, j)) - fw * (u(i, j) - u(i - 1, j)) +
                     fn * (u(i, j + 1) - u(i, j)) - fs * (u(i, j) - u(i, j - 1))) / h2;
            }
        }
    }
    return GridField(g, std::move(out));
}

GridField schrodinger_apply(const GridField& f, const GridField& u) {
    if (f.grid() != u.grid()) throw ValidationError("schrodinger_apply: grid mismatch");
    const Grid& g = f.grid();
    const double h2 = g.h * g.h;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(g.node_count());
    if (g.d == 1) {
        for (int i = 1; i <= g.n; ++i)
            out[g.flat(i)] =
                0.5 * (u(i + 1) - 2 * u(i) + u(i - 1)) / h2 - f(i) * u(i);
    } else {
        for (int i = 1; i <= g.n; ++i)
            for (int j = 1; j <= g.n; ++j)
                out[g.flat(i, j)] =
                    0.5 * (u(i + 1, j) + u(i - 1, j) + u(i, j + 1) + u(i, j - 1) -
                           4 * u(i, j)) / h2 -
                    f(i, j) * u(i, j);
    }
    return GridField(g, std::move(out));
}

namespace {

// Thomas elimination for a symmetric tridiagonal SPD system.
Eigen::VectorXd solve_tridiag(Eigen::VectorXd diag, Eigen::VectorXd off,
                              Eigen::VectorXd rhs) {
    const Eigen::Index m = diag.size();
    for (Eigen::Index i = 1; i < m; ++i) {
        double w = off[i - 1] / diag[i - 1];
        diag[i] -= w * off[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    Eigen::VectorXd x(m);
    x[m - 1] = rhs[m - 1] / diag[m - 1];
    for (Eigen::Index i = m - 2; i >= 0; --i)
        x[i] = (rhs[i] - off[i] * x[i + 1]) / diag[i];
    return x;
}

// Interior-node indexing for the d=2 sparse systems.
inline int interior_index(int i, int j, int n) { return (i - 1) * n + (j - 1); }

void check_residual(const GridField& lhs_applied, const GridField& rhs,
                    const char* what) {
    const Grid& g = rhs.grid();
    double num = 0.0, den = 0.0;
    for (int i = 1; i <= g.n; ++i) {
        for (int j = 1; j <= (g.d == 2 ? g.n : 1); ++j) {
            int jj = g.d == 2 ? j : 0;
            double r = lhs_applied(i, jj) - rhs(i, jj);
            num += r * r;
            den += rhs(i, jj) * rhs(i, jj);
        }
    }
    double rel = std::sqrt(num) / std::max(1e-300, std::sqrt(den));
    if (den == 0.0) rel = std::sqrt(num);
    if (!(rel <= 1e-10))
        throw NumericalError(std::string(what) + ": linear-solve residual " +
                             std::to_string(rel) + " exceeds 1e-10");
}

} // namespace

GridField darcy_solve(const DarcyProblem& problem) {
    const GridField& f = problem.f;
    const GridField& g0 = problem.g;
    if (f.grid() != g0.grid()) throw ValidationError("darcy_solve: grid mismatch");
    const Grid& g = f.grid();
    if (f.values().minCoeff() <= 0.0)
        throw ValidationError("darcy_solve: ellipticity violated (min f <= 0)");
    const double h2 = g.h * g.h;
    Eigen::VectorXd uvals = Eigen::VectorXd::Zero(g.node_count());

    if (g.d == 1) {
        // -(f u')' = -g as SPD tridiagonal system over interior nodes.
        Eigen::VectorXd diag(g.n), off(g.n - 1), rhs(g.n);
        for (int i = 1; i <= g.n; ++i) {
            double fe = 0.5 * (f(i) + f(i + 1));
            double fw = 0.5 * (f(i) + f(i - 1));
            diag[i - 1] = (fe + fw) / h2;
            if (i < g.n) off[i - 1] = -fe / h2;
            rhs[i - 1] = -g0(i);
        }
        Eigen::VectorXd x = solve_tridiag(diag, off, rhs);
        for (int i = 1; i <= g.n; ++i) uvals[g.flat(i)] = x[i - 1];
    } else {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<std::size_t>(g.n) * g.n * 5);
        Eigen::VectorXd rhs(g.n * g.n);
        for (int i = 1; i <= g.n; ++i) {
            for (int j = 1; j <= g.n; ++j) {
                int row = interior_index(i, j, g.n);
                double fe = 0.5 * (f(i, j) + f(i + 1, j));
                double fw = 0.5 * (f(i, j) + f(i - 1, j));
                double fn = 0.5 * (f(i, j) + f(i, j + 1));
                double fs = 0.5 * (f(i, j) + f(i, j - 1));
                trips.emplace_back(row, row, (fe + fw + fn + fs) / h2);
                if (i > 1) trips.emplace_back(row, interior_index(i - 1, j, g.n), -fw / h2);
                if (i < g.n) trips.emplace_back(row, interior_index(i + 1, j, g.n), -fe / h2);
                if (j > 1) trips.emplace_back(row, interior_index(i, j - 1, g.n), -fs / h2);
                if (j < g.n) trips.emplace_back(row, interior_index(i, j + 1, g.n), -fn / h2);
                rhs[row] = -g0(i, j);
            }
        }
        Eigen::SparseMatrix<double> A(g.n * g.n, g.n * g.n);
        A.setFromTriplets(trips.begin(), trips.end());
        Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A);
        if (llt.info() != Eigen::Success)
            throw NumericalError("darcy_solve: Cholesky factorization failed");
        Eigen::VectorXd x = llt.solve(rhs);
        for (int i = 1; i <= g.n; ++i)
            for (int j = 1; j <= g.n; ++j) uvals[g.flat(i, j)] = x[interior_index(i, j, g.n)];
    }

    GridField u(g, std::move(uvals));
    check_residual(darcy_apply(f, u), g0, "darcy_solve");
    return u;
}

GridField schrodinger_solve(const SchrodingerProblem& problem) {
    const GridField& f = problem.f;
    const GridField& gb = problem.g_boundary;
    if (f.grid() != gb.grid()) throw ValidationError("schrodinger_solve: grid mismatch");
    const Grid& g = f.grid();
    if (f.values().minCoeff() < 0.0)
        throw ValidationError("schrodinger_solve: potential must be nonnegative");
    const int m = g.nodes_per_axis();
    double gmin = std::numeric_limits<double>::infinity();
    if (g.d == 1) {
        gmin = std::min(gb(0), gb(m - 1));
    } else {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                if (g.is_boundary(i, j)) gmin = std::min(gmin, gb(i, j));
    }
    if (!(gmin > 0.0))
        throw ValidationError("schrodinger_solve: boundary data must be strictly positive");

    const double h2 = g.h * g.h;
    Eigen::VectorXd uvals(g.node_count());

    if (g.d == 1) {
        // -u'' + 2 f u = 0 scaled from (1/2)u'' - f u = 0; boundary moved to rhs.
        Eigen::VectorXd diag(g.n), off(g.n - 1), rhs = Eigen::VectorXd::Zero(g.n);
        for (int i = 1; i <= g.n; ++i) {
            diag[i - 1] = 2.0 / h2 + 2.0 * f(i);
            if (i < g.n) off[i - 1] = -1.0 / h2;
        }
        rhs[0] += gb(0) / h2;
        rhs[g.n - 1] += gb(m - 1) / h2;
        Eigen::VectorXd x = solve_tridiag(diag, off, rhs);
        uvals[g.flat(0)] = gb(0);
        uvals[g.flat(m - 1)] = gb(m - 1);
        for (int i = 1; i <= g.n; ++i) uvals[g.flat(i)] = x[i - 1];
    } else {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<std::size_t>(g.n) * g.n * 5);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(g.n * g.n);
        for (int i = 1; i <= g.n; ++i) {
            for (int j = 1; j <= g.n; ++j) {
                int row = interior_index(i, j, g.n);
                trips.emplace_back(row, row, 4.0 / h2 + 2.0 * f(i, j));
                auto couple = [&](int ii, int jj) {
                    if (g.is_boundary(ii, jj))
                        rhs[row] += gb(ii, jj) / h2;
                    else
                        trips.emplace_back(row, interior_index(ii, jj, g.n), -1.0 / h2);
                };
                couple(i - 1, j);
                couple(i + 1, j);
                couple(i, j - 1);
                couple(i, j + 1);
            }
        }
        Eigen::SparseMatrix<double> A(g.n * g.n, g.n * g.n);
        A.setFromTriplets(trips.begin(), trips.end());
        Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A);
        if (llt.info() != Eigen::Success)
            throw NumericalError("schrodinger_solve: Cholesky factorization failed");
        Eigen::VectorXd x = llt.solve(rhs);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                uvals[g.flat(i, j)] =
                    g.is_boundary(i, j) ? gb(i, j) : x[interior_index(i, j, g.n)];
    }

    GridField u(g, std::move(uvals));
    // residual of (1/2)Lap u - f u against 0, scaled by the boundary data size
    GridField res = schrodinger_apply(f, u);
    double rnorm = 0.0;
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= (g.d == 2 ? g.n : 1); ++j)
            rnorm += res(i, g.d == 2 ? j : 0) * res(i, g.d == 2 ? j : 0);
    double scale = gmin / (g.h * g.h);
    if (!(std::sqrt(rnorm) <= 1e-10 * scale))
        throw NumericalError("schrodinger_solve: interior residual exceeds tolerance");
    if (!(u.values().minCoeff() > 0.0))
        throw NumericalError("schrodinger_solve: positivity lost");
    return u;
}

} // namespace invlab
