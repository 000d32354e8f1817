#include "invlab/bayes.hpp"

#include <algorithm>
#include <cmath>

#include "invlab/pde_solve.hpp"
#include "invlab/rng.hpp"

namespace invlab {

EigenBasis EigenBasis::build(const Grid& grid, int D) {
    if (D < 1) throw ValidationError("EigenBasis: D must be >= 1");
    EigenBasis b;
    b.grid = grid;
    b.D = D;
    if (grid.d == 1) {
        for (int k = 1; k <= D; ++k) {
            double kk = k * M_PI;
            b.e.push_back(GridField::sample(
                grid, std::function<double(double)>(
                          [kk](double x) { return std::sqrt(2.0) * std::sin(kk * x); })));
            b.lam.push_back(kk * kk);
        }
    } else {
        int kmax = static_cast<int>(std::ceil(std::sqrt(2.0 * D))) + 2;
        std::vector<std::array<int, 2>> idx;
        for (int j = 1; j <= kmax; ++j)
            for (int k = 1; k <= kmax; ++k) idx.push_back({j, k});
        std::stable_sort(idx.begin(), idx.end(), [](const auto& a, const auto& b2) {
            long la = static_cast<long>(a[0]) * a[0] + static_cast<long>(a[1]) * a[1];
            long lb = static_cast<long>(b2[0]) * b2[0] + static_cast<long>(b2[1]) * b2[1];
            if (la != lb) return la < lb;
            if (a[0] != b2[0]) return a[0] < b2[0];
            return a[1] < b2[1];
        });
        for (int t = 0; t < D; ++t) {
            int j = idx[t][0], k = idx[t][1];
            double jj = j * M_PI, kk = k * M_PI;
            b.e.push_back(GridField::sample(
                grid, std::function<double(double, double)>([jj, kk](double x, double y) {
                    return 2.0 * std::sin(jj * x) * std::sin(kk * y);
                })));
            b.lam.push_back(jj * jj + kk * kk);
        }
    }
    return b;
}

PriorSpec PriorSpec::build(const EigenBasis& basis, int alpha, std::int64_t N) {
    if (alpha < 1) throw ValidationError("PriorSpec: alpha must be >= 1");
    if (N < 1) throw ValidationError("PriorSpec: N must be >= 1");
    PriorSpec p;
    p.D = basis.D;
    p.alpha = alpha;
    p.N = N;
    const int d = basis.grid.d;
    double scale = std::pow(static_cast<double>(N),
                            -static_cast<double>(d) / (2.0 * alpha + d));
    p.sigma_diag.resize(p.D);
    for (int j = 0; j < p.D; ++j)
        p.sigma_diag[j] = scale * std::pow(basis.lam[j], -static_cast<double>(alpha));
    return p;
}

double LinkFunction::apply(double z) const {
    double sp = z > 30.0 ? z : std::log1p(std::exp(std::min(z, 30.0)));
    return f_min + sp;
}

double LinkFunction::invert(double f) const {
    if (!(f > f_min)) throw ValidationError("LinkFunction::invert: argument must exceed f_min");
    double s = f - f_min;
    return s > 30.0 ? s : std::log(std::expm1(s));
}

double LinkFunction::derivative(double z) const {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double ez = std::exp(z);
    return ez / (1.0 + ez);
}

Eigen::VectorXd warm_start(const GridField& f_hat, const EigenBasis& basis,
                           const LinkFunction& link, double clamp_margin) {
    if (f_hat.grid() != basis.grid) throw ValidationError("warm_start: grid mismatch");
    if (!(clamp_margin > 0)) throw ValidationError("warm_start: clamp_margin must be > 0");
    const double floor = link.f_min + clamp_margin;
    Eigen::VectorXd clamped = f_hat.values().cwiseMax(floor);
    GridField z(basis.grid, clamped.unaryExpr([&](double f) { return link.invert(f); }));
    Eigen::VectorXd theta(basis.D);
    for (int k = 0; k < basis.D; ++k) theta[k] = quadrature_inner(z, basis.e[k]);
    return theta;
}

DarcyPosterior::DarcyPosterior(Dataset data, EigenBasis basis, LinkFunction link,
                               PriorSpec prior, GridField g_source)
    : data_(std::move(data)), basis_(std::move(basis)), link_(link),
      prior_(std::move(prior)), g_source_(std::move(g_source)) {
    data_.validate();
    if (g_source_.grid() != basis_.grid)
        throw ValidationError("DarcyPosterior: source grid mismatch");
    if (prior_.D != basis_.D) throw ValidationError("DarcyPosterior: prior/basis D mismatch");
}

GridField DarcyPosterior::conductivity(const Eigen::VectorXd& theta) const {
    if (theta.size() != basis_.D) throw ValidationError("DarcyPosterior: theta size");
    Eigen::VectorXd F = Eigen::VectorXd::Zero(basis_.grid.node_count());
    for (int k = 0; k < basis_.D; ++k) F += theta[k] * basis_.e[k].values();
    return GridField(basis_.grid,
                     F.unaryExpr([&](double z) { return link_.apply(z); }));
}

GridField DarcyPosterior::forward(const Eigen::VectorXd& theta) const {
    return darcy_solve(DarcyProblem{conductivity(theta), g_source_});
}

double DarcyPosterior::log_density(const Eigen::VectorXd& theta) const {
    double ll = 0.0;
    if (data_.N() > 0) {
        GridField u = forward(theta);
        for (std::int64_t i = 0; i < data_.N(); ++i) {
            double r = data_.Y[i] - u.interpolate(data_.X[i]);
            ll -= 0.5 * r * r;
        }
    }
    ll -= 0.5 * theta.cwiseQuotient(prior_.sigma_diag).dot(theta);
    return ll;
}

std::pair<double, Eigen::VectorXd>
DarcyPosterior::log_posterior_grad(const Eigen::VectorXd& theta, GradientMode mode) const {
    if (!theta.allFinite()) throw ValidationError("log_posterior_grad: non-finite theta");
    if (mode == GradientMode::FiniteDifference) {
        double val = log_density(theta);
        Eigen::VectorXd grad(theta.size());
        for (int j = 0; j < theta.size(); ++j) {
            double step = 1e-5 * (1.0 + std::abs(theta[j]));
            Eigen::VectorXd tp = theta, tm = theta;
            tp[j] += step;
            tm[j] -= step;
            grad[j] = (log_density(tp) - log_density(tm)) / (2.0 * step);
        }
        return {val, grad};
    }

    const Grid& g = basis_.grid;
    Eigen::VectorXd F = Eigen::VectorXd::Zero(g.node_count());
    for (int k = 0; k < basis_.D; ++k) F += theta[k] * basis_.e[k].values();
    GridField f(g, F.unaryExpr([&](double z) { return link_.apply(z); }));
    Eigen::VectorXd dlink = F.unaryExpr([&](double z) { return link_.derivative(z); });

    Eigen::VectorXd grad = -theta.cwiseQuotient(prior_.sigma_diag);
    double val = -0.5 * theta.cwiseQuotient(prior_.sigma_diag).dot(theta);
    if (data_.N() == 0) return {val, grad};

    GridField u = darcy_solve(DarcyProblem{f, g_source_});
    // residuals and their interpolation-weight spraying onto interior nodes
    Eigen::VectorXd rho = Eigen::VectorXd::Zero(g.node_count());
    for (std::int64_t i = 0; i < data_.N(); ++i) {
        double r = data_.Y[i] - u.interpolate(data_.X[i]);
        val -= 0.5 * r * r;
        const auto& x = data_.X[i];
        int ci = std::min(g.n, static_cast<int>(std::floor(x[0] / g.h)));
        double wx = (x[0] - g.coord(ci)) / g.h;
        if (g.d == 1) {
            rho[g.flat(ci)] += r * (1 - wx);
            rho[g.flat(ci + 1)] += r * wx;
        } else {
            int cj = std::min(g.n, static_cast<int>(std::floor(x[1] / g.h)));
            double wy = (x[1] - g.coord(cj)) / g.h;
            rho[g.flat(ci, cj)] += r * (1 - wx) * (1 - wy);
            rho[g.flat(ci, cj + 1)] += r * (1 - wx) * wy;
            rho[g.flat(ci + 1, cj)] += r * wx * (1 - wy);
            rho[g.flat(ci + 1, cj + 1)] += r * wx * wy;
        }
    }
    // boundary contributions are fixed by the Dirichlet condition
    const int mpa = g.nodes_per_axis();
    for (int i = 0; i < mpa; ++i) {
        if (g.d == 1) {
            if (g.is_boundary(i)) rho[g.flat(i)] = 0.0;
        } else {
            for (int j = 0; j < mpa; ++j)
                if (g.is_boundary(i, j)) rho[g.flat(i, j)] = 0.0;
        }
    }
    // adjoint solve: w = A^-1 rho with A = -L_f restricted to the interior;
    // darcy_solve returns A^-1(-g), so pass -rho as the source.
    GridField w = darcy_solve(DarcyProblem{f, GridField(g, (-rho).eval())});
    for (int k = 0; k < basis_.D; ++k) {
        GridField dfk(g, dlink.cwiseProduct(basis_.e[k].values()).eval());
        GridField ck = darcy_apply(dfk, u);
        grad[k] += w.values().dot(ck.values());
    }
    return {val, grad};
}

UlaChain ula_run(const Eigen::VectorXd& theta_init, const GradFn& grad_log_pi,
                 const UlaConfig& config) {
    if (!(config.delta > 0)) throw ValidationError("ula_run: delta must be > 0");
    if (config.steps < 1) throw ValidationError("ula_run: steps must be >= 1");
    const int D = static_cast<int>(theta_init.size());
    RandomStream rng(config.seed);
    UlaChain chain;
    chain.config = config;
    chain.states.resize(config.steps + 1, D);
    chain.states.row(0) = theta_init.transpose();
    Eigen::VectorXd theta = theta_init;
    const double noise = std::sqrt(2.0 * config.delta);
    for (std::int64_t k = 0; k < config.steps; ++k) {
        Eigen::VectorXd grad = grad_log_pi(theta);
        for (int j = 0; j < D; ++j)
            theta[j] += config.delta * grad[j] + noise * rng.gaussian();
        if (theta.norm() > 1e6)
            throw NumericalError("ula_run: chain diverged at step " + std::to_string(k + 1) +
                                 " (|theta| > 1e6; reduce delta)");
        chain.states.row(k + 1) = theta.transpose();
    }
    return chain;
}

Eigen::VectorXd posterior_mean(const UlaChain& chain, std::int64_t burn_in) {
    const std::int64_t n = chain.states.rows();
    if (burn_in < 0 || burn_in >= n)
        throw ValidationError("posterior_mean: empty averaging window");
    return chain.states.bottomRows(n - burn_in).colwise().mean().transpose();
}

double estimate_curvature(const GradFn& grad_log_pi, const Eigen::VectorXd& theta,
                          int iterations) {
    const int D = static_cast<int>(theta.size());
    RandomStream rng(12345);
    Eigen::VectorXd v(D);
    for (int j = 0; j < D; ++j) v[j] = rng.gaussian();
    v.normalize();
    double lam = 1.0;
    for (int it = 0; it < iterations; ++it) {
        double eps = 1e-4;
        Eigen::VectorXd hv =
            (grad_log_pi(theta + eps * v) - grad_log_pi(theta - eps * v)) / (2.0 * eps);
        lam = hv.norm();
        if (lam < 1e-12) break;
        v = -hv / lam; // -Hessian of log pi is positive around a mode
    }
    return std::max(lam, 1e-12);
}

} // namespace invlab
