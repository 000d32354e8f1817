#include "invlab/estimators.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>

#include "invlab/pde_apply.hpp"

namespace invlab {

std::string model_name(Model m) {
    return m == Model::Darcy ? "darcy" : "schrodinger";
}

Model model_from_name(const std::string& name) {
    if (name == "darcy") return Model::Darcy;
    if (name == "schrodinger") return Model::Schrodinger;
    throw ValidationError("unknown model '" + name + "' (darcy|schrodinger)");
}

void Dataset::validate() const {
    if (X.size() != static_cast<std::size_t>(Y.size()))
        throw ValidationError("Dataset: |X| != |Y|");
    if (u0_at_x.size() != 0 && u0_at_x.size() != Y.size())
        throw ValidationError("Dataset: u0_at_x size mismatch");
    if (d != 1 && d != 2) throw ValidationError("Dataset: d must be 1 or 2");
    for (const auto& x : X)
        for (int a = 0; a < d; ++a)
            if (!(x[a] > 0.0 && x[a] < 1.0))
                throw ValidationError("Dataset: design point not strictly interior");
    if (!Y.allFinite()) throw ValidationError("Dataset: non-finite response");
}

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

flop_count_t regression_flop_model(std::int64_t N, int p) {
    flop_count_t pp = static_cast<flop_count_t>(p);
    return static_cast<flop_count_t>(N) * pp * pp + pp * pp * pp / 3;
}

flop_count_t psi_flop_model(int p) {
    flop_count_t pp = static_cast<flop_count_t>(p);
    return pp * pp * pp;
}

flop_count_t inversion_flop_model(int p) {
    flop_count_t pp = static_cast<flop_count_t>(p);
    return pp * pp * pp + pp * pp * pp / 3 + pp * pp;
}

// SPD solve with one step of iterative refinement; returns the relative
// residual of the normal equations.
double spd_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                 const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
        throw NumericalError(std::string(what) +
                             ": normal-equation matrix not positive definite "
                             "(diag range [" +
                             std::to_string(A.diagonal().minCoeff()) + ", " +
                             std::to_string(A.diagonal().maxCoeff()) + "])");
    x = llt.solve(b);
    x += llt.solve(b - A * x);
    double rel = (A * x - b).norm() / (A.norm() * x.norm() + b.norm() + 1e-300);
    if (!(rel <= 1e-10))
        throw NumericalError(std::string(what) + ": normal-equation residual " +
                             std::to_string(rel) + " exceeds 1e-10");
    return rel;
}

// Interior L2 norm of (applied - target) with the target's boundary ignored,
// matching the apply operators' zeroed-boundary convention.
double interior_l2_gap(const GridField& a, const GridField& b) {
    const Grid& g = a.grid();
    double s = 0.0;
    for (int i = 1; i <= g.n; ++i) {
        if (g.d == 1) {
            double r = a(i) - b(i);
            s += quad_weight(g, i) * r * r;
        } else {
            for (int j = 1; j <= g.n; ++j) {
                double r = a(i, j) - b(i, j);
                s += quad_weight(g, i, j) * r * r;
            }
        }
    }
    return std::sqrt(s);
}

GridField zero_boundary(const GridField& f) {
    const Grid& g = f.grid();
    Eigen::VectorXd v = f.values();
    const int m = g.nodes_per_axis();
    if (g.d == 1) {
        v[g.flat(0)] = 0.0;
        v[g.flat(m - 1)] = 0.0;
    } else {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                if (g.is_boundary(i, j)) v[g.flat(i, j)] = 0.0;
    }
    return GridField(g, std::move(v));
}

} // namespace

Hyperparameters derive_hyperparams(Model model, std::int64_t N, int alpha, int d,
                                   double c_dim) {
    if (N < 2) throw ValidationError("derive_hyperparams: N must be >= 2");
    if (alpha < 2) throw ValidationError("derive_hyperparams: alpha must be >= 2");
    if (d != 1 && d != 2) throw ValidationError("derive_hyperparams: d must be 1 or 2");
    if (2.0 * alpha <= d + 2.0)
        std::cerr << "[invlab] warning: alpha <= d/2 + 1 is outside the theorem regime\n";
    Hyperparameters hp;
    hp.model = model;
    hp.alpha = alpha;
    hp.d = d;
    hp.N = N;
    hp.c_dim = c_dim;
    const double nn = static_cast<double>(N);
    if (model == Model::Darcy) {
        const double den = 2.0 * (alpha + 1) + d;
        hp.lambda = std::pow(nn, -2.0 / den);
        hp.mu = std::pow(nn, -(alpha + 1.0) / den);
        hp.nu = std::pow(nn, -(alpha - 1.0) / den);
        hp.J = resolution_level(N, alpha, d, c_dim);
    } else {
        const double den = 2.0 * (alpha + 2) + d;
        hp.lambda = std::pow(nn, -2.0 / den);
        hp.mu = std::pow(nn, -(alpha + 2.0) / den);
        hp.nu = std::pow(nn, -static_cast<double>(alpha) / den);
        hp.J = resolution_level(N, alpha + 1, d, c_dim);
    }
    return hp;
}

RegressionFit fit_regression(const Dataset& data, const Frame& frame,
                             const Hyperparameters& hp) {
    auto t0 = clock_type::now();
    data.validate();
    if (data.N() < 1) throw ValidationError("fit_regression: empty dataset");
    if (data.N() != hp.N)
        throw ValidationError("fit_regression: dataset size inconsistent with hp.N");
    if (data.d != frame.grid().d)
        throw ValidationError("fit_regression: dimension mismatch");
    if (hp.J > frame.max_level())
        throw ValidationError("fit_regression: frame not built to hp.J");

    const int p = frame.p_at_level(hp.J);
    const std::int64_t N = data.N();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    std::vector<std::pair<int, double>> row;
    for (std::int64_t i = 0; i < N; ++i) {
        frame.design_row(data.X[i], hp.J, row);
        for (auto& [c1, v1] : row) {
            b[c1] += v1 * data.Y[i];
            for (auto& [c2, v2] : row) A(c1, c2) += v1 * v2;
        }
    }
    Eigen::VectorXd lam = level_weight_diagonal(frame, hp.J, hp.regression_exponent());
    A.diagonal() += static_cast<double>(N) * hp.mu * hp.mu * lam;

    RegressionFit fit;
    fit.normal_residual = spd_solve(A, b, fit.eta_hat.entries, "fit_regression");
    fit.eta_hat.J = hp.J;
    fit.u_hat = frame.synthesize(fit.eta_hat);

    double rss = 0.0;
    for (std::int64_t i = 0; i < N; ++i) {
        frame.design_row(data.X[i], hp.J, row);
        double pred = 0.0;
        for (auto& [c, v] : row) pred += v * fit.eta_hat.entries[c];
        double r = data.Y[i] - pred;
        rss += r * r;
    }
    fit.empirical_rss = rss / static_cast<double>(N);
    fit.penalty_value =
        hp.mu * hp.mu * fit.eta_hat.entries.cwiseProduct(lam).dot(fit.eta_hat.entries);
    fit.flops = regression_flop_model(N, p);
    fit.wall_time = seconds_since(t0);
    return fit;
}

Eigen::MatrixXd build_psi(const Frame& frame, const GridField& u_hat, Model model,
                          int max_level) {
    if (u_hat.grid() != frame.grid())
        throw ValidationError("build_psi: u_hat grid mismatch");
    const int J = max_level < 0 ? frame.max_level() : max_level;
    const int p = frame.p_at_level(J);
    Eigen::MatrixXd psi(p, p);
    for (int col = 0; col < p; ++col) {
        GridField phi = frame.basis_field(col);
        GridField w = model == Model::Darcy
                          ? darcy_apply(phi, u_hat)
                          : GridField(frame.grid(),
                                      (-phi.values().cwiseProduct(u_hat.values())).eval());
        psi.col(col) = frame.select(w, J).entries;
    }
    return psi;
}

CoefficientVector inversion_target(const Frame& frame, const GridField& g_source,
                                   const GridField& u_hat, Model model, int max_level) {
    const int J = max_level < 0 ? frame.max_level() : max_level;
    if (model == Model::Darcy) {
        if (g_source.grid() != frame.grid())
            throw ValidationError("inversion_target: source grid mismatch");
        // boundary samples zeroed to match the interior-only apply stencil
        return frame.select(zero_boundary(g_source), J);
    }
    // interior equation L_f u = 0: the (1/2) Lap u_hat term moves into the
    // target, with the sign matching the -phi*u_hat Psi columns
    GridField half_lap = schrodinger_apply(GridField::zero(frame.grid()), u_hat);
    CoefficientVector gamma = frame.select(half_lap, J);
    gamma.entries = -gamma.entries;
    return gamma;
}

InversionFit fit_inversion(const Frame& frame, const Eigen::MatrixXd& psi,
                           const CoefficientVector& target_gamma,
                           const Hyperparameters& hp) {
    auto t0 = clock_type::now();
    if (!(hp.nu > 0)) throw ValidationError("fit_inversion: nu must be > 0");
    const int p = static_cast<int>(psi.cols());
    if (psi.rows() != psi.cols() || target_gamma.entries.size() != p)
        throw ValidationError("fit_inversion: psi/gamma dimension mismatch");

    Eigen::MatrixXd A = psi.transpose() * psi;
    Eigen::VectorXd lam = level_weight_diagonal(frame, target_gamma.J, hp.inversion_exponent());
    A.diagonal() += hp.nu * hp.nu * lam;
    Eigen::VectorXd b = psi.transpose() * target_gamma.entries;

    InversionFit fit;
    fit.normal_residual = spd_solve(A, b, fit.theta_hat.entries, "fit_inversion");
    fit.theta_hat.J = target_gamma.J;
    fit.f_hat = frame.synthesize(fit.theta_hat);
    // coefficient-space residual; plugin_estimate overwrites with the
    // discrete-L2 functional residual when u_hat and g are at hand
    fit.pde_residual = (psi * fit.theta_hat.entries - target_gamma.entries).norm();
    fit.flops = inversion_flop_model(p);
    fit.wall_time = seconds_since(t0);
    return fit;
}

std::pair<RegressionFit, InversionFit> plugin_estimate(const Dataset& data,
                                                       const GridField& g_source,
                                                       const Frame& frame,
                                                       const Hyperparameters& hp) {
    RegressionFit reg = fit_regression(data, frame, hp);
    Eigen::MatrixXd psi = build_psi(frame, reg.u_hat, hp.model, hp.J);
    CoefficientVector gamma = inversion_target(frame, g_source, reg.u_hat, hp.model, hp.J);
    InversionFit inv = fit_inversion(frame, psi, gamma, hp);
    if (hp.model == Model::Darcy) {
        inv.pde_residual = interior_l2_gap(darcy_apply(inv.f_hat, reg.u_hat), g_source);
    } else {
        GridField zero = GridField::zero(frame.grid());
        inv.pde_residual = interior_l2_gap(schrodinger_apply(inv.f_hat, reg.u_hat), zero);
    }
    inv.flops += psi_flop_model(frame.p_at_level(hp.J));
    return {std::move(reg), std::move(inv)};
}

flop_count_t plugin_flop_model(std::int64_t N, int p) {
    return regression_flop_model(N, p) + psi_flop_model(p) + inversion_flop_model(p);
}

JointFit joint_pde_penalized(const Dataset& data, const GridField& g_source,
                             const Frame& frame, const Hyperparameters& hp, int iters,
                             double tol, double ellipticity_floor) {
    auto t0 = clock_type::now();
    if (iters < 1) throw ValidationError("joint_pde_penalized: iters must be >= 1");
    if (!(tol > 0)) throw ValidationError("joint_pde_penalized: tol must be > 0");
    data.validate();
    if (data.N() != hp.N)
        throw ValidationError("joint_pde_penalized: dataset size inconsistent with hp.N");
    const Grid& grid = frame.grid();
    const int J = hp.J;
    const int p = frame.p_at_level(J);
    const std::int64_t N = data.N();
    const double lam2 = hp.lambda * hp.lambda;
    const double mu2 = hp.mu * hp.mu;
    const bool darcy = hp.model == Model::Darcy;

    GridField g_int = darcy ? zero_boundary(g_source) : GridField::zero(grid);

    // data part
    Eigen::MatrixXd PtP = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd PtY = Eigen::VectorXd::Zero(p);
    double yty = 0.0;
    {
        std::vector<std::pair<int, double>> row;
        for (std::int64_t i = 0; i < N; ++i) {
            frame.design_row(data.X[i], J, row);
            for (auto& [c1, v1] : row) {
                PtY[c1] += v1 * data.Y[i];
                for (auto& [c2, v2] : row) PtP(c1, c2) += v1 * v2;
            }
            yty += data.Y[i] * data.Y[i];
        }
    }
    Eigen::VectorXd lam_u = level_weight_diagonal(frame, J, hp.regression_exponent());
    Eigen::VectorXd lam_f = level_weight_diagonal(frame, J, hp.inversion_exponent());
    Eigen::VectorXd wq(grid.node_count());
    {
        const int mpa = grid.nodes_per_axis();
        for (int i = 0; i < mpa; ++i) {
            if (grid.d == 1)
                wq[grid.flat(i)] = quad_weight(grid, i);
            else
                for (int j = 0; j < mpa; ++j) wq[grid.flat(i, j)] = quad_weight(grid, i, j);
        }
    }

    auto objective = [&](const Eigen::VectorXd& eta, const Eigen::VectorXd& theta) {
        double data_term =
            (eta.dot(PtP * eta) - 2.0 * eta.dot(PtY) + yty) / static_cast<double>(N);
        CoefficientVector ceta{J, eta}, ctheta{J, theta};
        GridField u = frame.synthesize(ceta);
        GridField f = frame.synthesize(ctheta);
        GridField r = darcy ? darcy_apply(f, u)
                            : schrodinger_apply(f, u);
        Eigen::VectorXd rv = r.values() - g_int.values();
        double pde_term = rv.cwiseProduct(wq).dot(rv);
        double pen = mu2 * (eta.cwiseProduct(lam_u).dot(eta) +
                            theta.cwiseProduct(lam_f).dot(theta));
        return data_term + lam2 * pde_term + pen;
    };

    // init: regression solve with the same mu, f at the ellipticity floor
    JointFit out;
    {
        Eigen::MatrixXd A0 = PtP;
        A0.diagonal() += static_cast<double>(N) * mu2 * lam_u;
        Eigen::VectorXd eta0;
        spd_solve(A0, PtY, eta0, "joint init");
        out.eta = CoefficientVector{J, eta0};
    }
    out.theta =
        frame.select(GridField::constant(grid, ellipticity_floor), J);

    Eigen::VectorXd eta = out.eta.entries, theta = out.theta.entries;
    std::vector<double> trace;
    trace.push_back(objective(eta, theta));

    // columns of the PDE operator, linear in the free block
    Eigen::MatrixXd Bcols(grid.node_count(), p);
    auto guard_monotone = [&](double next) {
        double prev = trace.back();
        double scale = std::max({std::abs(prev), std::abs(next), 1.0});
        if (next > prev + 1e-12 * scale)
            throw NumericalError("joint_pde_penalized: objective increased (assembly bug)");
        trace.push_back(next);
    };

    for (int it = 0; it < iters; ++it) {
        // u-step: residual is linear in eta for fixed theta
        GridField f = frame.synthesize(CoefficientVector{J, theta});
        for (int k = 0; k < p; ++k) {
            GridField phi = frame.basis_field(k);
            GridField col = darcy ? darcy_apply(f, phi) : schrodinger_apply(f, phi);
            Bcols.col(k) = col.values();
        }
        Eigen::MatrixXd Bw = wq.asDiagonal() * Bcols;
        Eigen::MatrixXd Au =
            PtP / static_cast<double>(N) + lam2 * (Bcols.transpose() * Bw);
        Au.diagonal() += mu2 * lam_u;
        Eigen::VectorXd bu =
            PtY / static_cast<double>(N) + lam2 * (Bw.transpose() * g_int.values());
        spd_solve(Au, bu, eta, "joint u-step");
        guard_monotone(objective(eta, theta));

        // f-step: residual is linear in theta for fixed eta
        GridField u = frame.synthesize(CoefficientVector{J, eta});
        Eigen::VectorXd target = g_int.values();
        if (darcy) {
            for (int k = 0; k < p; ++k) {
                GridField phi = frame.basis_field(k);
                Bcols.col(k) = darcy_apply(phi, u).values();
            }
        } else {
            // residual = (1/2) Lap u - (sum theta_k phi_k) u
            GridField half_lap = schrodinger_apply(GridField::zero(grid), u);
            target = -half_lap.values(); // -(columns theta) matches -phi*u sign
            for (int k = 0; k < p; ++k) {
                GridField phi = frame.basis_field(k);
                Bcols.col(k) = (-phi.values().cwiseProduct(u.values())).eval();
            }
        }
        Bw = wq.asDiagonal() * Bcols;
        Eigen::MatrixXd Af = lam2 * (Bcols.transpose() * Bw);
        Af.diagonal() += mu2 * lam_f;
        Eigen::VectorXd bf = lam2 * (Bw.transpose() * target);
        if (lam2 == 0.0) {
            theta.setZero(p);
        } else {
            spd_solve(Af, bf, theta, "joint f-step");
        }
        guard_monotone(objective(eta, theta));

        std::size_t k = trace.size();
        double prev = trace[k - 3], cur = trace[k - 1];
        if (std::abs(prev - cur) < tol * std::max(1.0, std::abs(prev))) break;
    }

    out.eta = CoefficientVector{J, eta};
    out.theta = CoefficientVector{J, theta};
    out.u_hat = frame.synthesize(out.eta);
    out.f_hat = frame.synthesize(out.theta);
    out.objective_trace = std::move(trace);
    flop_count_t pp = static_cast<flop_count_t>(p);
    out.flops = regression_flop_model(N, p) +
                static_cast<flop_count_t>(out.objective_trace.size() / 2) *
                    (2 * pp * pp * static_cast<flop_count_t>(grid.node_count()) +
                     2 * pp * pp * pp / 3);
    out.wall_time = seconds_since(t0);
    return out;
}

AdaptiveFit adaptive_estimate(const Dataset& data, const GridField& g_source,
                              const Frame& frame, int beta_min, int beta_max, double A,
                              int alpha_min, double c_dim) {
    if (!(2 <= beta_min && beta_min <= beta_max))
        throw ValidationError("adaptive_estimate: need 2 <= beta_min <= beta_max");
    if (!(A > 0)) throw ValidationError("adaptive_estimate: A must be > 0");
    data.validate();
    const std::int64_t N = data.N();
    const int d = data.d;

    AdaptiveFit out;
    double best = std::numeric_limits<double>::infinity();
    RegressionFit best_fit;
    Hyperparameters best_hp;
    for (int beta = beta_min; beta <= beta_max; ++beta) {
        Hyperparameters hp;
        hp.model = Model::Darcy; // regression exponent alpha+1 = beta
        hp.alpha = beta - 1;
        hp.d = d;
        hp.N = N;
        hp.c_dim = c_dim;
        hp.mu = std::pow(static_cast<double>(N),
                         -static_cast<double>(beta) / (2.0 * beta + d));
        hp.J = resolution_level(N, beta - 1, d, c_dim);
        if (hp.J > frame.max_level())
            throw ValidationError("adaptive_estimate: frame not deep enough for beta=" +
                                  std::to_string(beta));
        RegressionFit fit = fit_regression(data, frame, hp);
        double obj = fit.empirical_rss + fit.penalty_value + hp.mu * hp.mu * A * A;
        out.objective_by_beta.emplace_back(beta, obj);
        if (obj <= best) { // ties resolve toward larger beta
            best = obj;
            out.beta_hat = beta;
            best_fit = fit;
            best_hp = hp;
        }
    }

    Hyperparameters hp_inv = best_hp;
    hp_inv.alpha = alpha_min; // inversion penalty exponent
    hp_inv.nu = std::pow(static_cast<double>(N),
                         -(out.beta_hat - 2.0) / (2.0 * out.beta_hat + d));
    Eigen::MatrixXd psi = build_psi(frame, best_fit.u_hat, data.model, best_hp.J);
    CoefficientVector gamma =
        inversion_target(frame, g_source, best_fit.u_hat, data.model, best_hp.J);
    out.inversion = fit_inversion(frame, psi, gamma, hp_inv);
    if (data.model == Model::Darcy)
        out.inversion.pde_residual =
            interior_l2_gap(darcy_apply(out.inversion.f_hat, best_fit.u_hat), g_source);
    out.regression = std::move(best_fit);
    return out;
}

} // namespace invlab
