#pragma once

#include <utility>
#include <vector>

#include "invlab/dataset.hpp"
#include "invlab/frame.hpp"

namespace invlab {

/// Rate-optimal regularization schedule.
///
/// Darcy:        lambda = N^(-2/(2(a+1)+d))   mu = N^(-(a+1)/(2(a+1)+d))
///               nu = N^(-(a-1)/(2(a+1)+d))   resolution 2^(Jd) ~ N mu^2
/// Schrodinger:  lambda = N^(-2/(2(a+2)+d))   mu = N^(-(a+2)/(2(a+2)+d))
///               nu = N^(-a/(2(a+2)+d))
struct Hyperparameters {
    Model model = Model::Darcy;
    int alpha = 3;
    int d = 1;
    std::int64_t N = 0;
    double lambda = 0.0;
    double mu = 0.0;
    double nu = 0.0;
    int J = 0;
    double c_dim = 4.0;

    /// Sobolev exponent of the regression penalty: alpha+1 (Darcy) or
    /// alpha+2 (Schrodinger).
    int regression_exponent() const {
        return model == Model::Darcy ? alpha + 1 : alpha + 2;
    }
    /// Sobolev exponent of the inversion penalty (alpha for both models).
    int inversion_exponent() const { return alpha; }
};

Hyperparameters derive_hyperparams(Model model, std::int64_t N, int alpha, int d,
                                   double c_dim = 4.0);

/// Regression step: eta solves (Phi^T Phi + N mu^2 Lambda^s) eta = Phi^T Y
/// with s the regression exponent. Flops are dense-model counts
/// (N p^2 assembly + p^3/3 solve).
struct RegressionFit {
    CoefficientVector eta_hat;
    GridField u_hat;
    double empirical_rss = 0.0;   // (1/N) |Y - Phi eta|^2
    double penalty_value = 0.0;   // mu^2 |eta|_{h^s}^2
    double normal_residual = 0.0; // relative residual of the normal equations
    flop_count_t flops = 0;
    double wall_time = 0.0;
};

RegressionFit fit_regression(const Dataset& data, const Frame& frame,
                             const Hyperparameters& hp);

/// Psi matrix (p x p): column (l,k) holds the selection coefficients of the
/// operator applied to basis element (l,k) against u_hat:
///   Darcy        S( div(phi_lk grad u_hat) )
///   Schrodinger  S( -phi_lk u_hat )
/// Linear in u_hat.
Eigen::MatrixXd build_psi(const Frame& frame, const GridField& u_hat, Model model,
                          int max_level = -1);

/// Inversion target gamma: S(g) for Darcy, -S((1/2) Lap u_hat) for
/// Schrodinger (the interior equation has zero right-hand side; the
/// Laplacian term is absorbed into the target).
CoefficientVector inversion_target(const Frame& frame, const GridField& g_source,
                                   const GridField& u_hat, Model model, int max_level);

/// Inversion step: theta solves (Psi^T Psi + nu^2 Lambda^alpha) theta =
/// Psi^T gamma. pde_residual is the discrete L2 norm of L_{f_hat} u_hat - g
/// (Darcy) or L_{f_hat} u_hat (Schrodinger); u_hat must be supplied for it.
struct InversionFit {
    CoefficientVector theta_hat;
    GridField f_hat;
    double pde_residual = 0.0;
    double normal_residual = 0.0;
    flop_count_t flops = 0;
    double wall_time = 0.0;
};

InversionFit fit_inversion(const Frame& frame, const Eigen::MatrixXd& psi,
                           const CoefficientVector& target_gamma,
                           const Hyperparameters& hp);

/// Two-stage plug-in estimator: regression, Psi assembly, inversion.
/// g_source is the interior source sampled on the frame grid (Darcy; it is
/// ignored for Schrodinger where the interior equation is homogeneous).
std::pair<RegressionFit, InversionFit> plugin_estimate(const Dataset& data,
                                                       const GridField& g_source,
                                                       const Frame& frame,
                                                       const Hyperparameters& hp);

/// Joint PDE-penalized estimator by exact alternating minimization of
///   (1/N)|Y - Phi eta|^2 + lambda^2 |L_f u - g|_L2^2
///   + mu^2 (|eta|_{h^s}^2 + |theta|_{h^alpha}^2)
/// in frame coordinates. The trace holds the objective after every
/// half-step and is non-increasing (each half-step is an exact quadratic
/// minimization); an increase beyond 1e-12 relative raises NumericalError.
struct JointFit {
    CoefficientVector eta;
    CoefficientVector theta;
    GridField u_hat;
    GridField f_hat;
    std::vector<double> objective_trace;
    flop_count_t flops = 0;
    double wall_time = 0.0;
};

JointFit joint_pde_penalized(const Dataset& data, const GridField& g_source,
                             const Frame& frame, const Hyperparameters& hp, int iters,
                             double tol, double ellipticity_floor = 1.0);

/// Adaptive plug-in estimator: sweeps beta over [beta_min, beta_max], fits
/// the regression at exponent beta with mu_{N,beta} = N^(-beta/(2beta+d))
/// and beta-matched resolution, picks beta_hat minimizing the attained
/// objective including the mu^2 A^2 offset (ties toward larger beta), then
/// inverts at exponent alpha_min with nu = N^(-(beta_hat-2)/(2 beta_hat+d)).
struct AdaptiveFit {
    int beta_hat = 0;
    RegressionFit regression;
    InversionFit inversion;
    std::vector<std::pair<int, double>> objective_by_beta;
};

AdaptiveFit adaptive_estimate(const Dataset& data, const GridField& g_source,
                              const Frame& frame, int beta_min, int beta_max, double A,
                              int alpha_min, double c_dim = 4.0);

/// Dense-model flop counts used by the runtime benchmark.
flop_count_t plugin_flop_model(std::int64_t N, int p);

} // namespace invlab
