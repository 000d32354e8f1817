#pragma once

#include <functional>

#include "invlab/dataset.hpp"
#include "invlab/grid.hpp"

namespace invlab {

/// Dirichlet-Laplacian eigenpairs on (0,1)^d: for d=1,
/// e_k(x) = sqrt(2) sin(k pi x) with lam_k = k^2 pi^2; for d=2 tensor
/// products with summed eigenvalues, sorted ascending (ties by index order).
struct EigenBasis {
    Grid grid;
    int D = 0;
    std::vector<GridField> e;
    std::vector<double> lam;

    static EigenBasis build(const Grid& grid, int D);
};

/// Gaussian prior N(0, N^(-d/(2 alpha + d)) Sigma), Sigma = diag(lam_j^-alpha).
struct PriorSpec {
    int D = 0;
    int alpha = 2;
    std::int64_t N = 1;
    Eigen::VectorXd sigma_diag;

    static PriorSpec build(const EigenBasis& basis, int alpha, std::int64_t N);
};

/// Shifted softplus link f = f_min + log(1 + exp(z)): strictly increasing,
/// derivative in (0,1), exact inverse on (f_min, inf).
struct LinkFunction {
    double f_min = 0.5;

    double apply(double z) const;
    double invert(double f) const;
    double derivative(double z) const;
};

/// Warm-start initializer: theta_k = <link^-1(clamped f_hat), e_k>_L2,
/// with values <= f_min + clamp_margin clamped up before inversion.
Eigen::VectorXd warm_start(const GridField& f_hat, const EigenBasis& basis,
                           const LinkFunction& link, double clamp_margin);

enum class GradientMode { Adjoint, FiniteDifference };

/// Darcy posterior over truncated eigenbasis coefficients:
/// log pi(theta) = -(1/2) sum_i [Y_i - G(f_theta)(X_i)]^2
///                 - (1/2) theta^T Sigma^-1 theta + const,
/// f_theta = link(sum_k theta_k e_k). Gradients in adjoint mode cost one
/// forward and one adjoint solve; finite differences use central steps
/// 1e-5 (1+|theta_j|).
class DarcyPosterior {
public:
    DarcyPosterior(Dataset data, EigenBasis basis, LinkFunction link, PriorSpec prior,
                   GridField g_source);

    GridField conductivity(const Eigen::VectorXd& theta) const;
    GridField forward(const Eigen::VectorXd& theta) const;
    double log_density(const Eigen::VectorXd& theta) const;
    std::pair<double, Eigen::VectorXd> log_posterior_grad(const Eigen::VectorXd& theta,
                                                          GradientMode mode) const;

    const EigenBasis& basis() const { return basis_; }
    const PriorSpec& prior() const { return prior_; }
    const Dataset& data() const { return data_; }

private:
    Dataset data_;
    EigenBasis basis_;
    LinkFunction link_;
    PriorSpec prior_;
    GridField g_source_;
};

using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct UlaConfig {
    double delta = 1e-3;
    std::int64_t steps = 10000;
    std::int64_t burn_in = 0;
    std::uint64_t seed = 0;
    GradientMode gradient_mode = GradientMode::Adjoint;
};

/// Chain of D-dimensional Langevin states; states.row(0) is theta_init.
struct UlaChain {
    Eigen::MatrixXd states;
    UlaConfig config;
};

/// Unadjusted Langevin algorithm with the standard discretization
///   theta' = theta + delta * grad_log_pi(theta) + sqrt(2 delta) * xi.
/// Deterministic given the seed; aborts with a diagnostic if the state
/// norm exceeds 1e6.
UlaChain ula_run(const Eigen::VectorXd& theta_init, const GradFn& grad_log_pi,
                 const UlaConfig& config);

/// Arithmetic mean of the post-burn-in states.
Eigen::VectorXd posterior_mean(const UlaChain& chain, std::int64_t burn_in);

/// Power-iteration estimate of the local log-density curvature at theta,
/// for the default step size delta = 0.5 / L_hat.
double estimate_curvature(const GradFn& grad_log_pi, const Eigen::VectorXd& theta,
                          int iterations = 20);

} // namespace invlab
