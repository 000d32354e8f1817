#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "invlab/dataset.hpp"
#include "invlab/estimators.hpp"
#include "invlab/stability.hpp"

namespace invlab {

/// Analytic ground-truth fixture: the coefficient f0 and the source (Darcy)
/// or boundary datum (Schrodinger), with the documented coefficient minimum.
struct GroundTruth {
    Model model = Model::Darcy;
    std::string name;
    int d = 1;
    std::function<double(double, double)> f0;
    std::function<double(double, double)> g;
    double f0_min = 0.0;
    std::string smoothness;
};

/// Fixture registry; throws ValidationError naming the registry on unknown
/// names. Available: darcy {constant, bump, sine}, schrodinger {constant,
/// well, bump}.
GroundTruth ground_truths(Model model, const std::string& name, int d = 1);
std::vector<std::string> fixture_names(Model model);

GridField sample_f0(const GroundTruth& gt, const Grid& grid);
GridField sample_g(const GroundTruth& gt, const Grid& grid);
/// Forward solution of the fixture on the given grid.
GridField solve_truth(const GroundTruth& gt, const Grid& grid);

/// Anti-inverse-crime rule: the data-generation grid must be at least 4x
/// finer than the estimation grid.
void check_anti_inverse_crime(int fine_n, int estimation_n);

/// Y_i = u0(X_i) + sigma eps_i with X_i uniform on (0,1)^d and u0 the
/// fine-grid forward solution; reproducible from the seed.
Dataset simulate(const GroundTruth& gt, std::int64_t N, double sigma,
                 std::uint64_t seed, int fine_n);

struct SlopeFit {
    double slope = 0.0;
    double stderr_slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Ordinary least squares of y against x (both already in log scale when
/// used for rates).
SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y);

struct RateRow {
    std::int64_t N = 0;
    int replications = 0;
    double mse_u_mean = 0.0, mse_u_se = 0.0;
    double mse_f_mean = 0.0, mse_f_se = 0.0;
    flop_count_t flops = 0;
    double wall_mean = 0.0;
};

struct RateTable {
    std::vector<RateRow> rows;
    SlopeFit forward;  // log mean |u_hat - u0|^2 vs log N
    SlopeFit inverse;  // log mean |f_hat - f0|^2 vs log N
    SlopeFit flops;    // log flops vs log N
    SlopeFit wall;     // log mean wall vs log N (informational)
};

struct BenchConfig {
    Model model = Model::Darcy;
    std::string fixture = "bump";
    std::vector<std::int64_t> N_grid;
    int reps = 20;
    int alpha = 3;
    int d = 1;
    double sigma = 0.05;
    std::uint64_t seed = 1;
    int estimation_n = 511;
    int fine_n = 2047;
    int spline_order = 4;
    double c_dim = 4.0;
    int jobs = 1;
};

/// Monte-Carlo convergence-rate benchmark: per-N mean squared L2 errors by
/// fine-grid quadrature against the ground truth, with OLS slopes of
/// log(MSE) vs log(N). Requires >= 4 values of N spanning >= 3 octaves and
/// reps >= 10. Any replication failure aborts with the failing seed.
RateTable rate_benchmark(const BenchConfig& config);

/// Runtime scaling of the plug-in estimator: deterministic dense-model flop
/// counts and wall time per N (one replication each).
RateTable runtime_benchmark(const BenchConfig& config);

struct StabilitySuiteConfig {
    Model model = Model::Darcy;
    int pairs = 100;
    int grid_n = 127;
    int d = 1;
    double f_min = 1.0;
    double g_min = 1.0;
    double c_min = 0.1; // Schrodinger solution floor
    std::uint64_t seed = 1;
};

struct StabilitySample {
    std::uint64_t seed = 0;
    StabilityReport report;
};

/// Random-pair stability suite around a reference fixture triplet: smooth
/// frame-expansion perturbations with level-decaying coefficients, rescaled
/// to a prescribed C1 size; alternates exact-solution pairs (both triplets
/// solve their PDE, term_g from the source perturbation) and free pairs
/// (u2, f2 perturbed freely, g2 defined by application).
std::vector<StabilitySample> stability_suite(const StabilitySuiteConfig& config);

} // namespace invlab
