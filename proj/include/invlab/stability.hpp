#pragma once

#include "invlab/dataset.hpp"
#include "invlab/grid.hpp"

namespace invlab {

/// One (u, f, g) configuration satisfying its PDE relation. For the
/// Schrodinger diagnostics g plays the role of the interior residual h.
struct Triplet {
    GridField u;
    GridField f;
    GridField g;
};

/// Terms of a generalized stability inequality evaluated on a pair of
/// triplets: lhs = |f1-f2|_L2, term_u the solution-mismatch term, term_g the
/// constraint-mismatch term, ratio = lhs/(term_u+term_g) with the convention
/// 0 when everything vanishes and +inf when only the denominator does.
struct StabilityReport {
    double lhs = 0.0;
    double term_u = 0.0;
    double term_g = 0.0;
    double ratio = 0.0;
};

/// Darcy form: lhs <= C( |f2|_C1 |u1-u2|_H2 + |g1-g2|_L2 ).
/// Hypotheses (checked, ValidationError naming the violated clause):
/// min f1 >= f_min > 0, min g1 >= g_min > 0, u1 = 0 on the boundary, and
/// both triplets satisfy div(f grad u) = g at interior nodes to 1e-8.
/// Only the reference triplet t1 carries the structural hypotheses.
StabilityReport darcy_stability_gap(const Triplet& t1, const Triplet& t2, double f_min,
                                    double g_min);

/// Schrodinger form: lhs <= C( |u1-u2|_H2 + |h1-h2|_L2 ), requiring
/// min u_i >= c_min > 0 for both triplets and the PDE relations
/// (1/2)Lap(u) - f u = h to 1e-8.
StabilityReport schrodinger_stability_gap(const Triplet& t1, const Triplet& t2,
                                          double c_min);

/// Discrepancy functional: (1/N) sum_i (u_candidate(X_i) - u0(X_i))^2 +
/// penalty_value, with u0 the dataset's recorded ground-truth responses.
double discrepancy_tau(const GridField& u_candidate, double penalty_value,
                       const Dataset& data);

} // namespace invlab
