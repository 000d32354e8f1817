#include "invlab/stability.hpp"

#include <cmath>
#include <limits>

#include "invlab/pde_apply.hpp"

namespace invlab {

namespace {

double interior_l2(const GridField& r) {
    const Grid& g = r.grid();
    double s = 0.0;
    for (int i = 1; i <= g.n; ++i) {
        if (g.d == 1) {
            s += quad_weight(g, i) * r(i) * r(i);
        } else {
            for (int j = 1; j <= g.n; ++j) s += quad_weight(g, i, j) * r(i, j) * r(i, j);
        }
    }
    return std::sqrt(s);
}

void check_relation(const Triplet& t, bool darcy, const char* who) {
    GridField applied = darcy ? darcy_apply(t.f, t.u) : schrodinger_apply(t.f, t.u);
    Eigen::VectorXd diff = applied.values() - t.g.values();
    const Grid& g = t.u.grid();
    double worst = 0.0;
    for (int i = 1; i <= g.n; ++i) {
        if (g.d == 1) {
            worst = std::max(worst, std::abs(diff[g.flat(i)]));
        } else {
            for (int j = 1; j <= g.n; ++j)
                worst = std::max(worst, std::abs(diff[g.flat(i, j)]));
        }
    }
    double scale = std::max(1.0, t.g.values().cwiseAbs().maxCoeff());
    if (worst > 1e-8 * scale)
        throw ValidationError(std::string(who) +
                              ": PDE relation violated (interior residual " +
                              std::to_string(worst) + ")");
}

GridField diff_field(const GridField& a, const GridField& b) {
    if (a.grid() != b.grid()) throw ValidationError("stability: grid mismatch in pair");
    return GridField(a.grid(), a.values() - b.values());
}

double make_ratio(double lhs, double den) {
    if (den > 0.0) return lhs / den;
    if (lhs > 0.0) return std::numeric_limits<double>::infinity();
    return 0.0;
}

} // namespace

StabilityReport darcy_stability_gap(const Triplet& t1, const Triplet& t2, double f_min,
                                    double g_min) {
    if (!(f_min > 0) || !(g_min > 0))
        throw ValidationError("darcy_stability_gap: f_min and g_min must be > 0");
    if (t1.f.values().minCoeff() < f_min)
        throw ValidationError("darcy_stability_gap: hypothesis min f1 >= f_min violated");
    if (t1.g.values().minCoeff() < g_min)
        throw ValidationError("darcy_stability_gap: hypothesis min g1 >= g_min violated");
    const Grid& g = t1.u.grid();
    const int m = g.nodes_per_axis();
    for (int i = 0; i < m; ++i) {
        if (g.d == 1) {
            if (t1.u(0) != 0.0 || t1.u(m - 1) != 0.0)
                throw ValidationError("darcy_stability_gap: hypothesis u1 = 0 on boundary violated");
        } else {
            for (int j = 0; j < m; ++j)
                if (g.is_boundary(i, j) && t1.u(i, j) != 0.0)
                    throw ValidationError(
                        "darcy_stability_gap: hypothesis u1 = 0 on boundary violated");
        }
    }
    check_relation(t1, true, "darcy_stability_gap: triplet 1");
    check_relation(t2, true, "darcy_stability_gap: triplet 2");

    StabilityReport rep;
    rep.lhs = discrete_norm(diff_field(t1.f, t2.f), NormKind::L2);
    rep.term_u = discrete_norm(t2.f, NormKind::C1) *
                 discrete_norm(diff_field(t1.u, t2.u), NormKind::H2);
    rep.term_g = interior_l2(diff_field(t1.g, t2.g));
    rep.ratio = make_ratio(rep.lhs, rep.term_u + rep.term_g);
    return rep;
}

StabilityReport schrodinger_stability_gap(const Triplet& t1, const Triplet& t2,
                                          double c_min) {
    if (!(c_min > 0)) throw ValidationError("schrodinger_stability_gap: c_min must be > 0");
    if (t1.u.values().minCoeff() < c_min || t2.u.values().minCoeff() < c_min)
        throw ValidationError(
            "schrodinger_stability_gap: hypothesis min u >= c_min violated");
    check_relation(t1, false, "schrodinger_stability_gap: triplet 1");
    check_relation(t2, false, "schrodinger_stability_gap: triplet 2");

    StabilityReport rep;
    rep.lhs = discrete_norm(diff_field(t1.f, t2.f), NormKind::L2);
    rep.term_u = discrete_norm(diff_field(t1.u, t2.u), NormKind::H2);
    rep.term_g = interior_l2(diff_field(t1.g, t2.g));
    rep.ratio = make_ratio(rep.lhs, rep.term_u + rep.term_g);
    return rep;
}

double discrepancy_tau(const GridField& u_candidate, double penalty_value,
                       const Dataset& data) {
    if (penalty_value < 0)
        throw ValidationError("discrepancy_tau: penalty must be >= 0");
    if (data.u0_at_x.size() != data.Y.size())
        throw ValidationError("discrepancy_tau: dataset carries no ground-truth responses");
    double s = 0.0;
    for (std::int64_t i = 0; i < data.N(); ++i) {
        double r = u_candidate.interpolate(data.X[i]) - data.u0_at_x[i];
        s += r * r;
    }
    return s / static_cast<double>(data.N()) + penalty_value;
}

} // namespace invlab
