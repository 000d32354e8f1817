#include "invlab/frame.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <iostream>
#include <istream>
#include <ostream>

namespace invlab {

namespace {

constexpr int kBaseSegments = 2; // level-0 knot intervals per axis
constexpr int kMaxOrder = 8;

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double p1 = 0.0, dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double a = 1.0;
            p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * t * p1 - (k - 1) * a) / k;
                a = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - a) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

} // namespace

double SplineLevel::knot(int i) const {
    const int p = order - 1;
    double t = static_cast<double>(i - p) / segments;
    return std::min(1.0, std::max(0.0, t));
}

int SplineLevel::eval_nonzero(double x, double* out) const {
    const int p = order - 1;
    int cell = static_cast<int>(std::floor(x * segments));
    cell = std::min(segments - 1, std::max(0, cell));
    const int span = p + cell;
    std::array<double, kMaxOrder + 1> left{}, right{}, vals{};
    vals[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - knot(span + 1 - j);
        right[j] = knot(span + j) - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            double temp = vals[r] / (right[r + 1] + left[j - r]);
            vals[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        vals[j] = saved;
    }
    for (int i = 0; i <= p; ++i) out[i] = vals[i];
    return cell;
}

double SplineLevel::eval(int idx, double x) const {
    if (x < 0.0 || x > 1.0) return 0.0;
    std::array<double, kMaxOrder> vals{};
    int first = eval_nonzero(x, vals.data());
    int off = idx - first;
    if (off < 0 || off >= order) return 0.0;
    return vals[off];
}

double SplineLevel::l2_norm(int idx) const {
    std::vector<double> gx, gw;
    gauss_legendre(order, gx, gw);
    const int p = order - 1;
    double s = 0.0;
    for (int cell = std::max(0, idx - p); cell <= std::min(segments - 1, idx); ++cell) {
        double a = static_cast<double>(cell) / segments;
        double b = static_cast<double>(cell + 1) / segments;
        for (std::size_t q = 0; q < gx.size(); ++q) {
            double xx = 0.5 * (a + b) + 0.5 * (b - a) * gx[q];
            double v = eval(idx, xx);
            s += 0.5 * (b - a) * gw[q] * v * v;
        }
    }
    return std::sqrt(s);
}

Frame Frame::build(const Grid& grid, int J, int spline_order) {
    return assemble(grid, J, spline_order, nullptr);
}

Frame Frame::build_with_gram(const Grid& grid, int J, int spline_order,
                             const Eigen::MatrixXd& gram) {
    return assemble(grid, J, spline_order, &gram);
}

Frame Frame::assemble(const Grid& grid, int J, int m, const Eigen::MatrixXd* cached_gram) {
    if (m < 4 || m > kMaxOrder)
        throw ValidationError("Frame: spline order must be in [4, 8]");
    if (J < 0) throw ValidationError("Frame: J must be >= 0");
    if (grid.n + 1 < (1 << (J + 3)))
        throw ValidationError("Frame: grid too coarse for level " + std::to_string(J) +
                              " (need n+1 >= 2^(J+3))");

    Frame fr;
    fr.grid_ = grid;
    fr.J_ = J;
    fr.m_ = m;
    for (int l = 0; l <= J; ++l)
        fr.axis_levels_.push_back(SplineLevel{kBaseSegments * (1 << l), m});

    const int mpa = grid.nodes_per_axis();
    std::vector<Eigen::VectorXd> axis_norms;
    for (const SplineLevel& lev : fr.axis_levels_) {
        Eigen::MatrixXd tab = Eigen::MatrixXd::Zero(mpa, lev.count());
        std::array<double, kMaxOrder> vals{};
        for (int i = 0; i < mpa; ++i) {
            int first = lev.eval_nonzero(grid.coord(i), vals.data());
            for (int r = 0; r < lev.order; ++r) tab(i, first + r) = vals[r];
        }
        fr.axis_tables_.push_back(std::move(tab));
        Eigen::VectorXd nrm(lev.count());
        for (int k = 0; k < lev.count(); ++k) nrm[k] = lev.l2_norm(k);
        axis_norms.push_back(std::move(nrm));
    }

    int p = 0;
    for (int l = 0; l <= J; ++l) {
        int c1 = fr.axis_levels_[l].count();
        int cl = grid.d == 1 ? c1 : c1 * c1;
        fr.level_offsets_.push_back(p);
        fr.level_counts_.push_back(cl);
        p += cl;
    }

    fr.samples_.resize(grid.node_count(), p);
    fr.inv_norm_.resize(p);
    for (int l = 0; l <= J; ++l) {
        const Eigen::MatrixXd& tab = fr.axis_tables_[l];
        const Eigen::VectorXd& nrm = axis_norms[l];
        const int c1 = fr.axis_levels_[l].count();
        const int off = fr.level_offsets_[l];
        if (grid.d == 1) {
            for (int k = 0; k < c1; ++k) {
                fr.inv_norm_[off + k] = 1.0 / nrm[k];
                fr.samples_.col(off + k) = tab.col(k) / nrm[k];
            }
        } else {
            for (int kx = 0; kx < c1; ++kx) {
                for (int ky = 0; ky < c1; ++ky) {
                    int col = off + kx * c1 + ky;
                    double in = 1.0 / (nrm[kx] * nrm[ky]);
                    fr.inv_norm_[col] = in;
                    for (int i = 0; i < mpa; ++i)
                        for (int j = 0; j < mpa; ++j)
                            fr.samples_(grid.flat(i, j), col) = tab(i, kx) * tab(j, ky) * in;
                }
            }
        }
    }

    fr.weights_.resize(grid.node_count());
    if (grid.d == 1) {
        for (int i = 0; i < mpa; ++i) fr.weights_[grid.flat(i)] = quad_weight(grid, i);
    } else {
        for (int i = 0; i < mpa; ++i)
            for (int j = 0; j < mpa; ++j) fr.weights_[grid.flat(i, j)] = quad_weight(grid, i, j);
    }

    if (cached_gram) {
        if (cached_gram->rows() != p || cached_gram->cols() != p)
            throw ValidationError("Frame: cached Gram has wrong dimensions");
        fr.gram_ = *cached_gram;
    } else {
        Eigen::MatrixXd sw = fr.weights_.cwiseSqrt().asDiagonal() * fr.samples_;
        fr.gram_ = sw.transpose() * sw;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fr.gram_, Eigen::EigenvaluesOnly);
    fr.gram_evals_ = es.eigenvalues();

    for (int l = 0; l <= J; ++l) {
        int off = fr.level_offsets_[l], cl = fr.level_counts_[l];
        Eigen::MatrixXd gl = fr.gram_.block(off, off, cl, cl);
        gl.diagonal().array() += 1e-14 * gl.trace() / cl;
        fr.level_llt_.emplace_back(gl);
        if (fr.level_llt_.back().info() != Eigen::Success)
            throw NumericalError("Frame: level Gram factorization failed");
    }
    return fr;
}

int Frame::p_at_level(int J) const {
    if (J < 0 || J > J_) throw ValidationError("Frame: level out of range");
    return level_offsets_[J] + level_counts_[J];
}

MultiIndex Frame::index_of(int col) const {
    if (col < 0 || col >= p()) throw ValidationError("Frame: column out of range");
    int l = 0;
    while (l + 1 <= J_ && level_offsets_[l + 1] <= col) ++l;
    return MultiIndex{l, col - level_offsets_[l]};
}

int Frame::col_of(const MultiIndex& mi) const {
    if (mi.level < 0 || mi.level > J_ || mi.k < 0 || mi.k >= level_counts_[mi.level])
        throw ValidationError("Frame: multi-index out of range");
    return level_offsets_[mi.level] + mi.k;
}

GridField Frame::basis_field(int col) const {
    if (col < 0 || col >= p()) throw ValidationError("Frame: column out of range");
    return GridField(grid_, samples_.col(col));
}

int Frame::gram_rank(double rank_tol) const {
    double mx = gram_evals_.maxCoeff();
    int r = 0;
    for (int i = 0; i < gram_evals_.size(); ++i)
        if (gram_evals_[i] > rank_tol * mx) ++r;
    return r;
}

CoefficientVector Frame::select(const GridField& f, int max_level) const {
    if (f.grid() != grid_) throw ValidationError("Frame::select: grid mismatch");
    int J = max_level < 0 ? J_ : max_level;
    if (J < 0 || J > J_) throw ValidationError("Frame::select: level out of range");
    CoefficientVector v;
    v.J = J;
    v.entries.resize(p_at_level(J));
    Eigen::VectorXd r = f.values();
    for (int l = 0; l <= J; ++l) {
        int off = level_offsets_[l], cl = level_counts_[l];
        auto Sl = samples_.middleCols(off, cl);
        Eigen::VectorXd b = Sl.transpose() * weights_.cwiseProduct(r);
        Eigen::VectorXd vl = level_llt_[l].solve(b);
        v.entries.segment(off, cl) = vl;
        r -= Sl * vl;
    }
    return v;
}

GridField Frame::synthesize(const CoefficientVector& v) const {
    if (v.J < 0 || v.J > J_) throw ValidationError("Frame::synthesize: level out of range");
    if (v.entries.size() != p_at_level(v.J))
        throw ValidationError("Frame::synthesize: coefficient count mismatch");
    return GridField(grid_, samples_.leftCols(v.entries.size()) * v.entries);
}

double Frame::evaluate(int col, const std::array<double, 2>& x) const {
    MultiIndex mi = index_of(col);
    const SplineLevel& lev = axis_levels_[mi.level];
    if (grid_.d == 1) return lev.eval(mi.k, x[0]) * inv_norm_[col];
    int c1 = lev.count();
    return lev.eval(mi.k / c1, x[0]) * lev.eval(mi.k % c1, x[1]) * inv_norm_[col];
}

GridField Frame::sample_on(const Grid& fine, const CoefficientVector& v) const {
    if (fine.d != grid_.d) throw ValidationError("Frame::sample_on: dimension mismatch");
    if (v.J < 0 || v.J > J_) throw ValidationError("Frame::sample_on: level out of range");
    if (v.entries.size() != p_at_level(v.J))
        throw ValidationError("Frame::sample_on: coefficient count mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(fine.node_count());
    const int mpa = fine.nodes_per_axis();
    std::array<double, kMaxOrder> vals{};
    for (int l = 0; l <= v.J; ++l) {
        const SplineLevel& lev = axis_levels_[l];
        const int c1 = lev.count();
        const int off = level_offsets_[l];
        Eigen::MatrixXd tab = Eigen::MatrixXd::Zero(mpa, c1);
        std::vector<int> first(mpa);
        for (int i = 0; i < mpa; ++i) {
            first[i] = lev.eval_nonzero(fine.coord(i), vals.data());
            for (int r = 0; r < lev.order; ++r) tab(i, first[i] + r) = vals[r];
        }
        if (grid_.d == 1) {
            for (int i = 0; i < mpa; ++i)
                for (int r = 0; r < lev.order; ++r) {
                    int k = first[i] + r;
                    out[fine.flat(i)] += v.entries[off + k] * inv_norm_[off + k] * tab(i, k);
                }
        } else {
            for (int i = 0; i < mpa; ++i) {
                for (int j = 0; j < mpa; ++j) {
                    double s = 0.0;
                    for (int rx = 0; rx < lev.order; ++rx) {
                        int kx = first[i] + rx;
                        if (tab(i, kx) == 0.0) continue;
                        for (int ry = 0; ry < lev.order; ++ry) {
                            int ky = first[j] + ry;
                            if (tab(j, ky) == 0.0) continue;
                            int col = off + kx * c1 + ky;
                            s += v.entries[col] * inv_norm_[col] * tab(i, kx) * tab(j, ky);
                        }
                    }
                    out[fine.flat(i, j)] += s;
                }
            }
        }
    }
    return GridField(fine, std::move(out));
}

void Frame::design_row(const std::array<double, 2>& x, int max_level,
                       std::vector<std::pair<int, double>>& out) const {
    int J = max_level < 0 ? J_ : max_level;
    if (J < 0 || J > J_) throw ValidationError("Frame::design_row: level out of range");
    for (int a = 0; a < grid_.d; ++a)
        if (!(x[a] > 0.0 && x[a] < 1.0))
            throw ValidationError("Frame::design_row: point outside (0,1)^d");
    out.clear();
    const Grid& g = grid_;
    auto cell_of = [&](double t) {
        int i = static_cast<int>(std::floor(t / g.h));
        return std::min(g.n, std::max(0, i));
    };
    const int ci = cell_of(x[0]);
    const double wx = (x[0] - g.coord(ci)) / g.h;
    int cj = 0;
    double wy = 0.0;
    if (g.d == 2) {
        cj = cell_of(x[1]);
        wy = (x[1] - g.coord(cj)) / g.h;
    }
    for (int l = 0; l <= J; ++l) {
        const SplineLevel& lev = axis_levels_[l];
        const Eigen::MatrixXd& tab = axis_tables_[l];
        const int c1 = lev.count();
        const int pd = lev.order - 1;
        const int off = level_offsets_[l];
        auto knot_cell = [&](double t) {
            int c = static_cast<int>(std::floor(t * lev.segments));
            return std::min(lev.segments - 1, std::max(0, c));
        };
        int bx0 = std::max(0, knot_cell(x[0]) - 1);
        int bx1 = std::min(c1 - 1, knot_cell(x[0]) + pd + 1);
        if (g.d == 1) {
            for (int b = bx0; b <= bx1; ++b) {
                double val = ((1 - wx) * tab(ci, b) + wx * tab(ci + 1, b)) * inv_norm_[off + b];
                if (val != 0.0) out.emplace_back(off + b, val);
            }
        } else {
            int by0 = std::max(0, knot_cell(x[1]) - 1);
            int by1 = std::min(c1 - 1, knot_cell(x[1]) + pd + 1);
            for (int bx = bx0; bx <= bx1; ++bx) {
                double vx = (1 - wx) * tab(ci, bx) + wx * tab(ci + 1, bx);
                if (vx == 0.0) continue;
                for (int by = by0; by <= by1; ++by) {
                    double vy = (1 - wy) * tab(cj, by) + wy * tab(cj + 1, by);
                    if (vy == 0.0) continue;
                    int col = off + bx * c1 + by;
                    out.emplace_back(col, vx * vy * inv_norm_[col]);
                }
            }
        }
    }
}

Eigen::VectorXd level_weight_diagonal(const Frame& frame, int J, double s) {
    if (s < 0) throw ValidationError("level_weight_diagonal: s must be >= 0");
    if (J < 0 || J > frame.max_level())
        throw ValidationError("level_weight_diagonal: level out of range");
    Eigen::VectorXd w(frame.p_at_level(J));
    for (int l = 0; l <= J; ++l) {
        double wl = std::exp2(2.0 * l * s);
        w.segment(frame.level_offset(l), frame.level_count(l)).setConstant(wl);
    }
    return w;
}

double h_norm(const Frame& frame, const CoefficientVector& v, double s) {
    Eigen::VectorXd w = level_weight_diagonal(frame, v.J, s);
    return std::sqrt(v.entries.cwiseProduct(w).dot(v.entries));
}

int resolution_level(std::int64_t N, int alpha, int d, double c_dim) {
    if (N < 2) throw ValidationError("resolution_level: N must be >= 2");
    if (c_dim <= 0) throw ValidationError("resolution_level: c_dim must be > 0");
    if (2.0 * alpha <= d + 2.0)
        std::cerr << "[invlab] warning: alpha <= d/2 + 1 is outside the theory regime\n";
    double expo = static_cast<double>(d) / (2.0 * (alpha + 1) + d);
    double target = c_dim * std::pow(static_cast<double>(N), expo);
    int J = 0;
    while (std::exp2(static_cast<double>(J) * d) * (1.0 + 1e-9) < target) ++J;
    return J;
}

Eigen::MatrixXd design_matrix(const Frame& frame,
                              const std::vector<std::array<double, 2>>& points,
                              int max_level) {
    int J = max_level < 0 ? frame.max_level() : max_level;
    Eigen::MatrixXd Phi = Eigen::MatrixXd::Zero(points.size(), frame.p_at_level(J));
    std::vector<std::pair<int, double>> row;
    for (std::size_t i = 0; i < points.size(); ++i) {
        frame.design_row(points[i], J, row);
        for (auto& [c, v] : row) Phi(static_cast<Eigen::Index>(i), c) = v;
    }
    return Phi;
}

void save_frame_cache(const Frame& frame, std::ostream& os) {
    const char magic[4] = {'I', 'V', 'L', 'F'};
    os.write(magic, 4);
    std::int32_t hdr[5] = {kFormatVersion, frame.grid().d, frame.grid().n,
                           frame.max_level(), frame.order()};
    os.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
    std::int64_t p = frame.p();
    os.write(reinterpret_cast<const char*>(&p), sizeof p);
    os.write(reinterpret_cast<const char*>(frame.gram().data()),
             static_cast<std::streamsize>(sizeof(double) * p * p));
}

bool load_frame_cache(std::istream& is, const Grid& grid, int J, int m, Frame& out) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "IVLF", 4) != 0) return false;
    std::int32_t hdr[5];
    if (!is.read(reinterpret_cast<char*>(hdr), sizeof hdr)) return false;
    if (hdr[0] != kFormatVersion || hdr[1] != grid.d || hdr[2] != grid.n || hdr[3] != J ||
        hdr[4] != m)
        return false;
    std::int64_t p = 0;
    if (!is.read(reinterpret_cast<char*>(&p), sizeof p) || p <= 0) return false;
    Eigen::MatrixXd gram(p, p);
    if (!is.read(reinterpret_cast<char*>(gram.data()),
                 static_cast<std::streamsize>(sizeof(double) * p * p)))
        return false;
    out = Frame::build_with_gram(grid, J, m, gram);
    return true;
}

} // namespace invlab
