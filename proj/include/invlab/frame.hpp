#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "invlab/grid.hpp"

namespace invlab {

/// Identifies one frame element: resolution level l >= 0 and position k
/// (0-based flat index within the level; tensorized for d=2).
struct MultiIndex {
    int level = 0;
    int k = 0;
};

/// Multiscale coefficients for frame levels 0..J (a prefix of a Frame's
/// index range; p_at_level(J) entries).
struct CoefficientVector {
    int J = 0;
    Eigen::VectorXd entries;
};

/// One resolution level of the clamped uniform B-spline system on [0,1]:
/// segments = 2*2^l knot intervals, order m (degree m-1), count = segments+m-1
/// basis functions, each C^(m-2) with support of at most m knot spans.
struct SplineLevel {
    int segments = 2;
    int order = 4;

    int count() const { return segments + order - 1; }
    double knot(int i) const;
    /// Values of the m basis functions that are nonzero at x; returns the
    /// index of the first one.
    int eval_nonzero(double x, double* out) const;
    /// Single basis function value at x (zero off support).
    double eval(int idx, double x) const;
    /// Exact L2([0,1]) norm of basis function idx (Gauss-Legendre per span).
    double l2_norm(int idx) const;
};

/// Hierarchical multiscale B-spline frame over a Grid: levels l = 0..J of
/// L2-normalized clamped splines (tensor products of same-level factors for
/// d=2), with the Gram matrix in the grid quadrature inner product and
/// per-level factorizations backing the selection operator.
///
/// The selection operator is the multilevel residual cascade: level l picks
/// the grid-L2 projection of what levels < l did not capture, so
/// synthesize(select(f)) is the projection of f onto the span and level-l
/// coefficients of smooth functions decay at the function's smoothness rate.
/// Each per-level projection is a regularized least-squares solve against
/// that level's Gram block.
class Frame {
public:
    static Frame build(const Grid& grid, int J, int spline_order);
    /// Rebuild using a precomputed Gram matrix (frame cache path).
    static Frame build_with_gram(const Grid& grid, int J, int spline_order,
                                 const Eigen::MatrixXd& gram);

    const Grid& grid() const { return grid_; }
    int max_level() const { return J_; }
    int order() const { return m_; }
    int p() const { return static_cast<int>(samples_.cols()); }
    int level_count(int level) const { return level_counts_.at(level); }
    int level_offset(int level) const { return level_offsets_.at(level); }
    /// Total count of elements on levels 0..J (prefix length).
    int p_at_level(int J) const;
    MultiIndex index_of(int col) const;
    int col_of(const MultiIndex& mi) const;

    /// Stored samples of element `col` as a field on the build grid.
    GridField basis_field(int col) const;
    const Eigen::MatrixXd& samples() const { return samples_; }
    const Eigen::MatrixXd& gram() const { return gram_; }
    /// Eigenvalues of the Gram matrix, ascending.
    const Eigen::VectorXd& gram_eigenvalues() const { return gram_evals_; }
    int gram_rank(double rank_tol = 1e-10) const;

    /// Selection operator S^(J): multiscale coefficients of f, levels 0..J.
    CoefficientVector select(const GridField& f, int max_level = -1) const;
    /// Linear combination sum v_lk phi_lk sampled on the build grid.
    GridField synthesize(const CoefficientVector& v) const;

    /// Analytic (Cox-de Boor) evaluation of element `col` at a point; used
    /// for sampling on other grids. design_row interpolates stored samples.
    double evaluate(int col, const std::array<double, 2>& x) const;
    /// Sample the combination on an arbitrary grid by analytic evaluation.
    GridField sample_on(const Grid& fine, const CoefficientVector& v) const;

    /// Sparse design-matrix row at x: (column, value) pairs over levels
    /// <= max_level, values by multilinear interpolation of stored samples.
    void design_row(const std::array<double, 2>& x, int max_level,
                    std::vector<std::pair<int, double>>& out) const;

    const std::vector<SplineLevel>& axis_levels() const { return axis_levels_; }
    double normalization(int col) const { return inv_norm_[col]; }

private:
    Grid grid_;
    int J_ = 0;
    int m_ = 4;
    std::vector<SplineLevel> axis_levels_;
    std::vector<int> level_counts_;
    std::vector<int> level_offsets_;
    std::vector<double> inv_norm_;           // 1 / exact L2 norm per element
    std::vector<Eigen::MatrixXd> axis_tables_; // per level: 1d values, unnormalized
    Eigen::MatrixXd samples_;                // node_count x p, normalized
    Eigen::VectorXd weights_;                // quadrature weight per node
    Eigen::MatrixXd gram_;
    Eigen::VectorXd gram_evals_;
    std::vector<Eigen::LLT<Eigen::MatrixXd>> level_llt_;

    static Frame assemble(const Grid& grid, int J, int m,
                          const Eigen::MatrixXd* cached_gram);
};

/// Diagonal of the level-weight matrix Lambda^s for levels 0..J of a frame:
/// the entry of element (l,k) is 2^(2*l*s).
Eigen::VectorXd level_weight_diagonal(const Frame& frame, int J, double s);

/// Level-weighted coefficient norm: sqrt(sum 2^(2*l*s) v_lk^2).
double h_norm(const Frame& frame, const CoefficientVector& v, double s);

/// Smallest J >= 0 with 2^(J*d) >= c_dim * N^(d/(2(alpha+1)+d)).
/// Warns (stderr) when alpha <= d/2 + 1.
int resolution_level(std::int64_t N, int alpha, int d, double c_dim);

/// Dense design matrix Phi (N x p_at_level(J)) over the given points.
Eigen::MatrixXd design_matrix(const Frame& frame,
                              const std::vector<std::array<double, 2>>& points,
                              int max_level = -1);

/// Binary frame cache: header {version, d, n, J, m} plus the Gram matrix;
/// any header mismatch invalidates the file.
void save_frame_cache(const Frame& frame, std::ostream& os);
bool load_frame_cache(std::istream& is, const Grid& grid, int J, int m, Frame& out);

} // namespace invlab
