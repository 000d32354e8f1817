#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>

#include "invlab/common.hpp"

namespace invlab {

/// Uniform tensor grid on the closed unit cube [0,1]^d, d in {1,2}.
/// n interior points per axis, spacing h = 1/(n+1); nodes include the
/// boundary at 0 and 1, so there are (n+2) nodes per axis.
///
/// Node order is row-major with axis 0 slowest: for d=2 the flat index of
/// node (i,j) is i*(n+2)+j, coordinates x = i*h, y = j*h.
struct Grid {
    int d = 1;
    int n = 3;
    double h = 0.25;

    static Grid make(int d, int n);

    int nodes_per_axis() const { return n + 2; }
    std::size_t node_count() const {
        std::size_t m = static_cast<std::size_t>(n + 2);
        return d == 1 ? m : m * m;
    }
    double coord(int i) const { return h * i; }
    std::size_t flat(int i, int j = 0) const {
        return d == 1 ? static_cast<std::size_t>(i)
                      : static_cast<std::size_t>(i) * (n + 2) + j;
    }
    bool is_boundary(int i, int j = 0) const {
        return i == 0 || i == n + 1 || (d == 2 && (j == 0 || j == n + 1));
    }
    bool operator==(const Grid& o) const { return d == o.d && n == o.n; }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

/// Real-valued function sampled on all nodes of a Grid. Values are checked
/// finite on construction; operations returning GridField preserve this.
class GridField {
public:
    GridField() = default;
    GridField(Grid grid, Eigen::VectorXd values);
    static GridField zero(const Grid& grid);
    static GridField constant(const Grid& grid, double c);
    /// Sample fn(x) (d=1) or fn(x,y) (d=2) at all nodes.
    static GridField sample(const Grid& grid, const std::function<double(double)>& fn);
    static GridField sample(const Grid& grid, const std::function<double(double, double)>& fn);

    const Grid& grid() const { return grid_; }
    const Eigen::VectorXd& values() const { return values_; }
    Eigen::VectorXd& values() { return values_; }
    double operator()(int i, int j = 0) const { return values_[grid_.flat(i, j)]; }
    double& at(int i, int j = 0) { return values_[grid_.flat(i, j)]; }
    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

    /// Multilinear interpolation at a point of [0,1]^d.
    double interpolate(const std::array<double, 2>& x) const;

    void check_finite(const char* where) const;

private:
    Grid grid_;
    Eigen::VectorXd values_;
};

/// Composite trapezoidal approximation of the L2(O) inner product.
/// Exact for the piecewise multilinear interpolant of the samples.
double quadrature_inner(const GridField& a, const GridField& b);

enum class NormKind { L2, H1, H2, Linf, C1 };

/// Discrete surrogates of the continuum norms:
///   L2   sqrt(quadrature_inner(u,u))
///   H1   sqrt(L2^2 + sum_a ||d_a u||_L2^2)
///   H2   H1 plus all second derivatives (the d=2 mixed one counted once)
///   Linf max |values|
///   C1   max of Linf(u) and Linf of every first derivative
/// Derivatives use centered stencils inside, second-order one-sided at the
/// boundary. H2 and C1 require n >= 5.
double discrete_norm(const GridField& u, NormKind kind);

/// Finite-difference derivative of order 1 or 2 along an axis; exact on
/// polynomials of degree <= 2 including at the boundary nodes.
GridField fd_derivative(const GridField& u, int axis, int order);

/// Trapezoidal quadrature weight of node (i,j).
double quad_weight(const Grid& g, int i, int j = 0);

} // namespace invlab
