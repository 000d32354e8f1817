#pragma once

#include "invlab/grid.hpp"

namespace invlab {

/// Discrete divergence-form operator div(f grad u) at interior nodes, with
/// the conductivity taken at half-nodes by arithmetic averaging. Boundary
/// nodes of the result are set to 0 and are never used downstream.
/// Bilinear in (f, u); f may take any sign here.
GridField darcy_apply(const GridField& f, const GridField& u);

/// Discrete (1/2) Laplacian(u) - f*u at interior nodes, boundary zeroed.
/// The Laplacian uses the same centered stencil as fd_derivative(order 2).
GridField schrodinger_apply(const GridField& f, const GridField& u);

} // namespace invlab
