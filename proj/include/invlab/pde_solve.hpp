#pragma once

#include "invlab/grid.hpp"
#include "invlab/pde_apply.hpp"

namespace invlab {

/// div(f grad u) = g in O, u = 0 on the boundary. Requires min f > 0.
struct DarcyProblem {
    GridField f;
    GridField g;
};

/// (1/2) Laplacian(u) - f u = 0 in O, u = g on the boundary.
/// Requires f >= 0 and g > 0 on the boundary nodes; only the boundary
/// nodes of g_boundary are read.
struct SchrodingerProblem {
    GridField f;
    GridField g_boundary;
};

/// Direct solve (d=1 tridiagonal elimination, d=2 sparse Cholesky).
/// Postconditions: zero boundary values, relative linear-solve residual
/// <= 1e-10, darcy_apply(f, u) = g at interior nodes up to that residual.
GridField darcy_solve(const DarcyProblem& problem);

/// Direct solve as above; postcondition min u > 0 (discrete maximum
/// principle for the M-matrix -Lap + 2f with positive boundary data).
GridField schrodinger_solve(const SchrodingerProblem& problem);

} // namespace invlab
