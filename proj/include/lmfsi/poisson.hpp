/// @file poisson.hpp
/// @brief Neumann Poisson problem for the MAC projection.
#pragma once

#include "lmfsi/grid.hpp"

namespace lmfsi {

struct PoissonResult {
    ScalarField solution;      ///< mean-zero solution
    double relative_residual;  ///< ||rhs - L q|| / ||rhs|| after the last sweep
    int iterations;
};

/// Applies the homogeneous-Neumann 5-point Laplacian (wall-face gradients are zero).
ScalarField neumann_laplacian(const ScalarField& q);

/// Solves neumann_laplacian(q) = rhs - mean(rhs) to the given relative residual.
/// Each sweep is an exact cosine-transform solve of the current defect, so one or
/// two sweeps usually suffice. Throws SolverError if max_iterations is exhausted.
PoissonResult solve_neumann_poisson(const ScalarField& rhs, double tolerance = 1e-10, int max_iterations = 8);

} // namespace lmfsi
