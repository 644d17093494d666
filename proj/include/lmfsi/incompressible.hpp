/// @file incompressible.hpp
/// @brief Incompressible Navier-Stokes with no-slip walls by non-incremental
///        Chorin projection: the limit system the compressible runs approach.
#pragma once

#include <vector>

#include "lmfsi/compressible.hpp"
#include "lmfsi/grid.hpp"

namespace lmfsi {

struct IncState {
    VectorField u;
    ScalarField pressure;  ///< Pi, defined up to a constant
    double t = 0.0;
};

struct ProjectionResult {
    VectorField u;
    ScalarField increment;  ///< q with u = v - grad q
    double relative_residual = 0.0;
};

/// Discrete Helmholtz projection. Wall-normal faces keep the values of v.
ProjectionResult project(const VectorField& v, double tolerance = 1e-10);

/// (u . grad) u on the faces with second-order upwind differences and no-slip ghosts.
VectorField advection(const VectorField& u);

/// Largest stable explicit step: min(1/(2(|u|+|v|)/h + 4 nu/h^2), 2 nu/(|u|^2 + |v|^2)), nu = mu/rho_bar.
double inc_stable_dt(const VectorField& u, double rho_bar, double mu);

/// Explicit Euler predictor (advection, diffusion, optional forcing per unit volume),
/// then projection. Throws SolverError if dt exceeds inc_stable_dt.
IncState step_inc(const IncState& state, double dt, double rho_bar, double mu,
                  const VectorField* forcing = nullptr, double tolerance = 1e-10);

struct IncSnapshot {
    double t = 0.0;
    VectorField u;
    ScalarField pressure;
    double kinetic = 0.0;  ///< 1/2 rho_bar sum |u|^2 h^2
    double max_divergence = 0.0;
};

struct IncTrajectory {
    std::vector<IncSnapshot> snapshots;
    long steps = 0;
    double dt_max = 0.0;
};

/// Starts from u0 = perp_gradient(V sin^2 sin^2) on the same grid and emits
/// snapshots at the same uniform times as run(config).
IncTrajectory run_reference(const SolverConfig& config);

// ----------------------------------------------------------------------------
// Manufactured solution u*(t) = g(t) perp_grad(sin^2(pi x/L) sin^2(pi y/L)),
// Pi*(t) = g(t) cos(pi x/L) cos(pi y/L), g(t) = 1 + sin(2 pi t)/2.
// ----------------------------------------------------------------------------

VectorField manufactured_velocity(const GridSpec& grid, double t);
VectorField manufactured_forcing(const GridSpec& grid, double t, double rho_bar, double mu);

} // namespace lmfsi
