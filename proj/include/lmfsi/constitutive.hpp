/// @file constitutive.hpp
/// @brief Isentropic pressure law, viscous stress, relative energy and the
///        essential/residual split of a density field.
#pragma once

#include <array>
#include <utility>

#include "lmfsi/grid.hpp"

namespace lmfsi {

/// Physical and scaling constants. Mach number is eps^m.
struct FluidParams {
    double a = 1.0;        ///< pressure constant, p = a rho^gamma
    double gamma = 2.0;    ///< adiabatic exponent (> 1)
    double mu = 0.01;      ///< shear viscosity
    double lambda = 0.0;   ///< bulk coefficient
    double rho_bar = 1.0;  ///< reference density
    double eps = 0.1;      ///< body radius, also the Mach-number base
    double m = 1.0;        ///< Mach exponent

    /// Throws ConfigError naming the first violated constraint.
    void validate() const;

    /// min{m, 2m/gamma} > 3: the regime in which the convergence theorem is proven.
    bool theorem_regime() const;

    /// eps^(-2m), the weight of the pressure terms.
    double pressure_scale() const;

    bool operator==(const FluidParams&) const = default;
};

using Tensor2 = std::array<std::array<double, 2>, 2>;

double pressure(double rho, const FluidParams& p);
double pressure_potential(double rho, const FluidParams& p);
/// P'(rho) = a gamma/(gamma-1) rho^(gamma-1)
double pressure_potential_derivative(double rho, const FluidParams& p);
/// Bregman distance P(rho) - P'(rho_bar)(rho - rho_bar) - P(rho_bar) >= 0.
double relative_energy(double rho, const FluidParams& p);

/// Unscaled sound speed sqrt(p'(rho)); divide by eps^m for the scaled value.
double sound_speed(double rho, const FluidParams& p);

/// mu (grad u + grad u^T - div u I) + lambda div u I, with grad_u[i][j] = d u_i / d x_j.
Tensor2 stress(const Tensor2& grad_u, const FluidParams& p);

/// S(grad u) : grad u, evaluated as a contraction.
double dissipation_density(const Tensor2& grad_u, const FluidParams& p);

/// The same quantity via (mu/2)|grad u + grad u^T - div u I|^2 + lambda (div u)^2.
double dissipation_density_quadratic(const Tensor2& grad_u, const FluidParams& p);

/// ess = f on the closed window [rho_bar/2, 2 rho_bar], 0 elsewhere; res = f - ess.
std::pair<ScalarField, ScalarField> essential_residual_split(const ScalarField& f, double rho_bar);

/// In-place clamp of negative densities to zero.
struct ClampReport {
    double most_negative = 0.0;  ///< minimum value seen before clamping (0 if none)
    std::size_t cells = 0;       ///< number of clamped cells
};
ClampReport clamp_negative(ScalarField& rho);

} // namespace lmfsi
