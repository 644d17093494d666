/// @file constitutive.cpp
#include "lmfsi/constitutive.hpp"

#include <cmath>
#include <string>

#include "lmfsi/errors.hpp"

namespace lmfsi {

void FluidParams::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("fluid parameters: " + what); };
    if (!(a > 0.0)) fail("a must be > 0");
    if (!(gamma > 1.0)) fail("gamma must be > 1");
    if (!(mu > 0.0)) fail("mu must be > 0");
    if (!(lambda >= 0.0)) fail("lambda must be >= 0");
    if (!(rho_bar > 0.0)) fail("rho_bar must be > 0");
    if (!(eps > 0.0 && eps < 1.0)) fail("eps must lie in (0, 1)");
    if (!(m > 0.0)) fail("m must be > 0");
}

bool FluidParams::theorem_regime() const { return std::min(m, 2.0 * m / gamma) > 3.0; }

double FluidParams::pressure_scale() const { return std::pow(eps, -2.0 * m); }

namespace {

void require_nonnegative(double rho) {
    if (!(rho >= 0.0)) throw InvalidStateError("negative or NaN density: " + std::to_string(rho));
}

double power(double rho, double gamma) { return gamma == 2.0 ? rho * rho : std::pow(rho, gamma); }

} // namespace

double pressure(double rho, const FluidParams& p) {
    require_nonnegative(rho);
    return p.a * power(rho, p.gamma);
}

double pressure_potential(double rho, const FluidParams& p) {
    require_nonnegative(rho);
    return p.a / (p.gamma - 1.0) * power(rho, p.gamma);
}

double pressure_potential_derivative(double rho, const FluidParams& p) {
    require_nonnegative(rho);
    return p.a * p.gamma / (p.gamma - 1.0) * std::pow(rho, p.gamma - 1.0);
}

double relative_energy(double rho, const FluidParams& p) {
    require_nonnegative(rho);
    const double e = pressure_potential(rho, p) - pressure_potential_derivative(p.rho_bar, p) * (rho - p.rho_bar) -
                     pressure_potential(p.rho_bar, p);
    // cancellation can leave a tiny negative residue near rho_bar
    return e > 0.0 ? e : 0.0;
}

double sound_speed(double rho, const FluidParams& p) {
    require_nonnegative(rho);
    return std::sqrt(p.a * p.gamma * std::pow(rho, p.gamma - 1.0));
}

Tensor2 stress(const Tensor2& g, const FluidParams& p) {
    const double div = g[0][0] + g[1][1];
    Tensor2 s{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) s[i][j] = p.mu * (g[i][j] + g[j][i]);
    s[0][0] += (p.lambda - p.mu) * div;
    s[1][1] += (p.lambda - p.mu) * div;
    return s;
}

double dissipation_density(const Tensor2& g, const FluidParams& p) {
    const Tensor2 s = stress(g, p);
    double c = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) c += s[i][j] * g[i][j];
    return c;
}

double dissipation_density_quadratic(const Tensor2& g, const FluidParams& p) {
    const double div = g[0][0] + g[1][1];
    double q = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double d = g[i][j] + g[j][i] - (i == j ? div : 0.0);
            q += d * d;
        }
    return 0.5 * p.mu * q + p.lambda * div * div;
}

std::pair<ScalarField, ScalarField> essential_residual_split(const ScalarField& f, double rho_bar) {
    ScalarField ess(f.grid());
    ScalarField res(f.grid());
    const double lo = 0.5 * rho_bar;
    const double hi = 2.0 * rho_bar;
    for (std::size_t k = 0; k < f.data().size(); ++k) {
        const double v = f.data()[k];
        if (v >= lo && v <= hi)
            ess.data()[k] = v;
        else
            res.data()[k] = v;
    }
    return {std::move(ess), std::move(res)};
}

ClampReport clamp_negative(ScalarField& rho) {
    ClampReport r;
    for (double& v : rho.data()) {
        if (v < 0.0) {
            r.most_negative = std::min(r.most_negative, v);
            ++r.cells;
            v = 0.0;
        }
    }
    return r;
}

} // namespace lmfsi
