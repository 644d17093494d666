/// @file testfunctions.hpp
/// @brief Divergence-free test fields that vanish on the moving body: a
///        logarithmic radial cutoff around the body times a shifted stream
///        potential, blended with the plain field when the body nears a wall.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lmfsi/compressible.hpp"
#include "lmfsi/grid.hpp"

namespace lmfsi {

using BodyPath = std::function<Vec2(double)>;

BodyPath path_of(const PrescribedPath& path);
/// Piecewise-linear interpolation of the snapshot body centers.
BodyPath path_of(const Trajectory& trajectory);

struct TestFunctionSpec {
    /// Analytic stream function psi(x, y); the plain test field is phi = perp_grad psi.
    std::function<double(double, double)> psi;
    double delta = 0.16;                            ///< wall standoff: psi = 0 within 2 delta of the walls
    std::function<double(double)> alpha_rule;       ///< eps -> alpha(eps)
    double smoothing = 0.05;                        ///< junction band as a fraction of alpha eps - eps
    double side_length = 1.0;

    /// Polynomial bump A ((x-a)(b-x))^3 ((y-a)(b-y))^3 on [a, b]^2 with a = 2 delta,
    /// b = L - 2 delta, normalized to unit maximum; alpha(eps) = eps^(-1/2).
    static TestFunctionSpec standard(double side_length = 1.0, double delta = 0.16);

    /// Throws DomainError if psi is missing, delta is not in (0, L/4) or smoothing not in (0, 1/2).
    void validate() const;
    double alpha(double eps) const;
};

/// eps^(-1/2). Throws DomainError unless eps lies in (0, 1).
double alpha_of_eps(double eps);

/// Radial cutoff: 0 for |y| <= eps, 1 for |y| >= alpha eps, log(|y|/eps)/log(alpha) in
/// between with cubic Hermite junction bands of width smoothing (alpha eps - eps).
double cutoff_eta(Vec2 y, double eps, double alpha, double smoothing = 0.05);

/// Radial profile and its first two derivatives.
struct RadialValue {
    double value, d1, d2;
};
RadialValue cutoff_profile(double r, double eps, double alpha, double smoothing = 0.05);

/// sup |grad eta| and sup |Hess eta| (max of |eta''| and |eta'|/r) over dense radial samples.
struct EtaBounds {
    double grad_max = 0.0;
    double hess_max = 0.0;
};
EtaBounds eta_bounds(double eps, double alpha, double smoothing = 0.05, int samples = 20000);

/// perp_grad psi with psi sampled at the nodes.
VectorField phi_plain(const GridSpec& grid, const TestFunctionSpec& spec);

/// perp_grad of eta(x - h(t)) (psi(x) - psi(h(t))) sampled at the nodes.
VectorField phi_tilde(double t, const GridSpec& grid, const TestFunctionSpec& spec, double eps,
                      const BodyPath& path);

/// Piecewise-linear ramp: 0 for z <= delta/2, 1 for z >= delta.
double h_delta(double z, double delta);
/// H_delta(dist(h(t), boundary)).
double chi_eps(double t, double delta, const BodyPath& path, double side_length = 1.0);

/// chi phi_tilde + (1 - chi) phi.
VectorField phi_eps(double t, const GridSpec& grid, const TestFunctionSpec& spec, double eps, const BodyPath& path);

/// ||phi_tilde(t) - phi||_{W^{1,2}}.
double w12_gap(double t, const GridSpec& grid, const TestFunctionSpec& spec, double eps, const BodyPath& path);

/// Exactness checks of a test field at one instant.
struct FieldChecks {
    double body_max = 0.0;      ///< max |phi| on faces of cells whose corners all lie in the body disk
    double boundary_max = 0.0;  ///< max |phi| on faces within one cell of the walls
    double div_max = 0.0;       ///< max |div phi|
};
FieldChecks field_checks(const VectorField& phi, Vec2 body_center, double eps);

enum class TestField {
    admissible,  ///< phi_eps, vanishing on the body
    plain,       ///< phi itself (not admissible once the body enters its support)
};

/// Time envelope cos^2(pi t / 2T) that switches the test field off at t = T.
double test_envelope(double t, double T);

/// |int_0^T int rho u . d_t Phi + rho u (x) u : grad Phi - S(grad u) : grad Phi + eps^(-2m) (p - p(rho_bar)) div Phi
///  + int rho0 u0 . Phi(0)| with Phi = envelope * phi_eps. Trapezoid rule over the snapshots,
/// d_t phi_eps by centered differences. Throws DiagnosticError on fewer than 16 snapshots,
/// a non-uniform stride or a trajectory without stored fields.
double weak_momentum_residual(const Trajectory& trajectory, const TestFunctionSpec& spec,
                              TestField field = TestField::admissible);

struct RemainderReport {
    double res_convective = 0.0;      ///< int int |[rho]_res| |u|^2 |grad phi_eps|
    double res_timederiv = 0.0;       ///< int int |rho - rho_bar| |u| |d_t phi_eps|
    double grad_bound = 0.0;          ///< sup |grad phi_eps|
    double timederiv_bound = 0.0;     ///< sup |d_t phi_eps|
    double predicted_grad_scale = 0.0;     ///< sup |Hess eta| + 1
    double predicted_density_scale = 0.0;  ///< eps^min(m, 2m/gamma)
    double chi_prime_term = 0.0;           ///< max |chi'|^2 eps^2 alpha^2
};
RemainderReport remainder_terms(const Trajectory& trajectory, const TestFunctionSpec& spec);

/// One CSV row of the verifier report.
struct VerifierRow {
    double eps = 0.0;
    double W12_gap = 0.0;
    double grad_eta_max = 0.0;
    double hess_eta_max = 0.0;
    double weak_residual = 0.0;
    double res_convective = 0.0;
    double res_timederiv = 0.0;

    bool operator==(const VerifierRow&) const = default;
};

/// The solver setup the verifier uses: m = 1, counter-clockwise path of radius 0.15 about the
/// center, against the clockwise swirl of the initial flow.
SolverConfig weak_test_config(double eps, int n, int snapshots, double t_end = 0.5);

/// All columns for one eps from a stored trajectory; W12_gap is the max over snapshot times.
VerifierRow verify_trajectory(const Trajectory& trajectory, const TestFunctionSpec& spec);

std::string verifier_csv(const std::vector<VerifierRow>& rows);

} // namespace lmfsi
