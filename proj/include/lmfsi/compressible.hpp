/// @file compressible.hpp
/// @brief Scaled isentropic compressible Navier-Stokes on the MAC grid with a
///        penalized rigid disk (prescribed path or coupled to the fluid).
///
/// Semi-discretization:
///   - continuity: conservative finite volumes, local Lax-Friedrichs mass flux
///     with wave speed |u| + c/eps^m;
///   - momentum (velocity form on faces): the convective operator transports
///     velocity with the same mass fluxes as the continuity equation on the
///     staggered control volumes, with a minmod-limited upwind face value, so
///     kinetic energy is only ever removed by convection;
///   - pressure: eps^(-2m) grad p(rho) with a face density chosen so that the
///     pressure work matches the pressure-potential change exactly;
///   - viscosity: mu lap u + lambda grad div u (the divergence of S for
///     constant coefficients);
///   - body: -(mask/eta)(u - u_rigid) in velocity form, i.e. a momentum source
///     -(mask rho/eta)(u - u_rigid).
/// Time integration is the explicit midpoint rule.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "lmfsi/constitutive.hpp"
#include "lmfsi/grid.hpp"

namespace lmfsi {

enum class BodyMode { prescribed, coupled };

/// Circle (or a body at rest when radius == 0) traversed at constant angular speed.
struct PrescribedPath {
    Vec2 center{0.5, 0.5};
    double radius = 0.25;
    double period = 0.5;     ///< time for one revolution
    bool clockwise = true;
    double phase = 0.0;      ///< starting angle, radians from +x

    Vec2 position(double t) const;
    Vec2 velocity(double t) const;
    double speed() const;

    static PrescribedPath stationary(Vec2 at);
    static PrescribedPath circle(double side_length, double period);
    /// Circle whose extreme points bring the body center within eps/2 of the walls.
    static PrescribedPath grazing(double side_length, double eps, double period);

    bool operator==(const PrescribedPath&) const = default;
};

struct BodyState {
    Vec2 h;              ///< center
    Vec2 h_dot;          ///< center velocity
    double beta = 0.0;   ///< angle
    double beta_dot = 0.0;
    double mass = 1.0;
    double inertia = 1.0;
    double radius = 0.1;

    /// h' + beta' (x - h)^perp
    Vec2 rigid_velocity(Vec2 x) const { return h_dot + beta_dot * (x - h).perp(); }
    void validate() const;
};

struct SolverConfig {
    FluidParams params{};
    GridSpec grid{};
    double dt_safety = 0.5;
    double penalization_eta = 1e-3;
    double t_end = 0.5;
    BodyMode body_mode = BodyMode::prescribed;
    PrescribedPath path{};
    double body_density_exponent = 0.5;  ///< kappa in rho_S = rho_bar eps^-(2+kappa)
    Vec2 body_start{0.75, 0.5};          ///< coupled mode initial center
    Vec2 body_velocity0{};               ///< coupled mode initial velocity
    double beta0 = 0.0;
    double omega0 = 0.0;                 ///< initial (prescribed: constant) angular rate
    double stream_amplitude = 1.0;       ///< V in psi = V sin^2(pi x/L) sin^2(pi y/L)
    int snapshots = 20;                  ///< number of output intervals on [0, t_end]
    double density_perturbation = 0.0;   ///< relative amplitude of seeded initial noise
    std::uint64_t seed = 0;

    void validate() const;
    double body_mass() const;
    double body_inertia() const;
    bool operator==(const SolverConfig&) const = default;
};

struct SimState {
    ScalarField rho;
    VectorField u;
    BodyState body;
    double t = 0.0;
};

/// Terms of the energy inequality at one instant.
struct EnergyReport {
    double kinetic = 0.0;           ///< sum 1/2 rho |u|^2 over the whole domain
    double pressure_energy = 0.0;   ///< eps^-2m * relative energy over the fluid region
    double dissipation_accum = 0.0; ///< time integral of the discrete S(grad u):grad u
    double body_exchange = 0.0;     ///< net energy handed to the fluid by the body
    double total = 0.0;             ///< kinetic + pressure_energy + dissipation_accum - body_exchange
};

struct EnergyRow {
    double t = 0.0;
    EnergyReport energy;
    double mass = 0.0;
    double eps_hdot = 0.0;
};

struct Snapshot {
    double t = 0.0;
    ScalarField rho;
    VectorField u;
    BodyState body;
};

struct RunDiagnostics {
    long steps = 0;
    double dt_min = 0.0;
    double dt_max = 0.0;
    double peak_dissipation_rate = 0.0;
    double max_mass_drift = 0.0;         ///< max relative |M(t) - M(0)| / M(0) over all steps
    double min_rho_before_clamp = 0.0;
    long clamp_events = 0;
    double max_eps_hdot = 0.0;           ///< eps * max_t |h'(t)|
    double energy_violation = 0.0;       ///< max over snapshots of (total(t) - total(0))^+
    double energy_tolerance = 0.0;       ///< 10 * dt_max * peak_dissipation_rate
    bool energy_ok() const { return energy_violation <= energy_tolerance; }
};

struct Trajectory {
    SolverConfig config;
    std::vector<Snapshot> snapshots;
    std::vector<EnergyRow> energy;
    RunDiagnostics diag;
};

struct ExchangeForce {
    Vec2 force;     ///< force exerted by the fluid on the body
    double torque = 0.0;
};

/// Stepper with reusable work arrays.
class CompressibleSolver {
public:
    explicit CompressibleSolver(SolverConfig config);
    ~CompressibleSolver();
    CompressibleSolver(CompressibleSolver&&) noexcept;
    CompressibleSolver& operator=(CompressibleSolver&&) noexcept;

    const SolverConfig& config() const { return config_; }

    SimState initial_state() const;
    double stable_dt(const SimState& s) const;

    struct StepInfo {
        double dt = 0.0;
        double dissipation_rate = 0.0;  ///< at the midpoint stage
        double exchange = 0.0;          ///< body energy handed over during the step
        ClampReport clamp;
    };
    /// Advances s by dt (must not exceed stable_dt). Throws SolverError on blow-up.
    StepInfo advance(SimState& s, double dt);

    /// Body state at time t for the prescribed path (mass/inertia/radius from config).
    BodyState prescribed_body(double t) const;

private:
    struct Impl;
    SolverConfig config_;
    std::unique_ptr<Impl> impl_;
};

// ============================================================================
// Operations
// ============================================================================

/// perp_gradient of V sin^2(pi x/L) sin^2(pi y/L) sampled at the nodes; no body.
VectorField well_prepared_velocity(const GridSpec& grid, double stream_amplitude);

/// rho = rho_bar, u = perp_gradient(V sin^2 sin^2) blended with the rigid field inside the mask.
SimState init_well_prepared(const SolverConfig& config, double stream_amplitude);

double stable_dt(const SimState& state, const SolverConfig& config);

/// One midpoint step with dt = stable_dt.
SimState step(const SimState& state, const SolverConfig& config);

/// Penalization exchange force and torque on the body: int mask rho/eta (u - u_rigid) [. (x-h)^perp].
ExchangeForce exchange_force(const SimState& state, const SolverConfig& config);

/// h_dot += dt F/m, beta_dot += dt T/J, h += dt h_dot, beta += dt beta_dot.
BodyState body_update(const BodyState& body, const ExchangeForce& f, double dt);

/// Kinetic, fluid-region pressure energy; dissipation and exchange are carried in.
EnergyReport energy_report(const SimState& state, const SolverConfig& config, double dissipation_accum,
                           double body_exchange = 0.0);

/// ||u - u_rigid||_{L2(mask)} with face mask weights.
double rigid_constraint_error(const SimState& state, const SolverConfig& config);

struct RunOptions {
    bool keep_fields = true;
    /// Called at every emitted snapshot (after it is recorded).
    std::function<void(const Snapshot&, const EnergyRow&)> on_snapshot;
};

/// Integrates to t_end, emitting config.snapshots + 1 snapshots at uniform times.
Trajectory run(const SolverConfig& config, const RunOptions& options = {});

/// Capped quadratic renormalization b(rho) = min(rho^2, 2 rho M - M^2).
double renormalization_b(double rho, double cap);
double renormalization_b_prime(double rho, double cap);

/// Weak renormalized-continuity residual on each snapshot interval for a fixed
/// smooth space-time bump phi; an empty phi (zero bump) gives zeros.
std::vector<double> renormalized_residual(const Trajectory& trajectory, double cap, bool zero_test_function = false);

} // namespace lmfsi
