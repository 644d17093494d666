/// @file incompressible.cpp
#include "lmfsi/incompressible.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lmfsi/errors.hpp"
#include "lmfsi/poisson.hpp"

namespace lmfsi {

namespace {

/// Face values with no-slip ghosts: odd reflection across every wall.
struct Ghosted {
    const VectorField& v;
    int n;

    double x(int i, int j) const {
        double s = 1.0;
        if (i < 0) { i = -i; s = -s; }
        if (i > n) { i = 2 * n - i; s = -s; }
        if (j < 0) { j = -1 - j; s = -s; }
        if (j > n - 1) { j = 2 * n - 1 - j; s = -s; }
        return s * v.x(i, j);
    }
    double y(int i, int j) const {
        double s = 1.0;
        if (j < 0) { j = -j; s = -s; }
        if (j > n) { j = 2 * n - j; s = -s; }
        if (i < 0) { i = -1 - i; s = -s; }
        if (i > n - 1) { i = 2 * n - 1 - i; s = -s; }
        return s * v.y(i, j);
    }
};

/// Second-order upwind derivative from values at offsets 0, -1, -2 (a > 0) or 0, +1, +2.
inline double upwind2(double a, double c, double m1, double m2, double p1, double p2, double inv_2h) {
    return a > 0.0 ? (3.0 * c - 4.0 * m1 + m2) * inv_2h : (-3.0 * c + 4.0 * p1 - p2) * inv_2h;
}

double max_abs_divergence(const VectorField& u) {
    double m = 0.0;
    for (double d : divergence(u).data()) m = std::max(m, std::abs(d));
    return m;
}

double kinetic(const VectorField& u, double rho_bar) {
    double s = 0.0;
    for (double v : u.xs()) s += v * v;
    for (double v : u.ys()) s += v * v;
    const double h = u.grid().h();
    return 0.5 * rho_bar * s * h * h;
}

void require_square(const GridSpec& g) {
    if (g.nx != g.ny) throw DomainError("incompressible solver requires a square grid");
}

} // namespace

ProjectionResult project(const VectorField& v, double tolerance) {
    const GridSpec& g = v.grid();
    for (double x : v.xs())
        if (!std::isfinite(x)) throw DomainError("project: non-finite velocity");
    for (double x : v.ys())
        if (!std::isfinite(x)) throw DomainError("project: non-finite velocity");

    const ScalarField div = divergence(v);
    PoissonResult q = solve_neumann_poisson(div, tolerance);
    const double inv_h = 1.0 / g.h();
    ProjectionResult r{v, std::move(q.solution), q.relative_residual};
    const ScalarField& p = r.increment;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) r.u.x(i, j) -= (p(i, j) - p(i - 1, j)) * inv_h;
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) r.u.y(i, j) -= (p(i, j) - p(i, j - 1)) * inv_h;
    return r;
}

VectorField advection(const VectorField& u) {
    const GridSpec& g = u.grid();
    require_square(g);
    const int n = g.nx;
    const double inv_2h = 0.5 / g.h();
    const Ghosted q{u, n};
    VectorField out(g);
    for (int j = 0; j < n; ++j)
        for (int i = 1; i < n; ++i) {
            const double a = u.x(i, j);
            const double b = 0.25 * (u.y(i - 1, j) + u.y(i, j) + u.y(i - 1, j + 1) + u.y(i, j + 1));
            const double dx = upwind2(a, a, q.x(i - 1, j), q.x(i - 2, j), q.x(i + 1, j), q.x(i + 2, j), inv_2h);
            const double dy = upwind2(b, a, q.x(i, j - 1), q.x(i, j - 2), q.x(i, j + 1), q.x(i, j + 2), inv_2h);
            out.x(i, j) = a * dx + b * dy;
        }
    for (int j = 1; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double b = u.y(i, j);
            const double a = 0.25 * (u.x(i, j - 1) + u.x(i + 1, j - 1) + u.x(i, j) + u.x(i + 1, j));
            const double dx = upwind2(a, b, q.y(i - 1, j), q.y(i - 2, j), q.y(i + 1, j), q.y(i + 2, j), inv_2h);
            const double dy = upwind2(b, b, q.y(i, j - 1), q.y(i, j - 2), q.y(i, j + 1), q.y(i, j + 2), inv_2h);
            out.y(i, j) = a * dx + b * dy;
        }
    return out;
}

double inc_stable_dt(const VectorField& u, double rho_bar, double mu) {
    if (!(rho_bar > 0.0) || !(mu >= 0.0)) throw DomainError("inc_stable_dt: need rho_bar > 0 and mu >= 0");
    const double h = u.grid().h();
    double umax = 0.0, vmax = 0.0;
    for (double v : u.xs()) umax = std::max(umax, std::abs(v));
    for (double v : u.ys()) vmax = std::max(vmax, std::abs(v));
    if (!std::isfinite(umax + vmax)) throw SolverError("non-finite velocity");
    const double nu = mu / rho_bar;
    // highest mode of the upwind stencil: dt (4 (|u| + |v|)/h + 8 nu/h^2) <= 2
    const double rate = 2.0 * (umax + vmax) / h + 4.0 * nu / (h * h);
    double dt = rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
    // smooth modes: upwind dissipation is O(k^4), so viscosity must outweigh the Euler growth
    const double speed2 = umax * umax + vmax * vmax;
    if (speed2 > 0.0 && nu > 0.0) dt = std::min(dt, 2.0 * nu / speed2);
    return dt;
}

IncState step_inc(const IncState& state, double dt, double rho_bar, double mu, const VectorField* forcing,
                  double tolerance) {
    if (!(dt > 0.0)) throw DomainError("step_inc: dt must be positive");
    const double limit = inc_stable_dt(state.u, rho_bar, mu);
    if (dt > limit) {
        std::ostringstream os;
        os << "step_inc: dt = " << dt << " exceeds the explicit stability limit " << limit;
        throw SolverError(os.str());
    }
    const GridSpec& g = state.u.grid();
    const VectorField adv = advection(state.u);
    const VectorField lap = vector_laplacian(state.u);
    const double nu = mu / rho_bar;
    VectorField star = state.u;
    auto predict = [&](std::vector<double>& s, const std::vector<double>& a, const std::vector<double>& l,
                       const std::vector<double>* f) {
        for (std::size_t k = 0; k < s.size(); ++k) {
            double r = -a[k] + nu * l[k];
            if (f) r += (*f)[k] / rho_bar;
            s[k] += dt * r;
        }
    };
    predict(star.xs(), adv.xs(), lap.xs(), forcing ? &forcing->xs() : nullptr);
    predict(star.ys(), adv.ys(), lap.ys(), forcing ? &forcing->ys() : nullptr);
    // wall-normal faces stay zero
    for (int j = 0; j < g.ny; ++j) star.x(0, j) = star.x(g.nx, j) = 0.0;
    for (int i = 0; i < g.nx; ++i) star.y(i, 0) = star.y(i, g.ny) = 0.0;

    ProjectionResult pr = project(star, tolerance);
    IncState out{std::move(pr.u), std::move(pr.increment), state.t + dt};
    for (double& p : out.pressure.data()) p *= rho_bar / dt;
    return out;
}

IncTrajectory run_reference(const SolverConfig& config) {
    config.validate();
    const GridSpec& g = config.grid;
    require_square(g);
    const double rho_bar = config.params.rho_bar, mu = config.params.mu;

    IncState s{project(well_prepared_velocity(g, config.stream_amplitude)).u, ScalarField(g), 0.0};
    IncTrajectory traj;
    auto emit = [&]() {
        traj.snapshots.push_back({s.t, s.u, s.pressure, kinetic(s.u, rho_bar), max_abs_divergence(s.u)});
    };
    emit();
    for (int k = 1; k <= config.snapshots; ++k) {
        const double target = config.t_end * k / config.snapshots;
        while (s.t < target) {
            double dt = config.dt_safety * inc_stable_dt(s.u, rho_bar, mu);
            if (!std::isfinite(dt)) dt = target - s.t;
            bool last = false;
            if (s.t + dt >= target) {
                dt = target - s.t;
                last = true;
            }
            s = step_inc(s, dt, rho_bar, mu);
            if (last) s.t = target;
            ++traj.steps;
            if (!last) traj.dt_max = std::max(traj.dt_max, dt);
        }
        emit();
    }
    return traj;
}

// ============================================================================
// Manufactured solution
// ============================================================================

namespace {

struct Profile {
    double s, d1, d2, d3;  ///< sin^2(kx) and its first three derivatives
};

Profile profile(double x, double k) {
    const double s1 = std::sin(k * x), s2 = std::sin(2.0 * k * x), c2 = std::cos(2.0 * k * x);
    return {s1 * s1, k * s2, 2.0 * k * k * c2, -4.0 * k * k * k * s2};
}

double g_of(double t) { return 1.0 + 0.5 * std::sin(2.0 * M_PI * t); }
double g_prime(double t) { return M_PI * std::cos(2.0 * M_PI * t); }

/// Velocity, its gradient, Laplacian and grad Pi (without the g factors) at a point.
struct Local {
    double u, v, ux, uy, vx, vy, lu, lv, px, py;
};

Local local(double x, double y, double L) {
    const double k = M_PI / L;
    const Profile X = profile(x, k), Y = profile(y, k);
    Local r;
    r.u = -X.s * Y.d1;
    r.v = X.d1 * Y.s;
    r.ux = -X.d1 * Y.d1;
    r.uy = -X.s * Y.d2;
    r.vx = X.d2 * Y.s;
    r.vy = X.d1 * Y.d1;
    r.lu = -(X.d2 * Y.d1 + X.s * Y.d3);
    r.lv = X.d3 * Y.s + X.d1 * Y.d2;
    r.px = -k * std::sin(k * x) * std::cos(k * y);
    r.py = -k * std::cos(k * x) * std::sin(k * y);
    return r;
}

} // namespace

VectorField manufactured_velocity(const GridSpec& grid, double t) {
    const double L = grid.side_length, gt = g_of(t);
    VectorField out(grid);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i <= grid.nx; ++i) {
            const Vec2 p = out.x_face(i, j);
            out.x(i, j) = gt * local(p.x, p.y, L).u;
        }
    for (int j = 0; j <= grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const Vec2 p = out.y_face(i, j);
            out.y(i, j) = gt * local(p.x, p.y, L).v;
        }
    return out;
}

VectorField manufactured_forcing(const GridSpec& grid, double t, double rho_bar, double mu) {
    const double L = grid.side_length, gt = g_of(t), gp = g_prime(t);
    VectorField out(grid);
    auto fx = [&](const Local& q) {
        return rho_bar * gp * q.u + rho_bar * gt * gt * (q.u * q.ux + q.v * q.uy) + gt * q.px - mu * gt * q.lu;
    };
    auto fy = [&](const Local& q) {
        return rho_bar * gp * q.v + rho_bar * gt * gt * (q.u * q.vx + q.v * q.vy) + gt * q.py - mu * gt * q.lv;
    };
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i <= grid.nx; ++i) {
            const Vec2 p = out.x_face(i, j);
            out.x(i, j) = fx(local(p.x, p.y, L));
        }
    for (int j = 0; j <= grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const Vec2 p = out.y_face(i, j);
            out.y(i, j) = fy(local(p.x, p.y, L));
        }
    return out;
}

} // namespace lmfsi
