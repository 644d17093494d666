/// @file test_incompressible.cpp
/// @brief Neumann Poisson solve, projection, the projection stepper and the reference run.
#include "doctest.h"

#include <cmath>

#include "lmfsi/errors.hpp"
#include "lmfsi/harness.hpp"
#include "lmfsi/incompressible.hpp"
#include "lmfsi/poisson.hpp"

using namespace lmfsi;

namespace {

double s2(double x) {
    const double s = std::sin(M_PI * x);
    return s * s;
}

VectorField swirl(const GridSpec& g) {
    return perp_gradient(NodeField::sample(g, [](double x, double y) { return s2(x) * s2(y); }));
}

double l2_div(const VectorField& v) { return norm_Lp(divergence(v), 2.0); }

/// L2 error of the manufactured solution at t = 0.1 with a fixed small dt.
double mms_error(int n, double dt) {
    const GridSpec g = GridSpec::square(n);
    const double rho_bar = 1.0, mu = 0.05;
    IncState s{manufactured_velocity(g, 0.0), ScalarField(g), 0.0};
    const int steps = static_cast<int>(std::lround(0.1 / dt));
    for (int k = 0; k < steps; ++k) {
        const VectorField f = manufactured_forcing(g, s.t, rho_bar, mu);
        s = step_inc(s, dt, rho_bar, mu, &f);
    }
    return norm_L2(s.u - manufactured_velocity(g, s.t));
}

} // namespace

TEST_CASE("Neumann Poisson solve") {
    const GridSpec g = GridSpec::square(32);
    const ScalarField rhs = ScalarField::sample(g, [](double x, double y) {
        return std::cos(M_PI * x) * std::cos(2.0 * M_PI * y) + x * x * y + 0.3;
    });
    const PoissonResult r = solve_neumann_poisson(rhs, 1e-12);
    CHECK(r.relative_residual <= 1e-12);
    double mean_rhs = 0.0, mean_q = 0.0;
    for (double v : rhs.data()) mean_rhs += v;
    for (double v : r.solution.data()) mean_q += v;
    mean_rhs /= 1024.0;
    CHECK(std::abs(mean_q) <= 1e-10);
    const ScalarField lq = neumann_laplacian(r.solution);
    for (std::size_t k = 0; k < lq.data().size(); ++k)
        CHECK(lq.data()[k] == doctest::Approx(rhs.data()[k] - mean_rhs).epsilon(1e-9));
}

TEST_CASE("projection") {
    const GridSpec g = GridSpec::square(32);
    const VectorField psi_part = swirl(g);
    const ScalarField f = ScalarField::sample(g, [](double x, double y) {
        return std::cos(M_PI * x) * std::cos(M_PI * y) + 0.5 * std::cos(2.0 * M_PI * x);
    });
    VectorField grad_part = gradient(f);
    for (int j = 0; j < 32; ++j) grad_part.x(0, j) = grad_part.x(32, j) = 0.0;
    for (int i = 0; i < 32; ++i) grad_part.y(i, 0) = grad_part.y(i, 32) = 0.0;

    SUBCASE("divergence-free input is returned unchanged") {
        const ProjectionResult p = project(psi_part);
        CHECK((p.u - psi_part).max_abs() <= 1e-12);
        CHECK(l2_div(p.u) <= 1e-12);
    }
    SUBCASE("pure gradients are annihilated") {
        const ProjectionResult p = project(grad_part);
        CHECK(norm_L2(p.u) <= 1e-9 * norm_L2(grad_part));
    }
    SUBCASE("Hodge split recovers the curl part") {
        const VectorField v = psi_part + grad_part;
        const ProjectionResult p = project(v, 1e-12);
        CHECK(norm_L2(p.u - psi_part) <= 1e-9 * norm_L2(v));
        CHECK(l2_div(p.u) <= 1e-12 * l2_div(v));
        const ProjectionResult again = project(p.u);
        CHECK((again.u - p.u).max_abs() <= 1e-10);
    }
    SUBCASE("non-finite input") {
        VectorField bad = psi_part;
        bad.x(3, 3) = NAN;
        CHECK_THROWS_AS(project(bad), DomainError);
    }
}

TEST_CASE("explicit step") {
    const GridSpec g = GridSpec::square(32);
    SUBCASE("rest stays at rest") {
        const IncState s = step_inc({VectorField(g), ScalarField(g), 0.0}, 1e-3, 1.0, 0.01);
        CHECK(s.u.max_abs() == 0.0);
        CHECK(s.t == 1e-3);
    }
    SUBCASE("steps beyond the stability limit are refused") {
        const VectorField u = swirl(g);
        const double limit = inc_stable_dt(u, 1.0, 0.01);
        CHECK(limit > 0.0);
        CHECK_NOTHROW(step_inc({u, ScalarField(g), 0.0}, limit, 1.0, 0.01));
        CHECK_THROWS_AS(step_inc({u, ScalarField(g), 0.0}, 1.01 * limit, 1.0, 0.01), SolverError);
        CHECK_THROWS_AS(step_inc({u, ScalarField(g), 0.0}, -1.0, 1.0, 0.01), DomainError);
    }
    SUBCASE("every step ends divergence free with zero wall-normal velocity") {
        IncState s{project(swirl(g)).u, ScalarField(g), 0.0};
        for (int k = 0; k < 10; ++k) {
            s = step_inc(s, 0.5 * inc_stable_dt(s.u, 1.0, 0.01), 1.0, 0.01);
            CHECK(l2_div(s.u) <= 1e-10 * norm_W12(s.u));
        }
        for (int j = 0; j < 32; ++j) CHECK(s.u.x(0, j) == 0.0);
        for (int i = 0; i < 32; ++i) CHECK(s.u.y(i, 32) == 0.0);
    }
    SUBCASE("diagonal reflection symmetry") {
        // psi odd under (x, y) -> (y, x) makes u_x(x, y) = u_y(y, x)
        const NodeField psi = NodeField::sample(g, [](double x, double y) { return s2(x) * s2(y) * (x - y) * 4.0; });
        IncState s{perp_gradient(psi), ScalarField(g), 0.0};
        for (int k = 0; k < 20; ++k) s = step_inc(s, 0.5 * inc_stable_dt(s.u, 1.0, 0.01), 1.0, 0.01);
        double asym = 0.0;
        for (int j = 0; j < 32; ++j)
            for (int i = 0; i <= 32; ++i) asym = std::max(asym, std::abs(s.u.x(i, j) - s.u.y(j, i)));
        CHECK(asym <= 1e-12 * s.u.max_abs());
    }
}

TEST_CASE("manufactured solution converges in space") {
    const double dt = 2.5e-4;
    const double e32 = mms_error(32, dt), e64 = mms_error(64, dt);
    const double order = std::log2(e32 / e64);
    MESSAGE("manufactured L2 errors " << e32 << " " << e64 << " order " << order);
    CHECK(order >= 1.9);
    CHECK(manufactured_velocity(GridSpec::square(16), 0.3).max_abs() > 0.0);
    CHECK(max_abs(divergence(manufactured_velocity(GridSpec::square(16), 0.3))) <= 1e-12);
}

TEST_CASE("reference run decays and shares the snapshot clock") {
    SolverConfig c = default_solver_config();
    c.grid = GridSpec::square(32);
    c.t_end = 0.1;
    c.snapshots = 5;
    const IncTrajectory r = run_reference(c);
    REQUIRE(r.snapshots.size() == 6);
    for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
        CHECK(r.snapshots[k].t == doctest::Approx(0.02 * k).epsilon(1e-14));
        CHECK(r.snapshots[k].max_divergence <= 1e-10);
        if (k > 0) CHECK(r.snapshots[k].kinetic < r.snapshots[k - 1].kinetic);
    }
    CHECK(r.steps > 0);
    CHECK(r.dt_max > 0.0);
}
