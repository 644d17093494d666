/// @file test_testfunctions.cpp
/// @brief Cutoff, shifted stream potential, blended test field and the weak-form functionals.
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "lmfsi/errors.hpp"
#include "lmfsi/testfunctions.hpp"

using namespace lmfsi;

namespace {

/// Uniform density, velocity u0 everywhere, body on a prescribed path: no solver involved.
Trajectory synthetic(double eps, int n, int snapshots, const PrescribedPath& path, double velocity = 0.0) {
    Trajectory tr;
    tr.config.params.eps = eps;
    tr.config.grid = GridSpec::square(n);
    tr.config.t_end = 0.5;
    tr.config.snapshots = snapshots;
    tr.config.path = path;
    const VectorField u = velocity * well_prepared_velocity(tr.config.grid, 1.0);
    for (int k = 0; k <= snapshots; ++k) {
        Snapshot s;
        s.t = 0.5 * k / snapshots;
        s.rho = ScalarField(tr.config.grid, tr.config.params.rho_bar);
        s.u = u;
        s.body.h = path.position(s.t);
        s.body.h_dot = path.velocity(s.t);
        s.body.radius = eps;
        tr.snapshots.push_back(s);
    }
    return tr;
}

const PrescribedPath inner_circle{{0.5, 0.5}, 0.15, 0.5, false, 0.0};

} // namespace

TEST_CASE("alpha rule") {
    CHECK(alpha_of_eps(0.01) == doctest::Approx(10.0));
    CHECK(alpha_of_eps(0.01) * 0.01 == doctest::Approx(0.1));
    CHECK(alpha_of_eps(1e-4) == doctest::Approx(100.0));
    double last = 1.0;
    for (int k = 1; k <= 8; ++k) {
        const double e = std::pow(4.0, -k);
        CHECK(alpha_of_eps(e) * e == doctest::Approx(std::pow(2.0, -k)));
        CHECK(alpha_of_eps(e) * e < last);
        last = alpha_of_eps(e) * e;
    }
    CHECK_THROWS_AS(alpha_of_eps(1.0), DomainError);
    CHECK_THROWS_AS(alpha_of_eps(0.0), DomainError);
}

TEST_CASE("logarithmic cutoff") {
    const double eps = 0.05, alpha = alpha_of_eps(eps);
    CHECK(cutoff_eta({0.5 * eps, 0.0}, eps, alpha) == 0.0);
    CHECK(cutoff_eta({0.0, eps}, eps, alpha) == 0.0);
    CHECK(cutoff_eta({2.0 * alpha * eps, 0.0}, eps, alpha) == 1.0);
    CHECK(cutoff_eta({alpha * eps, 0.0}, eps, alpha) == 1.0);
    const double mid = std::sqrt(alpha) * eps;  // log profile gives 1/2 here
    CHECK(cutoff_eta({mid, 0.0}, eps, alpha) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(cutoff_eta({0.1, 0.0}, eps, 1.0), DomainError);

    SUBCASE("monotone, clamped and C1 across the junctions") {
        double last = 0.0;
        for (int k = 0; k <= 4000; ++k) {
            const double r = 1.2 * alpha * eps * k / 4000.0;
            const RadialValue v = cutoff_profile(r, eps, alpha);
            CHECK(v.value >= last);
            CHECK(v.value <= 1.0);
            last = v.value;
        }
        const double w = 0.05 * (alpha * eps - eps);
        for (double r : {eps + w, alpha * eps - w}) {
            const RadialValue a = cutoff_profile(r * (1 - 1e-9), eps, alpha), b = cutoff_profile(r * (1 + 1e-9), eps, alpha);
            CHECK(a.d1 == doctest::Approx(b.d1).epsilon(1e-6));
        }
        CHECK(cutoff_profile(eps * (1 + 1e-12), eps, alpha).d1 == doctest::Approx(0.0).epsilon(1e-6));
    }
    SUBCASE("gradient bound") {
        for (double e : {0.1, 0.05}) {
            const double a = alpha_of_eps(e);
            const EtaBounds b = eta_bounds(e, a);
            CHECK(b.grad_max <= 4.0 / (e * std::log(a)));
            CHECK(b.hess_max > 0.0);
        }
    }
}

TEST_CASE("stream function and spec") {
    const TestFunctionSpec spec = TestFunctionSpec::standard();
    CHECK_NOTHROW(spec.validate());
    CHECK(spec.psi(0.5, 0.5) == doctest::Approx(1.0));
    CHECK(spec.psi(0.31, 0.5) == 0.0);
    CHECK(spec.psi(0.5, 0.69) == 0.0);
    CHECK(spec.alpha(0.04) == doctest::Approx(5.0));
    TestFunctionSpec bad = spec;
    bad.delta = 0.3;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = spec;
    bad.psi = nullptr;
    CHECK_THROWS_AS(bad.validate(), DomainError);

    const GridSpec g = GridSpec::square(64);
    const VectorField phi = phi_plain(g, spec);
    CHECK(phi.max_abs() > 0.0);
    const FieldChecks c = field_checks(phi, {0.5, 0.5}, 0.0);
    CHECK(c.boundary_max == 0.0);
    CHECK(c.div_max <= 1e-12);
}

TEST_CASE("wall switch") {
    const double delta = 0.16;
    CHECK(h_delta(0.0, delta) == 0.0);
    CHECK(h_delta(delta / 4, delta) == 0.0);
    CHECK(h_delta(3 * delta / 4, delta) == doctest::Approx(0.5));
    CHECK(h_delta(delta, delta) == 1.0);
    CHECK(chi_eps(0.0, 0.05, [](double) { return Vec2{0.5, 0.5}; }) == 1.0);
    CHECK(chi_eps(0.0, delta, [&](double) { return Vec2{delta / 4, 0.5}; }) == 0.0);
    CHECK(chi_eps(0.0, delta, [&](double) { return Vec2{0.5, 1.0 - 0.75 * delta}; }) == doctest::Approx(0.5));

    SUBCASE("Lipschitz in time along a grazing path") {
        const PrescribedPath p = PrescribedPath::grazing(1.0, 0.05, 0.5);
        const BodyPath path = path_of(p);
        const double dt = 1e-4, bound = 2.0 / delta * p.speed();
        for (double t = 0.0; t < 0.5; t += dt)
            CHECK(std::abs(chi_eps(t + dt, delta, path) - chi_eps(t, delta, path)) <= bound * dt * (1 + 1e-9));
    }
}

TEST_CASE("shifted test field") {
    const TestFunctionSpec spec = TestFunctionSpec::standard();
    const GridSpec g = GridSpec::square(128);
    const double eps = 0.05, alpha = spec.alpha(eps), h = g.h();
    const BodyPath path = path_of(inner_circle);
    const Vec2 c = path(0.1);
    const VectorField pt = phi_tilde(0.1, g, spec, eps, path), plain = phi_plain(g, spec);

    const FieldChecks fc = field_checks(pt, c, eps);
    CHECK(fc.body_max == 0.0);
    CHECK(fc.boundary_max == 0.0);
    CHECK(fc.div_max <= 1e-12);

    // faces whose stencil nodes all lie beyond alpha eps see eta = 1
    double far = 0.0;
    for (int j = 0; j < 128; ++j)
        for (int i = 0; i <= 128; ++i) {
            const Vec2 p{i * h, (j + 0.5) * h};
            if ((p - c).norm() > alpha * eps + h) far = std::max(far, std::abs(pt.x(i, j) - plain.x(i, j)));
        }
    CHECK(far <= 1e-12);

    SUBCASE("blend limits") {
        const VectorField blended = phi_eps(0.1, g, spec, eps, path);
        CHECK((blended - pt).max_abs() == 0.0);
        const BodyPath near_wall = [](double) { return Vec2{0.03, 0.5}; };
        CHECK((phi_eps(0.0, g, spec, eps, near_wall) - plain).max_abs() == 0.0);
        CHECK(field_checks(phi_eps(0.0, g, spec, 0.02, near_wall), near_wall(0.0), 0.02).body_max == 0.0);
    }
    SUBCASE("grazing body keeps the wall layer exactly zero") {
        const BodyPath graze = path_of(PrescribedPath::grazing(1.0, eps, 0.5));
        for (int k = 0; k <= 20; ++k) {
            const double t = 0.025 * k;
            const FieldChecks f = field_checks(phi_eps(t, g, spec, eps, graze), graze(t), eps);
            CHECK(f.boundary_max <= 1e-12);
            CHECK(f.body_max == 0.0);
            CHECK(f.div_max <= 1e-12);
        }
    }
    SUBCASE("W12 gap shrinks along the ladder") {
        const GridSpec fine = GridSpec::square(256);
        double last = INFINITY;
        for (double e : {0.1, 0.05, 0.025}) {
            const double gap = w12_gap(0.1, fine, spec, e, path);
            MESSAGE("eps " << e << " W12 gap " << gap);
            CHECK(gap <= last);
            last = gap;
        }
    }
}

TEST_CASE("weak momentum residual on synthetic trajectories") {
    const TestFunctionSpec spec = TestFunctionSpec::standard();
    SUBCASE("rest state gives zero") {
        const Trajectory tr = synthetic(0.1, 64, 16, inner_circle, 0.0);
        CHECK(weak_momentum_residual(tr, spec) <= 1e-14);
        CHECK(weak_momentum_residual(tr, spec, TestField::plain) <= 1e-14);
        const RemainderReport r = remainder_terms(tr, spec);
        CHECK(r.res_convective == 0.0);
        CHECK(r.res_timederiv == 0.0);
        CHECK(r.grad_bound > 0.0);
        CHECK(r.predicted_density_scale == doctest::Approx(0.1));
    }
    SUBCASE("uniform density is never residual") {
        const Trajectory tr = synthetic(0.1, 64, 16, inner_circle, 1.0);
        CHECK(remainder_terms(tr, spec).res_convective == 0.0);
        CHECK(std::isfinite(weak_momentum_residual(tr, spec)));
    }
    SUBCASE("quality errors") {
        CHECK_THROWS_AS(weak_momentum_residual(synthetic(0.1, 32, 10, inner_circle), spec), DiagnosticError);
        Trajectory uneven = synthetic(0.1, 32, 16, inner_circle);
        uneven.snapshots[5].t += 1e-3;
        CHECK_THROWS_AS(weak_momentum_residual(uneven, spec), DiagnosticError);
        Trajectory empty = synthetic(0.1, 32, 16, inner_circle);
        for (Snapshot& s : empty.snapshots) s.rho = ScalarField();
        CHECK_THROWS_AS(remainder_terms(empty, spec), DiagnosticError);
    }
    SUBCASE("gradient bound grows at most like 1/eps^2") {
        std::vector<double> g;
        for (double e : {0.1, 0.05, 0.025}) g.push_back(remainder_terms(synthetic(e, 256, 16, inner_circle), spec).grad_bound);
        const double exponent = std::log(g[2] / g[0]) / std::log(4.0);
        MESSAGE("grad bound exponent " << exponent);
        CHECK(exponent <= 2.1);
    }
}

TEST_CASE("verifier report") {
    const TestFunctionSpec spec = TestFunctionSpec::standard();
    const VerifierRow row = verify_trajectory(synthetic(0.1, 64, 16, inner_circle), spec);
    CHECK(row.eps == 0.1);
    CHECK(row.W12_gap > 0.0);
    CHECK(row.grad_eta_max > 0.0);
    const std::string csv = verifier_csv({row});
    CHECK(csv.rfind("eps,W12_gap,grad_eta_max,hess_eta_max,weak_residual,res_convective,res_timederiv\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    const SolverConfig c = weak_test_config(0.1, 64, 20);
    CHECK_FALSE(c.path.clockwise);
    CHECK(c.path.radius == 0.15);
    CHECK(c.params.m == 1.0);
}
