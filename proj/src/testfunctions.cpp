/// @file testfunctions.cpp
#include "lmfsi/testfunctions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lmfsi/constitutive.hpp"
#include "lmfsi/errors.hpp"

namespace lmfsi {

BodyPath path_of(const PrescribedPath& path) {
    return [path](double t) { return path.position(t); };
}

BodyPath path_of(const Trajectory& tr) {
    std::vector<double> ts;
    std::vector<Vec2> hs;
    for (const Snapshot& s : tr.snapshots) {
        ts.push_back(s.t);
        hs.push_back(s.body.h);
    }
    if (ts.empty()) throw DiagnosticError("trajectory has no snapshots");
    return [ts, hs](double t) {
        if (t <= ts.front()) return hs.front();
        if (t >= ts.back()) return hs.back();
        const auto k = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
        const double w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
        return hs[k - 1] + w * (hs[k] - hs[k - 1]);
    };
}

// ============================================================================
// Spec
// ============================================================================

TestFunctionSpec TestFunctionSpec::standard(double L, double delta) {
    TestFunctionSpec s;
    s.delta = delta;
    s.side_length = L;
    const double a = 2.0 * delta, b = L - 2.0 * delta;
    const double half = 0.5 * (b - a);
    const double peak = std::pow(half * half, 3);
    s.psi = [a, b, peak](double x, double y) {
        if (x <= a || x >= b || y <= a || y >= b) return 0.0;
        const double bx = (x - a) * (b - x), by = (y - a) * (b - y);
        return (bx * bx * bx / peak) * (by * by * by / peak);
    };
    s.alpha_rule = alpha_of_eps;
    return s;
}

void TestFunctionSpec::validate() const {
    if (!psi) throw DomainError("test function spec has no stream function");
    if (!alpha_rule) throw DomainError("test function spec has no alpha rule");
    if (!(side_length > 0.0)) throw DomainError("side length must be positive");
    if (!(delta > 0.0 && delta < 0.25 * side_length)) throw DomainError("delta must lie in (0, L/4)");
    if (!(smoothing > 0.0 && smoothing < 0.5)) throw DomainError("smoothing must lie in (0, 1/2)");
}

double TestFunctionSpec::alpha(double eps) const { return alpha_rule(eps); }

double alpha_of_eps(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("alpha_of_eps: eps must lie in (0, 1)");
    return 1.0 / std::sqrt(eps);
}

// ============================================================================
// Cutoff
// ============================================================================

namespace {

/// Cubic Hermite on [a, a + w] from (p0, m0) to (p1, m1).
RadialValue hermite(double r, double a, double w, double p0, double m0, double p1, double m1) {
    const double s = (r - a) / w, s2 = s * s, s3 = s2 * s;
    const double v = (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * w * m0 + (-2 * s3 + 3 * s2) * p1 +
                     (s3 - s2) * w * m1;
    const double d = ((6 * s2 - 6 * s) * p0 + (3 * s2 - 4 * s + 1) * w * m0 + (-6 * s2 + 6 * s) * p1 +
                      (3 * s2 - 2 * s) * w * m1) / w;
    const double dd = ((12 * s - 6) * p0 + (6 * s - 4) * w * m0 + (-12 * s + 6) * p1 + (6 * s - 2) * w * m1) /
                      (w * w);
    return {v, d, dd};
}

} // namespace

RadialValue cutoff_profile(double r, double eps, double alpha, double smoothing) {
    if (!(alpha > 1.0)) throw DomainError("cutoff_eta: alpha must exceed 1");
    if (!(eps > 0.0)) throw DomainError("cutoff_eta: eps must be positive");
    const double r0 = eps, r1 = alpha * eps, la = std::log(alpha);
    if (r <= r0) return {0.0, 0.0, 0.0};
    if (r >= r1) return {1.0, 0.0, 0.0};
    const double w = smoothing * (r1 - r0);
    auto f = [&](double x) { return std::log(x / eps) / la; };
    auto f1 = [&](double x) { return 1.0 / (x * la); };
    RadialValue v;
    if (r < r0 + w)
        v = hermite(r, r0, w, 0.0, 0.0, f(r0 + w), f1(r0 + w));
    else if (r > r1 - w)
        v = hermite(r, r1 - w, w, f(r1 - w), f1(r1 - w), 1.0, 0.0);
    else
        v = {f(r), f1(r), -1.0 / (r * r * la)};
    v.value = std::clamp(v.value, 0.0, 1.0);
    return v;
}

double cutoff_eta(Vec2 y, double eps, double alpha, double smoothing) {
    return cutoff_profile(y.norm(), eps, alpha, smoothing).value;
}

EtaBounds eta_bounds(double eps, double alpha, double smoothing, int samples) {
    EtaBounds b;
    const double r0 = eps, r1 = alpha * eps;
    for (int k = 0; k <= samples; ++k) {
        const double r = r0 + (r1 - r0) * k / samples;
        const RadialValue v = cutoff_profile(r, eps, alpha, smoothing);
        b.grad_max = std::max(b.grad_max, std::abs(v.d1));
        b.hess_max = std::max({b.hess_max, std::abs(v.d2), std::abs(v.d1) / r});
    }
    return b;
}

// ============================================================================
// Test fields
// ============================================================================

VectorField phi_plain(const GridSpec& grid, const TestFunctionSpec& spec) {
    spec.validate();
    return perp_gradient(NodeField::sample(grid, spec.psi));
}

VectorField phi_tilde(double t, const GridSpec& grid, const TestFunctionSpec& spec, double eps,
                      const BodyPath& path) {
    spec.validate();
    const Vec2 h = path(t);
    const double psi_h = spec.psi(h.x, h.y);
    const double alpha = spec.alpha(eps);
    const NodeField shifted = NodeField::sample(grid, [&](double x, double y) {
        const double eta = cutoff_eta(Vec2{x, y} - h, eps, alpha, spec.smoothing);
        return eta == 0.0 ? 0.0 : eta * (spec.psi(x, y) - psi_h);
    });
    return perp_gradient(shifted);
}

double h_delta(double z, double delta) {
    if (!(delta > 0.0)) throw DomainError("H_delta: delta must be positive");
    return std::clamp((z - 0.5 * delta) / (0.5 * delta), 0.0, 1.0);
}

double chi_eps(double t, double delta, const BodyPath& path, double side_length) {
    return h_delta(distance_to_boundary(path(t), side_length), delta);
}

VectorField phi_eps(double t, const GridSpec& grid, const TestFunctionSpec& spec, double eps, const BodyPath& path) {
    const double chi = chi_eps(t, spec.delta, path, spec.side_length);
    if (chi == 1.0) return phi_tilde(t, grid, spec, eps, path);
    if (chi == 0.0) return phi_plain(grid, spec);
    return chi * phi_tilde(t, grid, spec, eps, path) + (1.0 - chi) * phi_plain(grid, spec);
}

double w12_gap(double t, const GridSpec& grid, const TestFunctionSpec& spec, double eps, const BodyPath& path) {
    return norm_W12(phi_tilde(t, grid, spec, eps, path) - phi_plain(grid, spec));
}

FieldChecks field_checks(const VectorField& phi, Vec2 c, double eps) {
    const GridSpec& g = phi.grid();
    const int n = g.nx;
    const double h = g.h();
    FieldChecks r;
    for (double d : divergence(phi).data()) r.div_max = std::max(r.div_max, std::abs(d));
    auto inside = [&](int i, int j) { return (Vec2{i * h, j * h} - c).norm() <= eps; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (!(inside(i, j) && inside(i + 1, j) && inside(i, j + 1) && inside(i + 1, j + 1))) continue;
            r.body_max = std::max({r.body_max, std::abs(phi.x(i, j)), std::abs(phi.x(i + 1, j)),
                                   std::abs(phi.y(i, j)), std::abs(phi.y(i, j + 1))});
        }
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= n; ++i)
            if (i <= 1 || i >= n - 1 || j == 0 || j == n - 1) r.boundary_max = std::max(r.boundary_max, std::abs(phi.x(i, j)));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i < n; ++i)
            if (j <= 1 || j >= n - 1 || i == 0 || i == n - 1) r.boundary_max = std::max(r.boundary_max, std::abs(phi.y(i, j)));
    return r;
}

double test_envelope(double t, double T) {
    const double c = std::cos(0.5 * M_PI * t / T);
    return c * c;
}

// ============================================================================
// Space-time functionals
// ============================================================================

namespace {

double envelope_rate(double t, double T) { return -(0.5 * M_PI / T) * std::sin(M_PI * t / T); }

/// Face values with no-slip ghosts (odd reflection across walls).
struct Odd {
    const VectorField& v;
    int n;
    double x(int i, int j) const {
        if (j < 0) return -v.x(i, 0);
        if (j >= n) return -v.x(i, n - 1);
        return v.x(i, j);
    }
    double y(int i, int j) const {
        if (i < 0) return -v.y(0, j);
        if (i >= n) return -v.y(n - 1, j);
        return v.y(i, j);
    }
};

/// Velocity gradient of a face field: diagonal at centers, off-diagonal at nodes.
struct FaceGradient {
    std::vector<double> dxx, dyy;  ///< n*n centers
    std::vector<double> dyx, dxy;  ///< (n+1)^2 nodes: d_y v_x and d_x v_y
};

FaceGradient face_gradient(const VectorField& v) {
    const int n = v.grid().nx;
    const double ih = 1.0 / v.grid().h();
    const Odd o{v, n};
    FaceGradient g;
    g.dxx.resize(static_cast<std::size_t>(n) * n);
    g.dyy.resize(g.dxx.size());
    g.dyx.resize(static_cast<std::size_t>(n + 1) * (n + 1));
    g.dxy.resize(g.dyx.size());
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            g.dxx[j * n + i] = (v.x(i + 1, j) - v.x(i, j)) * ih;
            g.dyy[j * n + i] = (v.y(i, j + 1) - v.y(i, j)) * ih;
        }
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            g.dyx[j * (n + 1) + i] = (o.x(i, j) - o.x(i, j - 1)) * ih;
            g.dxy[j * (n + 1) + i] = (o.y(i, j) - o.y(i - 1, j)) * ih;
        }
    return g;
}

double node_density(const ScalarField& rho, int i, int j) {
    const int n = rho.nx();
    double s = 0.0;
    int c = 0;
    for (int b = j - 1; b <= j; ++b)
        for (int a = i - 1; a <= i; ++a)
            if (a >= 0 && a < n && b >= 0 && b < n) {
                s += rho(a, b);
                ++c;
            }
    return s / c;
}

/// sum over interior faces of rho_f u . w h^2
double momentum_pairing(const ScalarField& rho, const VectorField& u, const VectorField& w) {
    const int n = rho.nx();
    double s = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 1; i < n; ++i) s += 0.5 * (rho(i - 1, j) + rho(i, j)) * u.x(i, j) * w.x(i, j);
    for (int j = 1; j < n; ++j)
        for (int i = 0; i < n; ++i) s += 0.5 * (rho(i, j - 1) + rho(i, j)) * u.y(i, j) * w.y(i, j);
    const double h = rho.grid().h();
    return s * h * h;
}

/// Spatial integrand of the weak momentum form without the time-derivative pairing.
double flux_pairing(const ScalarField& rho, const VectorField& u, const VectorField& phi, const FluidParams& fp) {
    const int n = rho.nx();
    const double h = rho.grid().h();
    const Odd o{u, n};
    const FaceGradient gu = face_gradient(u), gp = face_gradient(phi);
    const double ps = fp.pressure_scale(), p_bar = pressure(fp.rho_bar, fp);
    double conv = 0.0, visc = 0.0, bulk = 0.0, pres = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const std::size_t c = static_cast<std::size_t>(j) * n + i;
            const double ucx = 0.5 * (u.x(i, j) + u.x(i + 1, j)), ucy = 0.5 * (u.y(i, j) + u.y(i, j + 1));
            conv += rho(i, j) * (ucx * ucx * gp.dxx[c] + ucy * ucy * gp.dyy[c]);
            visc += gu.dxx[c] * gp.dxx[c] + gu.dyy[c] * gp.dyy[c];
            const double div_u = gu.dxx[c] + gu.dyy[c], div_p = gp.dxx[c] + gp.dyy[c];
            bulk += div_u * div_p;
            pres += (pressure(rho(i, j), fp) - p_bar) * div_p;
        }
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            const std::size_t k = static_cast<std::size_t>(j) * (n + 1) + i;
            const double gphi = gp.dyx[k] + gp.dxy[k];
            visc += gu.dyx[k] * gp.dyx[k] + gu.dxy[k] * gp.dxy[k];
            if (gphi == 0.0) continue;
            const double uxn = 0.5 * (o.x(i, j - 1) + o.x(i, j)), uyn = 0.5 * (o.y(i - 1, j) + o.y(i, j));
            conv += node_density(rho, i, j) * uxn * uyn * gphi;
        }
    return (conv - fp.mu * visc - fp.lambda * bulk + ps * pres) * h * h;
}

void check_trajectory(const Trajectory& tr) {
    const auto& s = tr.snapshots;
    if (s.size() < 16) {
        std::ostringstream os;
        os << "snapshot stride too coarse: " << s.size() << " snapshots, at least 16 required";
        throw DiagnosticError(os.str());
    }
    const double dt = s[1].t - s[0].t;
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (std::abs(s[k].t - s[k - 1].t - dt) > 1e-9 * dt) throw DiagnosticError("snapshot stride is not uniform");
        if (s[k].rho.data().empty() || s[k].u.xs().empty())
            throw DiagnosticError("trajectory snapshots carry no fields");
    }
    if (s[0].rho.data().empty()) throw DiagnosticError("trajectory snapshots carry no fields");
}

/// phi_eps at every snapshot time and its centered time differences.
struct FieldSeries {
    std::vector<VectorField> phi, dphi;
};

FieldSeries test_series(const Trajectory& tr, const TestFunctionSpec& spec, TestField field) {
    const GridSpec& g = tr.config.grid;
    const double eps = tr.config.params.eps;
    const BodyPath path = path_of(tr);
    FieldSeries fs;
    const std::size_t N = tr.snapshots.size();
    for (const Snapshot& s : tr.snapshots)
        fs.phi.push_back(field == TestField::admissible ? phi_eps(s.t, g, spec, eps, path) : phi_plain(g, spec));
    for (std::size_t k = 0; k < N; ++k) {
        const std::size_t a = k == 0 ? 0 : k - 1, b = k + 1 == N ? k : k + 1;
        const double inv = 1.0 / (tr.snapshots[b].t - tr.snapshots[a].t);
        fs.dphi.push_back(inv * (fs.phi[b] - fs.phi[a]));
    }
    return fs;
}

double trapezoid(const std::vector<double>& f, double dt) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < f.size(); ++k) s += 0.5 * (f[k] + f[k + 1]) * dt;
    return s;
}

} // namespace

double weak_momentum_residual(const Trajectory& tr, const TestFunctionSpec& spec, TestField field) {
    check_trajectory(tr);
    const FluidParams& fp = tr.config.params;
    const FieldSeries fs = test_series(tr, spec, field);
    const double T = tr.snapshots.back().t;
    const double dt = tr.snapshots[1].t - tr.snapshots[0].t;
    std::vector<double> integrand;
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
        const Snapshot& s = tr.snapshots[k];
        const double th = test_envelope(s.t, T), thp = envelope_rate(s.t, T);
        const double time_part = th * momentum_pairing(s.rho, s.u, fs.dphi[k]) +
                                 thp * momentum_pairing(s.rho, s.u, fs.phi[k]);
        integrand.push_back(time_part + th * flux_pairing(s.rho, s.u, fs.phi[k], fp));
    }
    const Snapshot& s0 = tr.snapshots.front();
    const double initial = test_envelope(s0.t, T) * momentum_pairing(s0.rho, s0.u, fs.phi.front());
    return std::abs(trapezoid(integrand, dt) + initial);
}

RemainderReport remainder_terms(const Trajectory& tr, const TestFunctionSpec& spec) {
    check_trajectory(tr);
    const FluidParams& fp = tr.config.params;
    const GridSpec& g = tr.config.grid;
    const int n = g.nx;
    const double h2 = g.h() * g.h();
    const double eps = fp.eps, alpha = spec.alpha(eps);
    const FieldSeries fs = test_series(tr, spec, TestField::admissible);
    const double dt = tr.snapshots[1].t - tr.snapshots[0].t;

    RemainderReport r;
    std::vector<double> conv, tder;
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
        const Snapshot& s = tr.snapshots[k];
        const FaceGradient gp = face_gradient(fs.phi[k]);
        const VectorField& dp = fs.dphi[k];
        double c_sum = 0.0, t_sum = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const std::size_t c = static_cast<std::size_t>(j) * n + i;
                auto node = [&](const std::vector<double>& v) {
                    const std::size_t b = static_cast<std::size_t>(j) * (n + 1) + i;
                    return 0.25 * (v[b] + v[b + 1] + v[b + n + 1] + v[b + n + 2]);
                };
                const double oyx = node(gp.dyx), oxy = node(gp.dxy);
                const double grad = std::sqrt(gp.dxx[c] * gp.dxx[c] + gp.dyy[c] * gp.dyy[c] + oyx * oyx + oxy * oxy);
                r.grad_bound = std::max(r.grad_bound, grad);
                const double ux = 0.5 * (s.u.x(i, j) + s.u.x(i + 1, j)), uy = 0.5 * (s.u.y(i, j) + s.u.y(i, j + 1));
                const double u2 = ux * ux + uy * uy;
                const double rho = s.rho(i, j);
                const bool essential = rho >= 0.5 * fp.rho_bar && rho <= 2.0 * fp.rho_bar;
                if (!essential) c_sum += std::abs(rho) * u2 * grad;
                const double tx = 0.5 * (dp.x(i, j) + dp.x(i + 1, j)), ty = 0.5 * (dp.y(i, j) + dp.y(i, j + 1));
                t_sum += std::abs(rho - fp.rho_bar) * std::sqrt(u2) * std::sqrt(tx * tx + ty * ty);
            }
        r.timederiv_bound = std::max(r.timederiv_bound, dp.max_abs());
        conv.push_back(c_sum * h2);
        tder.push_back(t_sum * h2);
    }
    r.res_convective = trapezoid(conv, dt);
    r.res_timederiv = trapezoid(tder, dt);
    r.predicted_grad_scale = eta_bounds(eps, alpha, spec.smoothing).hess_max + 1.0;
    r.predicted_density_scale = std::pow(eps, std::min(fp.m, 2.0 * fp.m / fp.gamma));
    const BodyPath path = path_of(tr);
    const std::size_t N = tr.snapshots.size();
    for (std::size_t k = 0; k < N; ++k) {
        const std::size_t a = k == 0 ? 0 : k - 1, b = k + 1 == N ? k : k + 1;
        const double ta = tr.snapshots[a].t, tb = tr.snapshots[b].t;
        const double chi_p = (chi_eps(tb, spec.delta, path, spec.side_length) -
                              chi_eps(ta, spec.delta, path, spec.side_length)) / (tb - ta);
        r.chi_prime_term = std::max(r.chi_prime_term, chi_p * chi_p * eps * eps * alpha * alpha);
    }
    return r;
}

// ============================================================================
// Report
// ============================================================================

SolverConfig weak_test_config(double eps, int n, int snapshots, double t_end) {
    SolverConfig c;
    c.params.a = 0.5;
    c.params.eps = eps;
    c.params.m = 1.0;
    c.grid = GridSpec::square(n);
    c.t_end = t_end;
    c.snapshots = snapshots;
    c.path = PrescribedPath{{0.5, 0.5}, 0.15, 0.5, false, 0.0};
    return c;
}

VerifierRow verify_trajectory(const Trajectory& tr, const TestFunctionSpec& spec) {
    const double eps = tr.config.params.eps, alpha = spec.alpha(eps);
    VerifierRow row;
    row.eps = eps;
    const BodyPath path = path_of(tr);
    for (const Snapshot& s : tr.snapshots)
        row.W12_gap = std::max(row.W12_gap, w12_gap(s.t, tr.config.grid, spec, eps, path));
    const EtaBounds b = eta_bounds(eps, alpha, spec.smoothing);
    row.grad_eta_max = b.grad_max;
    row.hess_eta_max = b.hess_max;
    row.weak_residual = weak_momentum_residual(tr, spec);
    const RemainderReport r = remainder_terms(tr, spec);
    row.res_convective = r.res_convective;
    row.res_timederiv = r.res_timederiv;
    return row;
}

std::string verifier_csv(const std::vector<VerifierRow>& rows) {
    std::string out = "eps,W12_gap,grad_eta_max,hess_eta_max,weak_residual,res_convective,res_timederiv\n";
    char buf[512];
    for (const VerifierRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.eps, r.W12_gap,
                      r.grad_eta_max, r.hess_eta_max, r.weak_residual, r.res_convective, r.res_timederiv);
        out += buf;
    }
    return out;
}

} // namespace lmfsi
