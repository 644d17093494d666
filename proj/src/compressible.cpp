/// @file compressible.cpp
#include "lmfsi/compressible.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "lmfsi/errors.hpp"

namespace lmfsi {

// ============================================================================
// Path, body, config
// ============================================================================

namespace {

double angular_rate(const PrescribedPath& p) { return (p.clockwise ? -2.0 : 2.0) * M_PI / p.period; }

} // namespace

Vec2 PrescribedPath::position(double t) const {
    const double th = phase + angular_rate(*this) * t;
    return center + radius * Vec2{std::cos(th), std::sin(th)};
}

Vec2 PrescribedPath::velocity(double t) const {
    const double w = angular_rate(*this);
    const double th = phase + w * t;
    return radius * w * Vec2{-std::sin(th), std::cos(th)};
}

double PrescribedPath::speed() const { return radius * std::abs(angular_rate(*this)); }

PrescribedPath PrescribedPath::stationary(Vec2 at) { return {at, 0.0, 1.0, true, 0.0}; }

PrescribedPath PrescribedPath::circle(double side_length, double period) {
    return {{0.5 * side_length, 0.5 * side_length}, 0.25 * side_length, period, true, 0.0};
}

PrescribedPath PrescribedPath::grazing(double side_length, double eps, double period) {
    return {{0.5 * side_length, 0.5 * side_length}, 0.5 * side_length - 0.5 * eps, period, true, 0.0};
}

void BodyState::validate() const {
    if (!(mass > 0.0)) throw InvalidStateError("body mass must be > 0");
    if (!(inertia > 0.0)) throw InvalidStateError("body inertia must be > 0");
    if (!(radius > 0.0)) throw InvalidStateError("body radius must be > 0");
}

void SolverConfig::validate() const {
    params.validate();
    try {
        grid.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    auto fail = [](const std::string& what) { throw ConfigError("solver: " + what); };
    if (!(dt_safety > 0.0 && dt_safety <= 1.0)) fail("dt_safety must lie in (0, 1]");
    if (!(penalization_eta > 0.0)) fail("penalization_eta must be > 0");
    if (!(t_end > 0.0)) fail("t_end must be > 0");
    if (snapshots < 1) fail("snapshots must be >= 1");
    if (!(body_density_exponent >= 0.0)) fail("body_density_exponent must be >= 0");
    if (!(path.period > 0.0) || !(path.radius >= 0.0)) fail("path period must be > 0 and radius >= 0");
    if (!(density_perturbation >= 0.0 && density_perturbation < 1.0)) fail("density_perturbation must lie in [0, 1)");
    if (!std::isfinite(stream_amplitude)) fail("stream amplitude must be finite");
}

double SolverConfig::body_mass() const {
    return M_PI * params.rho_bar * std::pow(params.eps, -body_density_exponent);
}

double SolverConfig::body_inertia() const { return 0.5 * body_mass() * params.eps * params.eps; }

// ============================================================================
// Stepper
// ============================================================================

namespace {

/// Index range of points within radius + 2h of c, clipped to [lo, hi].
void span(double c, double reach, double h, int lo, int hi, int& a, int& b) {
    a = std::max(lo, static_cast<int>(std::floor((c - reach) / h)) - 1);
    b = std::min(hi, static_cast<int>(std::ceil((c + reach) / h)) + 1);
}

/// Limited upwind value at a transport face between velocity samples a (behind)
/// and b (ahead); aa lies beyond a, bb beyond b.
inline double face_value(double flux, double a, double b, double aa, double bb) {
    const bool pos = flux >= 0.0;
    const double up = pos ? a : b;
    const double dn = pos ? b : a;
    const double uu = pos ? aa : bb;
    const double d1 = up - uu, d2 = dn - up;
    const double lim = std::abs(d1) < std::abs(d2) ? d1 : d2;
    return up + (d1 * d2 > 0.0 ? 0.5 * lim : 0.0);
}

/// Velocity-form rate of a row of y faces between cell rows l (below) and u (above).
void y_row_rates(int n, double ih, double ih2, double mu, double lam, double ps, const double* __restrict v,
                 const double* __restrict gc1, const double* __restrict gc0, const double* __restrict gn,
                 const double* __restrict mc1, const double* __restrict mc0, const double* __restrict mn,
                 const double* __restrict Dl, const double* __restrict Du, const double* __restrict Pl,
                 const double* __restrict Pu, const double* __restrict Rl, const double* __restrict Ru,
                 double* __restrict out) {
    const double* vup = v + n;
    const double* vdn = v - n;
    auto rate = [&](int i, double vw, double ve) {
        const double conv = ih * (gc1[i] - gc0[i] + gn[i + 1] - gn[i]) - v[i] * ih * (mc1[i] - mc0[i] + mn[i + 1] - mn[i]);
        const double lap = ih2 * (ve + vw + vup[i] + vdn[i] - 4.0 * v[i]);
        const double visc = mu * lap + lam * ih * (Du[i] - Dl[i]);
        return (-conv - ps * ih * (Pu[i] - Pl[i]) + visc) / (0.5 * (Rl[i] + Ru[i]));
    };
    out[0] = rate(0, -v[0], v[1]);
    for (int i = 1; i < n - 1; ++i) out[i] = rate(i, v[i - 1], v[i + 1]);
    out[n - 1] = rate(n - 1, v[n - 2], -v[n - 1]);
}

struct Kinematics {
    Vec2 h, v;
    double omega = 0.0;
    double radius = 0.0;
    Vec2 rigid(Vec2 x) const { return v + omega * (x - h).perp(); }
};

} // namespace

struct CompressibleSolver::Impl {
    int n = 0;
    double h = 0.0;
    FluidParams fp;
    double inv_eta = 0.0;
    double pscale = 0.0;
    double inv_eps_m = 0.0;
    bool gamma2 = true;

    // first sweep: cell thermodynamics, mass fluxes, velocity divergence
    std::vector<double> p, cs, pp, fx, fy, dv;
    // midpoint state
    std::vector<double> rho1, ux1, uy1;
    // rolling row buffers of the second sweep
    std::vector<double> gcx, mcx, gnx0, mnx0, gnx1, mnx1, gcy0, mcy0, gcy1, mcy1, gny, mny, rate;

    struct Pen {
        std::size_t index;  ///< into the x or y face array
        bool y;
        double weight;
        double rigid;       ///< rigid velocity component at the face
        Vec2 arm;           ///< (x - h)^perp
    };
    std::vector<Pen> pens;

    explicit Impl(const SolverConfig& c) {
        n = c.grid.nx;
        h = c.grid.h();
        fp = c.params;
        inv_eta = 1.0 / c.penalization_eta;
        pscale = fp.pressure_scale();
        inv_eps_m = std::pow(fp.eps, -fp.m);
        gamma2 = fp.gamma == 2.0;
        const std::size_t N = static_cast<std::size_t>(n) * n;
        const std::size_t NF = static_cast<std::size_t>(n + 1) * n;
        for (auto* v : {&p, &cs, &pp, &dv, &rho1}) v->assign(N, 0.0);
        for (auto* v : {&fx, &fy, &ux1, &uy1}) v->assign(NF, 0.0);
        for (auto* v : {&gcx, &mcx, &gcy0, &mcy0, &gcy1, &mcy1, &rate}) v->assign(n, 0.0);
        for (auto* v : {&gnx0, &mnx0, &gnx1, &mnx1, &gny, &mny}) v->assign(n + 1, 0.0);
    }

    /// out = base + coef * (fluid part of the time derivative at `in`).
    /// out may alias base but not in.
    template <bool G2>
    void sweep(const double* rho, const double* ux, const double* uy, const double* rb, const double* ub,
               const double* vb, double coef, double* ro, double* uo, double* vo);

    void fluid_update(const double* rho, const double* ux, const double* uy, const double* rb, const double* ub,
                      const double* vb, double coef, double* ro, double* uo, double* vo) {
        if (gamma2)
            sweep<true>(rho, ux, uy, rb, ub, vb, coef, ro, uo, vo);
        else
            sweep<false>(rho, ux, uy, rb, ub, vb, coef, ro, uo, vo);
    }

    /// Penalized faces (wall faces excluded) for the given body kinematics.
    void collect_pens(const Kinematics& body);

    /// out += coef * pen(in) on the penalized faces; returns force and torque on the body.
    ExchangeForce penalize(const double* rho, const double* ux, const double* uy, double coef, double* uo, double* vo,
                           std::vector<double>* values) const;

    /// mu |grad u|^2 + lambda |div u|^2 summed with h^2; dv must hold div u.
    double dissipation_rate(const double* ux, const double* uy) const;

    double relative_energy_fast(double r) const {
        if (gamma2) {
            const double d = r - fp.rho_bar;
            return fp.a * d * d;
        }
        return relative_energy(std::max(r, 0.0), fp);
    }

    /// sum mask * relative energy over the body box (unscaled).
    double body_relative_energy(const double* rho, const Kinematics& body) const;

    double face_density(const double* rho, const Pen& pn) const {
        if (pn.y) return 0.5 * (rho[pn.index - n] + rho[pn.index]);
        const std::size_t c = (pn.index / (n + 1)) * n + pn.index % (n + 1);
        return 0.5 * (rho[c - 1] + rho[c]);
    }
};

double CompressibleSolver::Impl::body_relative_energy(const double* rho, const Kinematics& body) const {
    int i0, i1, j0, j1;
    span(body.h.x, body.radius + h, h, 0, n - 1, i0, i1);
    span(body.h.y, body.radius + h, h, 0, n - 1, j0, j1);
    double s = 0.0;
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            const double w = mask_weight((Vec2{(i + 0.5) * h, (j + 0.5) * h} - body.h).norm() - body.radius, h);
            if (w > 0.0) s += w * relative_energy_fast(rho[static_cast<std::size_t>(j) * n + i]);
        }
    return s * h * h;
}

void CompressibleSolver::Impl::collect_pens(const Kinematics& body) {
    pens.clear();
    const double reach = body.radius + h;
    int i0, i1, j0, j1;
    span(body.h.x, reach, h, 1, n - 1, i0, i1);
    span(body.h.y, reach, h, 0, n - 1, j0, j1);
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            const Vec2 x{i * h, (j + 0.5) * h};
            const double w = mask_weight((x - body.h).norm() - body.radius, h);
            if (w > 0.0)
                pens.push_back({static_cast<std::size_t>(j) * (n + 1) + i, false, w, body.rigid(x).x, (x - body.h).perp()});
        }
    span(body.h.x, reach, h, 0, n - 1, i0, i1);
    span(body.h.y, reach, h, 1, n - 1, j0, j1);
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            const Vec2 x{(i + 0.5) * h, j * h};
            const double w = mask_weight((x - body.h).norm() - body.radius, h);
            if (w > 0.0)
                pens.push_back({static_cast<std::size_t>(j) * n + i, true, w, body.rigid(x).y, (x - body.h).perp()});
        }
}

ExchangeForce CompressibleSolver::Impl::penalize(const double* rho, const double* ux, const double* uy, double coef,
                                                double* uo, double* vo, std::vector<double>* values) const {
    ExchangeForce f;
    if (values) values->clear();
    for (const Pen& pn : pens) {
        const double u = pn.y ? uy[pn.index] : ux[pn.index];
        const double pen = -pn.weight * inv_eta * (u - pn.rigid);
        (pn.y ? vo : uo)[pn.index] += coef * pen;
        if (values) values->push_back(pen);
        const double m = -face_density(rho, pn) * pen * h * h;
        if (pn.y) {
            f.force.y += m;
            f.torque += m * pn.arm.y;
        } else {
            f.force.x += m;
            f.torque += m * pn.arm.x;
        }
    }
    return f;
}

double CompressibleSolver::Impl::dissipation_rate(const double* ux, const double* uy) const {
    // -sum u . (mu lap u + lam grad div u) h^2, by summation by parts with the no-slip ghosts
    const int n1 = n + 1;
    double g2 = 0.0;
    for (int j = 0; j < n; ++j) {
        const double* u = ux + static_cast<std::size_t>(j) * n1;
        for (int i = 0; i < n; ++i) g2 += (u[i + 1] - u[i]) * (u[i + 1] - u[i]);
        if (j + 1 < n)
            for (int i = 1; i < n; ++i) g2 += (u[i + n1] - u[i]) * (u[i + n1] - u[i]);
        if (j == 0 || j == n - 1)
            for (int i = 1; i < n; ++i) g2 += 2.0 * u[i] * u[i];
    }
    for (int j = 0; j < n; ++j) {
        const double* v = uy + static_cast<std::size_t>(j) * n;
        for (int i = 0; i < n; ++i) g2 += (v[i + n] - v[i]) * (v[i + n] - v[i]);
    }
    for (int j = 1; j < n; ++j) {
        const double* v = uy + static_cast<std::size_t>(j) * n;
        for (int i = 0; i + 1 < n; ++i) g2 += (v[i + 1] - v[i]) * (v[i + 1] - v[i]);
        g2 += 2.0 * v[0] * v[0] + 2.0 * v[n - 1] * v[n - 1];
    }
    double d2 = 0.0;
    for (double d : dv) d2 += d * d;
    return fp.mu * g2 + fp.lambda * d2 * h * h;
}

template <bool G2>
void CompressibleSolver::Impl::sweep(const double* __restrict rho, const double* __restrict ux,
                                     const double* __restrict uy, const double* rb, const double* ub,
                                     const double* vb, double coef, double* ro, double* uo, double* vo) {
    const int n1 = n + 1;
    const double ih = 1.0 / h;
    const double ih2 = ih * ih;
    const double a = fp.a;
    const double mu = fp.mu;
    const double lam = fp.lambda;
    const double ps = pscale;
    const double ce = inv_eps_m;
    const double pc = a * fp.gamma / (fp.gamma - 1.0);
    const double g1 = fp.gamma - 1.0;

    double* __restrict P = p.data();
    double* __restrict C = cs.data();
    double* __restrict PP = pp.data();
    double* __restrict FX = fx.data();
    double* __restrict FY = fy.data();
    double* __restrict DV = dv.data();

    // mass flux with the density that makes the pressure work exact
    auto flux = [&](std::size_t l, std::size_t r, double u) {
        double rs = 0.5 * (rho[l] + rho[r]);
        if constexpr (!G2) {
            const double dP = PP[r] - PP[l];
            if (std::abs(dP) > 1e-12 * PP[l]) rs = (P[r] - P[l]) / dP;
        }
        const double s = std::abs(u) + std::max(C[l], C[r]);
        return rs * u - 0.5 * s * (rho[r] - rho[l]);
    };

    // ---- sweep 1 ----
    for (int j = 0; j < n; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * n;
        const double* R = rho + row;
        double* Pr = P + row;
        double* Cr = C + row;
        if constexpr (G2) {
            const double c2 = 2.0 * a;
            for (int i = 0; i < n; ++i) {
                const double r = std::max(R[i], 0.0);
                Pr[i] = a * r * r;
                Cr[i] = std::sqrt(c2 * r) * ce;
            }
        } else {
            double* PPr = PP + row;
            for (int i = 0; i < n; ++i) {
                const double r = std::max(R[i], 0.0);
                const double rg1 = std::pow(r, g1);
                Pr[i] = a * rg1 * r;
                Cr[i] = std::sqrt(a * fp.gamma * rg1) * ce;
                PPr[i] = pc * rg1;
            }
        }
        const double* u = ux + static_cast<std::size_t>(j) * n1;
        double* Fx = FX + static_cast<std::size_t>(j) * n1;
        for (int i = 1; i < n; ++i) Fx[i] = flux(row + i - 1, row + i, u[i]);
        if (j > 0) {
            const double* v = uy + row;
            double* Fy = FY + row;
            const std::size_t lo = row - n;
            for (int i = 0; i < n; ++i) Fy[i] = flux(lo + i, row + i, v[i]);
        }
        const double* vs = uy + row;
        const double* vn = vs + n;
        double* D = DV + row;
        for (int i = 0; i < n; ++i) D[i] = ih * (u[i + 1] - u[i] + vn[i] - vs[i]);
    }

    // ---- sweep 2 ----
    double* __restrict GCX = gcx.data();
    double* __restrict MCX = mcx.data();
    double* __restrict GNY = gny.data();
    double* __restrict MNY = mny.data();
    double* GNc = gnx0.data();
    double* MNc = mnx0.data();
    double* GNn = gnx1.data();
    double* MNn = mnx1.data();
    double* GYp = gcy0.data();
    double* MYp = mcy0.data();
    double* GYc = gcy1.data();
    double* MYc = mcy1.data();
    std::fill(gnx0.begin(), gnx0.end(), 0.0);
    std::fill(mnx0.begin(), mnx0.end(), 0.0);

    for (int j = 0; j < n; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * n;
        const double* u = ux + static_cast<std::size_t>(j) * n1;

        // x-momentum: transport through cell centers of row j
        {
            const double* F = FX + static_cast<std::size_t>(j) * n1;
            auto put = [&](int i, double aa, double bb) {
                const double f = 0.5 * (F[i] + F[i + 1]);
                MCX[i] = f;
                GCX[i] = f * face_value(f, u[i], u[i + 1], aa, bb);
            };
            put(0, -u[1], u[2]);
            for (int i = 1; i < n - 1; ++i) put(i, u[i - 1], u[i + 2]);
            put(n - 1, u[n - 2], -u[n - 1]);
        }
        // x-momentum: transport through node row j + 1
        if (j + 1 < n) {
            const int jn = j + 1;
            const double* Fy = FY + static_cast<std::size_t>(jn) * n;
            const double* ubl = ux + static_cast<std::size_t>(jn - 1) * n1;
            const double* ual = ux + static_cast<std::size_t>(jn) * n1;
            const double* ubb = jn >= 2 ? ux + static_cast<std::size_t>(jn - 2) * n1 : ubl;
            const double* uaa = jn + 1 < n ? ux + static_cast<std::size_t>(jn + 1) * n1 : ual;
            const double sb = jn >= 2 ? 1.0 : -1.0;
            const double sa = jn + 1 < n ? 1.0 : -1.0;
            for (int i = 1; i < n; ++i) {
                const double f = 0.5 * (Fy[i - 1] + Fy[i]);
                MNn[i] = f;
                GNn[i] = f * face_value(f, ubl[i], ual[i], sb * ubb[i], sa * uaa[i]);
            }
        } else {
            std::fill_n(GNn, n1, 0.0);
            std::fill_n(MNn, n1, 0.0);
        }
        // x-momentum update of face row j
        {
            const double* us = j > 0 ? u - n1 : u;
            const double* un = j + 1 < n ? u + n1 : u;
            const double ss = j > 0 ? 1.0 : -1.0;
            const double sn = j + 1 < n ? 1.0 : -1.0;
            const double* Pr = P + row;
            const double* Dr = DV + row;
            const double* R = rho + row;
            const double* base = ub + static_cast<std::size_t>(j) * n1;
            double* out = uo + static_cast<std::size_t>(j) * n1;
            for (int i = 1; i < n; ++i) {
                const double conv = ih * (GCX[i] - GCX[i - 1] + GNn[i] - GNc[i]) -
                                    u[i] * ih * (MCX[i] - MCX[i - 1] + MNn[i] - MNc[i]);
                const double lap = ih2 * (u[i + 1] + u[i - 1] + sn * un[i] + ss * us[i] - 4.0 * u[i]);
                const double visc = mu * lap + lam * ih * (Dr[i] - Dr[i - 1]);
                const double du = (-conv - ps * ih * (Pr[i] - Pr[i - 1]) + visc) / (0.5 * (R[i - 1] + R[i]));
                out[i] = base[i] + coef * du;
            }
        }

        // y-momentum: transport through cell centers of row j
        {
            const double* Fs = FY + row;
            const double* Fn = Fs + n;
            const double* vbl = uy + row;
            const double* val = vbl + n;
            const double* vbb = j > 0 ? vbl - n : uy + n;
            const double* vaa = j + 2 <= n ? val + n : uy + static_cast<std::size_t>(n - 1) * n;
            const double sb = j > 0 ? 1.0 : -1.0;
            const double sa = j + 2 <= n ? 1.0 : -1.0;
            for (int i = 0; i < n; ++i) {
                const double f = 0.5 * (Fs[i] + Fn[i]);
                MYc[i] = f;
                GYc[i] = f * face_value(f, vbl[i], val[i], sb * vbb[i], sa * vaa[i]);
            }
        }
        // y-momentum: node row j and update of face row j
        if (j > 0) {
            const double* Fl = FX + static_cast<std::size_t>(j - 1) * n1;
            const double* Fu = FX + static_cast<std::size_t>(j) * n1;
            const double* v = uy + row;
            auto put = [&](int i, double aa, double bb) {
                const double f = 0.5 * (Fl[i] + Fu[i]);
                MNY[i] = f;
                GNY[i] = f * face_value(f, v[i - 1], v[i], aa, bb);
            };
            put(1, -v[0], v[2]);
            for (int i = 2; i < n - 1; ++i) put(i, v[i - 2], v[i + 1]);
            put(n - 1, v[n - 3], -v[n - 1]);

            double* tmp = rate.data();
            y_row_rates(n, ih, ih2, mu, lam, ps, v, GYc, GYp, GNY, MYc, MYp, MNY, DV + row - n, DV + row, P + row - n,
                        P + row, rho + row - n, rho + row, tmp);
            const double* base = vb + row;
            double* out = vo + row;
            for (int i = 0; i < n; ++i) out[i] = base[i] + coef * tmp[i];
        }

        // continuity of row j
        {
            const double* Fx = FX + static_cast<std::size_t>(j) * n1;
            const double* Fs = FY + row;
            const double* Fn = Fs + n;
            const double* base = rb + row;
            double* out = ro + row;
            for (int i = 0; i < n; ++i) out[i] = base[i] - coef * ih * (Fx[i + 1] - Fx[i] + Fn[i] - Fs[i]);
        }

        std::swap(GNc, GNn);
        std::swap(MNc, MNn);
        std::swap(GYp, GYc);
        std::swap(MYp, MYc);
    }
}

CompressibleSolver::CompressibleSolver(SolverConfig config) : config_(std::move(config)) {
    config_.validate();
    impl_ = std::make_unique<Impl>(config_);
}

CompressibleSolver::~CompressibleSolver() = default;
CompressibleSolver::CompressibleSolver(CompressibleSolver&&) noexcept = default;
CompressibleSolver& CompressibleSolver::operator=(CompressibleSolver&&) noexcept = default;

BodyState CompressibleSolver::prescribed_body(double t) const {
    BodyState b;
    b.h = config_.path.position(t);
    b.h_dot = config_.path.velocity(t);
    b.beta = config_.beta0 + config_.omega0 * t;
    b.beta_dot = config_.omega0;
    b.mass = config_.body_mass();
    b.inertia = config_.body_inertia();
    b.radius = config_.params.eps;
    return b;
}

SimState CompressibleSolver::initial_state() const {
    return init_well_prepared(config_, config_.stream_amplitude);
}

namespace {

/// max |v| and max v with independent lanes; NaN anywhere poisons the returned sum.
struct Extremes {
    double max_abs = 0.0, max = -std::numeric_limits<double>::infinity(), sum = 0.0;
};
Extremes extremes(const std::vector<double>& v) {
    constexpr int W = 8;
    double ma[W] = {}, mx[W], sm[W] = {};
    std::fill_n(mx, W, -std::numeric_limits<double>::infinity());
    const std::size_t n = v.size(), body = n - n % W;
    for (std::size_t k = 0; k < body; k += W)
        for (int l = 0; l < W; ++l) {
            const double x = v[k + l];
            ma[l] = std::abs(x) > ma[l] ? std::abs(x) : ma[l];
            mx[l] = x > mx[l] ? x : mx[l];
            sm[l] += x;
        }
    Extremes e;
    for (std::size_t k = body; k < n; ++k) {
        e.max_abs = std::max(e.max_abs, std::abs(v[k]));
        e.max = std::max(e.max, v[k]);
        e.sum += v[k];
    }
    for (int l = 0; l < W; ++l) {
        e.max_abs = std::max(e.max_abs, ma[l]);
        e.max = std::max(e.max, mx[l]);
        e.sum += sm[l];
    }
    return e;
}

} // namespace

double CompressibleSolver::stable_dt(const SimState& s) const {
    const Extremes ex = extremes(s.u.xs()), ey = extremes(s.u.ys()), er = extremes(s.rho.data());
    const double umax = std::max(ex.max_abs, ey.max_abs);
    const double rmax = er.max;
    if (!std::isfinite(ex.sum + ey.sum + er.sum) || !std::isfinite(umax) || !std::isfinite(rmax)) {
        std::ostringstream os;
        os << "non-finite state at t = " << s.t << " (max|u| = " << umax << ", max rho = " << rmax << ")";
        throw SolverError(os.str());
    }
    const FluidParams& fp = config_.params;
    const double h = config_.grid.h();
    const double cmax = sound_speed(rmax, fp) * impl_->inv_eps_m;
    const double acoustic = h / (umax + cmax);
    const double viscous = h * h * fp.rho_bar / (4.0 * (2.0 * fp.mu + fp.lambda));
    return config_.dt_safety * std::min({acoustic, viscous, config_.penalization_eta});
}

CompressibleSolver::StepInfo CompressibleSolver::advance(SimState& s, double dt) {
    Impl& w = *impl_;
    const bool prescribed = config_.body_mode == BodyMode::prescribed;
    const double h = config_.grid.h();

    auto kin = [](const BodyState& b, double shift) {
        return Kinematics{b.h + shift * b.h_dot, b.h_dot, b.beta_dot, b.radius};
    };
    const Kinematics k0 = kin(s.body, 0.0);
    const Kinematics k_mid = prescribed ? kin(prescribed_body(s.t + 0.5 * dt), 0.0) : kin(s.body, 0.5 * dt);

    double* rho = s.rho.data().data();
    double* ux = s.u.xs().data();
    double* uy = s.u.ys().data();
    double* rho1 = w.rho1.data();
    double* ux1 = w.ux1.data();
    double* uy1 = w.uy1.data();

    // stage 1: U1 = U + dt/2 L(U)
    w.fluid_update(rho, ux, uy, rho, ux, uy, 0.5 * dt, rho1, ux1, uy1);
    w.collect_pens(k0);
    w.penalize(rho, ux, uy, 0.5 * dt, ux1, uy1, nullptr);

    // stage 2: U <- U + dt L(U1)
    w.collect_pens(k_mid);
    const double pe_before = w.body_relative_energy(rho, k0);

    StepInfo info;
    info.dt = dt;
    w.fluid_update(rho1, ux1, uy1, rho, ux, uy, dt, rho, ux, uy);
    info.dissipation_rate = w.dissipation_rate(ux1, uy1);
    std::vector<double> pen_values;
    const ExchangeForce f = w.penalize(rho1, ux1, uy1, dt, ux, uy, &pen_values);

    info.clamp = clamp_negative(s.rho);

    // kinetic energy added by the penalization increment b = dt pen on top of the fluid update:
    // 1/2 rho (u^2 - (u - b)^2) = rho b (u - b/2)
    double exchange = 0.0;
    for (std::size_t q = 0; q < w.pens.size(); ++q) {
        const auto& pn = w.pens[q];
        const double rf = w.face_density(rho, pn);
        const double u = pn.y ? uy[pn.index] : ux[pn.index];
        const double b = dt * pen_values[q];
        exchange += rf * b * (u - 0.5 * b);
    }
    exchange *= h * h;

    s.t += dt;
    s.body = prescribed ? prescribed_body(s.t) : body_update(s.body, f, dt);
    const double pe_after = w.body_relative_energy(rho, kin(s.body, 0.0));
    info.exchange = exchange - w.pscale * (pe_after - pe_before);
    return info;
}

// ============================================================================
// Operations
// ============================================================================

VectorField well_prepared_velocity(const GridSpec& g, double V) {
    const double L = g.side_length;
    const NodeField psi = NodeField::sample(g, [&](double x, double y) {
        const double sx = std::sin(M_PI * x / L), sy = std::sin(M_PI * y / L);
        return V * sx * sx * sy * sy;
    });
    return perp_gradient(psi);
}

SimState init_well_prepared(const SolverConfig& config, double V) {
    config.validate();
    if (!std::isfinite(V)) throw ConfigError("stream amplitude must be finite");
    const GridSpec& g = config.grid;
    const double L = g.side_length;
    const FluidParams& fp = config.params;

    SimState s;
    s.t = 0.0;
    s.body.mass = config.body_mass();
    s.body.inertia = config.body_inertia();
    s.body.radius = fp.eps;
    s.body.beta = config.beta0;
    s.body.beta_dot = config.omega0;
    if (config.body_mode == BodyMode::prescribed) {
        s.body.h = config.path.position(0.0);
        s.body.h_dot = config.path.velocity(0.0);
    } else {
        s.body.h = config.body_start;
        s.body.h_dot = config.body_velocity0;
    }
    if (distance_to_boundary(s.body.h, L) <= -fp.eps) {
        std::ostringstream os;
        os << "body at (" << s.body.h.x << ", " << s.body.h.y << ") with radius " << fp.eps
           << " does not intersect the domain";
        throw ConfigError(os.str());
    }

    s.rho = ScalarField(g, fp.rho_bar);
    if (config.density_perturbation > 0.0) {
        std::mt19937_64 rng(config.seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (double& r : s.rho.data()) r = fp.rho_bar * (1.0 + config.density_perturbation * dist(rng));
    }

    s.u = well_prepared_velocity(g, V);

    const VectorField w = face_mask(g, s.body.h, fp.eps);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double m = w.x(i, j);
            if (m > 0.0) s.u.x(i, j) = (1.0 - m) * s.u.x(i, j) + m * s.body.rigid_velocity(s.u.x_face(i, j)).x;
        }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double m = w.y(i, j);
            if (m > 0.0) s.u.y(i, j) = (1.0 - m) * s.u.y(i, j) + m * s.body.rigid_velocity(s.u.y_face(i, j)).y;
        }
    return s;
}

double stable_dt(const SimState& state, const SolverConfig& config) {
    return CompressibleSolver(config).stable_dt(state);
}

SimState step(const SimState& state, const SolverConfig& config) {
    CompressibleSolver solver(config);
    SimState next = state;
    solver.advance(next, solver.stable_dt(state));
    return next;
}

ExchangeForce exchange_force(const SimState& s, const SolverConfig& config) {
    const GridSpec& g = config.grid;
    const double h = g.h();
    const VectorField w = face_mask(g, s.body.h, s.body.radius);
    ExchangeForce out;
    const double c = h * h / config.penalization_eta;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            if (w.x(i, j) <= 0.0) continue;
            const Vec2 x = s.u.x_face(i, j);
            const double m = w.x(i, j) * 0.5 * (s.rho(i - 1, j) + s.rho(i, j)) * (s.u.x(i, j) - s.body.rigid_velocity(x).x) * c;
            out.force.x += m;
            out.torque += m * (x - s.body.h).perp().x;
        }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (w.y(i, j) <= 0.0) continue;
            const Vec2 x = s.u.y_face(i, j);
            const double m = w.y(i, j) * 0.5 * (s.rho(i, j - 1) + s.rho(i, j)) * (s.u.y(i, j) - s.body.rigid_velocity(x).y) * c;
            out.force.y += m;
            out.torque += m * (x - s.body.h).perp().y;
        }
    return out;
}

BodyState body_update(const BodyState& body, const ExchangeForce& f, double dt) {
    body.validate();
    BodyState b = body;
    b.h_dot += (dt / b.mass) * f.force;
    b.beta_dot += dt * f.torque / b.inertia;
    b.h += dt * b.h_dot;
    b.beta += dt * b.beta_dot;
    return b;
}

EnergyReport energy_report(const SimState& s, const SolverConfig& config, double dissipation_accum,
                           double body_exchange) {
    const GridSpec& g = config.grid;
    const FluidParams& fp = config.params;
    const double h2 = g.h() * g.h();
    EnergyReport e;
    double k = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) k += 0.5 * (s.rho(i - 1, j) + s.rho(i, j)) * s.u.x(i, j) * s.u.x(i, j);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) k += 0.5 * (s.rho(i, j - 1) + s.rho(i, j)) * s.u.y(i, j) * s.u.y(i, j);
    e.kinetic = 0.5 * k * h2;

    const BodyMask mask = body_mask(g, s.body.h, s.body.radius);
    double pe = 0.0;
    for (std::size_t c = 0; c < s.rho.data().size(); ++c) {
        const double w = 1.0 - mask.weights.data()[c];
        if (w > 0.0) pe += w * relative_energy(std::max(s.rho.data()[c], 0.0), fp);
    }
    e.pressure_energy = fp.pressure_scale() * pe * h2;
    e.dissipation_accum = dissipation_accum;
    e.body_exchange = body_exchange;
    e.total = e.kinetic + e.pressure_energy + e.dissipation_accum - e.body_exchange;
    return e;
}

double rigid_constraint_error(const SimState& s, const SolverConfig& config) {
    const GridSpec& g = config.grid;
    const VectorField w = face_mask(g, s.body.h, s.body.radius);
    double acc = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            if (w.x(i, j) > 0.0) {
                const double d = s.u.x(i, j) - s.body.rigid_velocity(s.u.x_face(i, j)).x;
                acc += w.x(i, j) * d * d;
            }
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (w.y(i, j) > 0.0) {
                const double d = s.u.y(i, j) - s.body.rigid_velocity(s.u.y_face(i, j)).y;
                acc += w.y(i, j) * d * d;
            }
    return std::sqrt(acc * g.h() * g.h());
}

namespace {

double total_mass(const ScalarField& rho) {
    double m = 0.0;
    for (double v : rho.data()) m += v;
    return m * rho.grid().h() * rho.grid().h();
}

} // namespace

Trajectory run(const SolverConfig& config, const RunOptions& options) {
    CompressibleSolver solver(config);
    Trajectory traj;
    traj.config = config;
    SimState s = solver.initial_state();
    const double eps = config.params.eps;
    const double m0 = total_mass(s.rho);

    double dissipation = 0.0;
    double exchange = 0.0;
    RunDiagnostics& d = traj.diag;
    d.dt_min = std::numeric_limits<double>::infinity();
    d.min_rho_before_clamp = *std::min_element(s.rho.data().begin(), s.rho.data().end());
    d.max_eps_hdot = eps * s.body.h_dot.norm();

    auto emit = [&]() {
        EnergyRow row;
        row.t = s.t;
        row.energy = energy_report(s, config, dissipation, exchange);
        row.mass = total_mass(s.rho);
        row.eps_hdot = eps * s.body.h_dot.norm();
        traj.energy.push_back(row);
        Snapshot snap;
        snap.t = s.t;
        snap.body = s.body;
        if (options.keep_fields) {
            snap.rho = s.rho;
            snap.u = s.u;
        }
        traj.snapshots.push_back(snap);
        if (options.on_snapshot) {
            if (options.keep_fields) {
                options.on_snapshot(traj.snapshots.back(), row);
            } else {
                Snapshot full{s.t, s.rho, s.u, s.body};
                options.on_snapshot(full, row);
            }
        }
    };
    emit();

    for (int k = 1; k <= config.snapshots; ++k) {
        const double target = config.t_end * k / config.snapshots;
        while (s.t < target) {
            double dt = solver.stable_dt(s);
            bool last = false;
            if (s.t + dt >= target) {
                dt = target - s.t;
                last = true;
            }
            const CompressibleSolver::StepInfo info = solver.advance(s, dt);
            if (last) s.t = target;
            if (config.body_mode == BodyMode::prescribed) s.body = solver.prescribed_body(s.t);
            ++d.steps;
            d.dt_min = std::min(d.dt_min, dt);
            if (!last) d.dt_max = std::max(d.dt_max, dt);
            dissipation += dt * info.dissipation_rate;
            exchange += info.exchange;
            d.peak_dissipation_rate = std::max(d.peak_dissipation_rate, info.dissipation_rate);
            if (info.clamp.cells > 0) {
                ++d.clamp_events;
                d.min_rho_before_clamp = std::min(d.min_rho_before_clamp, info.clamp.most_negative);
            }
            const double mass = total_mass(s.rho);
            if (!std::isfinite(mass)) {
                std::ostringstream os;
                os << "non-finite mass at t = " << s.t;
                throw SolverError(os.str());
            }
            d.max_mass_drift = std::max(d.max_mass_drift, std::abs(mass - m0) / m0);
            d.max_eps_hdot = std::max(d.max_eps_hdot, eps * s.body.h_dot.norm());
        }
        emit();
    }
    if (d.dt_max == 0.0) d.dt_max = d.dt_min;
    d.min_rho_before_clamp = std::min(d.min_rho_before_clamp,
                                      *std::min_element(s.rho.data().begin(), s.rho.data().end()));
    const double e0 = traj.energy.front().energy.total;
    for (const auto& row : traj.energy) d.energy_violation = std::max(d.energy_violation, row.energy.total - e0);
    d.energy_tolerance = 10.0 * d.dt_max * d.peak_dissipation_rate;
    return traj;
}

// ============================================================================
// Renormalized continuity
// ============================================================================

double renormalization_b(double rho, double cap) { return rho <= cap ? rho * rho : 2.0 * rho * cap - cap * cap; }

double renormalization_b_prime(double rho, double cap) { return rho <= cap ? 2.0 * rho : 2.0 * cap; }

namespace {

/// Spatial bump (1 - r^2/R^2)^4 about the domain center, R = 0.3 L.
double space_bump(double x, double y, double L) {
    const double R = 0.3 * L;
    const double dx = x - 0.5 * L, dy = y - 0.5 * L;
    const double s = 1.0 - (dx * dx + dy * dy) / (R * R);
    return s > 0.0 ? s * s * s * s : 0.0;
}

/// tau(t) = sin^2(pi t / T) and its antiderivative.
double time_bump(double t, double T) {
    const double s = std::sin(M_PI * t / T);
    return s * s;
}
double time_bump_integral(double t, double T) { return 0.5 * t - T / (4.0 * M_PI) * std::sin(2.0 * M_PI * t / T); }

} // namespace

std::vector<double> renormalized_residual(const Trajectory& tr, double cap, bool zero_test_function) {
    const auto& snaps = tr.snapshots;
    if (snaps.size() < 2) return {};
    std::vector<double> out(snaps.size() - 1, 0.0);
    if (zero_test_function) return out;
    for (const auto& s : snaps)
        if (s.rho.data().empty()) throw DiagnosticError("renormalized residual needs stored fields");

    const GridSpec& g = snaps.front().rho.grid();
    const double L = g.side_length, h2 = g.h() * g.h();
    const double T = tr.config.t_end;
    const ScalarField phi = ScalarField::sample(g, [&](double x, double y) { return space_bump(x, y, L); });
    const VectorField grad_phi = gradient(phi);

    // per snapshot: int b phi, int b u.grad phi (face form), int (b - b' rho) div u phi
    struct Terms {
        double b_phi = 0.0, transport = 0.0, compress = 0.0;
    };
    auto terms = [&](const Snapshot& s) {
        Terms t;
        ScalarField b(g);
        for (std::size_t c = 0; c < b.data().size(); ++c) b.data()[c] = renormalization_b(s.rho.data()[c], cap);
        const ScalarField div = divergence(s.u);
        for (std::size_t c = 0; c < b.data().size(); ++c) {
            const double r = s.rho.data()[c];
            t.b_phi += b.data()[c] * phi.data()[c];
            t.compress += (b.data()[c] - renormalization_b_prime(r, cap) * r) * div.data()[c] * phi.data()[c];
        }
        for (int j = 0; j < g.ny; ++j)
            for (int i = 1; i < g.nx; ++i) t.transport += 0.5 * (b(i - 1, j) + b(i, j)) * s.u.x(i, j) * grad_phi.x(i, j);
        for (int j = 1; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) t.transport += 0.5 * (b(i, j - 1) + b(i, j)) * s.u.y(i, j) * grad_phi.y(i, j);
        t.b_phi *= h2;
        t.transport *= h2;
        t.compress *= h2;
        return t;
    };

    Terms prev = terms(snaps.front());
    for (std::size_t k = 0; k + 1 < snaps.size(); ++k) {
        const Terms next = terms(snaps[k + 1]);
        const double t0 = snaps[k].t, t1 = snaps[k + 1].t, dt = t1 - t0;
        const double tau0 = time_bump(t0, T), tau1 = time_bump(t1, T);
        // b phi linear in time between snapshots, d_t tau integrated exactly
        const double avg_tau = (time_bump_integral(t1, T) - time_bump_integral(t0, T)) / dt;
        const double w1 = tau1 - avg_tau;
        const double w0 = (tau1 - tau0) - w1;
        const double dtphi_term = w0 * prev.b_phi + w1 * next.b_phi;
        const double rest = 0.5 * dt * (tau0 * (prev.transport + prev.compress) + tau1 * (next.transport + next.compress));
        const double lhs = tau1 * next.b_phi - tau0 * prev.b_phi;
        out[k] = std::abs(lhs - dtphi_term - rest);
        prev = next;
    }
    return out;
}

} // namespace lmfsi
