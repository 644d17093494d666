/// @file acceptance.cpp
/// @brief Desk-scale acceptance suite: prints one PASS/FAIL line per criterion.
///
/// Every compressible run made here feeds criteria 1 and 2, so those lines are
/// printed after the other experiments have finished. Details go to stdout
/// above the summary; the exit status is non-zero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "lmfsi/harness.hpp"
#include "lmfsi/incompressible.hpp"
#include "lmfsi/testfunctions.hpp"

using namespace lmfsi;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct RunRecord {
    std::string label;
    bool ok = true;
    double mass_drift = 0.0;
    double energy_violation = 0.0;
    double energy_tolerance = 0.0;
};

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::vector<RunRecord> runs;

void record(const std::string& label, const std::vector<RungReport>& reps) {
    for (const RungReport& r : reps) {
        char buf[64];
        std::snprintf(buf, sizeof buf, " eps=%g", r.row.eps);
        runs.push_back({label + buf, r.ok, r.max_mass_drift, r.row.energy_violation, r.energy_tolerance});
        if (!r.ok) std::printf("    %s eps=%g FAILED: %s\n", label.c_str(), r.row.eps, r.failure.c_str());
    }
}

void record(const std::string& label, const Trajectory& tr) {
    runs.push_back({label, true, tr.diag.max_mass_drift, tr.diag.energy_violation, tr.diag.energy_tolerance});
}

void print_sweep(const char* title, const std::vector<RungReport>& reps) {
    std::printf("  %s\n", title);
    std::printf("    %-6s %5s %7s %12s %12s %12s %12s %11s %11s %7s\n", "eps", "nx", "steps", "sup_rho_err",
                "u_err_L2W12", "kinetic_gap", "eps_hdot_max", "violation", "mass_drift", "sec");
    for (const RungReport& r : reps)
        std::printf("    %-6g %5d %7ld %12.5e %12.5e %12.5e %12.5e %11.3e %11.3e %7.1f\n", r.row.eps, r.cells, r.steps,
                    r.row.sup_rho_err, r.row.u_err_L2W12, r.row.kinetic_gap, r.row.eps_hdot_max,
                    r.row.energy_violation, r.max_mass_drift, r.seconds);
    std::fflush(stdout);
}

bool strictly_decreasing(const std::vector<double>& v, double max_ratio = 1.0) {
    for (std::size_t k = 1; k < v.size(); ++k)
        if (!(v[k] < v[k - 1]) || !(v[k] <= max_ratio * v[k - 1])) return false;
    return true;
}

std::vector<double> column(const std::vector<RungReport>& reps, double SweepRow::*field) {
    std::vector<double> out;
    for (const RungReport& r : reps) out.push_back(r.row.*field);
    return out;
}

// ---------------------------------------------------------------------------
// Criterion 3: incompressible reference
// ---------------------------------------------------------------------------

double mms_error(int n, double dt, double t_end) {
    const GridSpec g = GridSpec::square(n);
    const double rho_bar = 1.0, mu = 0.01;
    IncState s{manufactured_velocity(g, 0.0), ScalarField(g), 0.0};
    const int steps = static_cast<int>(std::lround(t_end / dt));
    for (int k = 0; k < steps; ++k) {
        const VectorField f = manufactured_forcing(g, s.t, rho_bar, mu);
        s = step_inc(s, dt, rho_bar, mu, &f);
    }
    return norm_L2(s.u - manufactured_velocity(g, s.t));
}

Verdict criterion3() {
    const auto t0 = Clock::now();
    const double dt = 1e-4, t_end = 0.05;
    const double e64 = mms_error(64, dt, t_end), e128 = mms_error(128, dt, t_end);
    const double order = std::log2(e64 / e128);
    std::printf("  manufactured solution: L2 error %.4e (64) %.4e (128), order %.3f\n", e64, e128, order);

    SolverConfig c = default_solver_config();
    c.grid = GridSpec::square(128);
    const IncTrajectory ref = run_reference(c);
    bool monotone = true;
    for (std::size_t k = 1; k < ref.snapshots.size(); ++k)
        if (!(ref.snapshots[k].kinetic < ref.snapshots[k - 1].kinetic)) monotone = false;
    std::printf("  unforced reference 128^2: kinetic %.6f -> %.6f over %zu snapshots, %ld steps\n",
                ref.snapshots.front().kinetic, ref.snapshots.back().kinetic, ref.snapshots.size(), ref.steps);
    const double sec = seconds_since(t0);
    char buf[200];
    std::snprintf(buf, sizeof buf, "order %.3f (>= 1.9), kinetic energy %s, %.1f s (<= 120 s)", order,
                  monotone ? "strictly decreasing" : "NOT monotone", sec);
    return {order >= 1.9 && monotone && sec <= 120.0, buf};
}

// ---------------------------------------------------------------------------
// Criterion 4: the eps ladder at m = 1 and m = 2
// ---------------------------------------------------------------------------

std::vector<RungReport> m1_reports;

Verdict criterion4() {
    const auto t0 = Clock::now();
    SweepConfig c = default_sweep_config();
    m1_reports = run_sweep(c);
    record("sweep m=1", m1_reports);
    print_sweep("m = 1", m1_reports);

    c.base.params.m = 2.0;
    const std::vector<RungReport> m2 = run_sweep(c);
    record("sweep m=2", m2);
    print_sweep("m = 2", m2);
    const double sec = seconds_since(t0);

    bool ok = true;
    for (const auto& r : m1_reports) ok = ok && r.ok && r.cells <= 256;
    for (const auto& r : m2) ok = ok && r.ok;
    const bool rho_ok = strictly_decreasing(column(m1_reports, &SweepRow::sup_rho_err), 0.8);
    const bool u_ok = strictly_decreasing(column(m1_reports, &SweepRow::u_err_L2W12), 0.8);
    const bool gap_ok = strictly_decreasing(column(m1_reports, &SweepRow::kinetic_gap));
    bool stiffer = m2.size() == m1_reports.size();
    for (std::size_t k = 0; stiffer && k < m2.size(); ++k)
        stiffer = m2[k].row.sup_rho_err < m1_reports[k].row.sup_rho_err &&
                  m2[k].row.u_err_L2W12 < m1_reports[k].row.u_err_L2W12;
    char buf[300];
    std::snprintf(buf, sizeof buf,
                  "m=1 sup_rho_err %s, u_err %s (ratios <= 0.8), kinetic_gap %s; m=2 below m=1 rung-for-rung %s; "
                  "%.0f s (<= 600 s)",
                  rho_ok ? "ok" : "FAIL", u_ok ? "ok" : "FAIL", gap_ok ? "ok" : "FAIL", stiffer ? "ok" : "FAIL", sec);
    return {ok && rho_ok && u_ok && gap_ok && stiffer && sec <= 600.0, buf};
}

// ---------------------------------------------------------------------------
// Criterion 5: coupled body
// ---------------------------------------------------------------------------

Verdict criterion5() {
    SweepConfig c = default_sweep_config();
    c.base.body_mode = BodyMode::coupled;
    c.base.body_density_exponent = 0.5;
    const std::vector<RungReport> reps = run_sweep(c);
    record("coupled", reps);
    print_sweep("coupled body, kappa = 0.5", reps);
    bool ok = true;
    for (const auto& r : reps) ok = ok && r.ok;
    const std::vector<double> hd = column(reps, &SweepRow::eps_hdot_max);
    std::string detail = "eps_hdot_max";
    for (double v : hd) detail += " " + std::to_string(v);
    const bool dec = strictly_decreasing(hd);
    detail += dec ? " strictly decreasing" : " NOT strictly decreasing";
    return {ok && dec, detail};
}

// ---------------------------------------------------------------------------
// Criterion 6: test functions
// ---------------------------------------------------------------------------

Verdict criterion6() {
    const auto t0 = Clock::now();
    const TestFunctionSpec spec = TestFunctionSpec::standard();
    const std::vector<double> ladder{0.1, 0.05, 0.025};
    SweepConfig rule = default_sweep_config();
    const GridSpec common = GridSpec::square(rule.grid_cells(ladder.back()));
    const PrescribedPath inner = weak_test_config(0.1, 64, 20).path;

    bool zeros = true, divergence_ok = true, gap_ok = true, scaled_ok = true;
    double worst_div = 0.0, last_gap = INFINITY, scaled_max = 0.0, scaled_min = INFINITY;
    std::printf("  %-6s %5s %12s %12s %12s %14s\n", "eps", "nx", "body_max", "wall_max", "div_max", "W12_gap");
    for (double eps : ladder) {
        const GridSpec g = GridSpec::square(rule.grid_cells(eps));
        FieldChecks worst;
        double gap = 0.0;
        for (const PrescribedPath& p : {inner, PrescribedPath::grazing(1.0, eps, 0.5)}) {
            const BodyPath path = path_of(p);
            for (int k = 0; k <= 20; ++k) {
                const double t = 0.025 * k;
                const FieldChecks f = field_checks(phi_eps(t, g, spec, eps, path), path(t), eps);
                worst.body_max = std::max(worst.body_max, f.body_max);
                worst.boundary_max = std::max(worst.boundary_max, f.boundary_max);
                worst.div_max = std::max(worst.div_max, f.div_max);
            }
        }
        const BodyPath path = path_of(inner);
        for (int k = 0; k <= 20; ++k) gap = std::max(gap, w12_gap(0.025 * k, common, spec, eps, path));
        zeros = zeros && worst.body_max == 0.0 && worst.boundary_max == 0.0;
        divergence_ok = divergence_ok && worst.div_max <= 1e-12;
        worst_div = std::max(worst_div, worst.div_max);
        gap_ok = gap_ok && gap <= last_gap;
        last_gap = gap;
        const double alpha = spec.alpha(eps);
        const double scaled = eta_bounds(eps, alpha, spec.smoothing).grad_max * eps * std::log(alpha);
        scaled_max = std::max(scaled_max, scaled);
        scaled_min = std::min(scaled_min, scaled);
        scaled_ok = scaled_ok && scaled <= 4.0;
        std::printf("  %-6g %5d %12.3e %12.3e %12.3e %14.6f  sup|grad eta| eps log(alpha) = %.4f\n", eps, g.nx,
                    worst.body_max, worst.boundary_max, worst.div_max, gap, scaled);
    }

    // (e) one simultaneous grid / time / stride refinement at eps = 0.1
    const Trajectory coarse = run(weak_test_config(0.1, 64, 20));
    const Trajectory fine = run(weak_test_config(0.1, 128, 40));
    record("weak-test 64", coarse);
    record("weak-test 128", fine);
    const double r_coarse = weak_momentum_residual(coarse, spec), r_fine = weak_momentum_residual(fine, spec);
    const double plain = weak_momentum_residual(fine, spec, TestField::plain);
    std::printf("  weak momentum residual at eps = 0.1: %.4e (64^2, 20 snapshots) -> %.4e (128^2, 40 snapshots)\n",
                r_coarse, r_fine);
    std::printf("  contrast: plain (non-admissible) field residual %.4e, %.1fx the admissible one\n", plain,
                plain / r_fine);
    const double sec = seconds_since(t0);
    char buf[400];
    std::snprintf(buf, sizeof buf,
                  "(a) exact zeros %s (b) max div %.1e (c) W12 gap %s (d) eps log(alpha) sup|grad eta| in "
                  "[%.3f, %.3f] <= 4 (e) residual %.3e -> %.3e; %.0f s (<= 180 s)",
                  zeros ? "ok" : "FAIL", worst_div, gap_ok ? "non-increasing" : "INCREASES", scaled_min, scaled_max,
                  r_coarse, r_fine, sec);
    return {zeros && divergence_ok && gap_ok && scaled_ok && r_fine < r_coarse && sec <= 180.0, buf};
}

// ---------------------------------------------------------------------------
// Criterion 7: penalization
// ---------------------------------------------------------------------------

Verdict criterion7() {
    std::vector<double> errors;
    std::string detail = "L2(mask) error";
    for (double eta : {4e-3, 1e-3, 2.5e-4}) {
        SolverConfig c = default_sweep_config().rung(0.1);
        c.grid = GridSpec::square(128);
        c.penalization_eta = eta;
        double worst = 0.0;
        RunOptions opt;
        opt.keep_fields = false;
        opt.on_snapshot = [&](const Snapshot& s, const EnergyRow&) {
            if (s.t == 0.0) return;  // the initial blend does not depend on eta
            worst = std::max(worst, rigid_constraint_error(SimState{s.rho, s.u, s.body, s.t}, c));
        };
        const Trajectory tr = run(c, opt);
        char label[64];
        std::snprintf(label, sizeof label, "penalization eta=%g", eta);
        record(label, tr);
        errors.push_back(worst);
        std::printf("  eta %-8g max_t ||u - u_rigid||_L2(mask) = %.5e  (eta^1/2 = %.4f, %ld steps)\n", eta, worst,
                    std::sqrt(eta), tr.diag.steps);
        char buf[64];
        std::snprintf(buf, sizeof buf, " %.4e", worst);
        detail += buf;
    }
    const bool dec = strictly_decreasing(errors);
    detail += dec ? " decreasing" : " NOT decreasing";
    return {dec, detail};
}

// ---------------------------------------------------------------------------
// Criterion 8: determinism and round trips
// ---------------------------------------------------------------------------

Verdict criterion8() {
    SweepConfig c = default_sweep_config();
    c.fixed_cells = 32;
    c.base.t_end = 0.1;
    c.base.density_perturbation = 1e-3;
    c.base.seed = 2024;
    const std::vector<RungReport> first = run_sweep(c);
    const std::vector<RungReport> second = run_sweep(c);
    c.jobs = 3;
    const std::vector<RungReport> parallel = run_sweep(c);
    record("determinism", first);

    const std::string csv1 = sweep_csv(rows_of(first));
    const bool repeat = csv1 == sweep_csv(rows_of(second));
    const bool par = rows_of(first) == rows_of(parallel);
    const std::vector<SweepRow> reference_rows = rows_of(m1_reports);
    const bool csv_rt = parse_sweep_csv(sweep_csv(reference_rows)) == reference_rows &&
                        parse_sweep_csv(csv1) == rows_of(first);
    const bool json_rt = parse_sweep_json(sweep_json(default_sweep_config(), m1_reports)) == reference_rows;
    char buf[200];
    std::snprintf(buf, sizeof buf, "repeat bit-identical %s, CSV round trip %s, JSON round trip %s, jobs=3 == serial %s",
                  repeat ? "ok" : "FAIL", csv_rt ? "ok" : "FAIL", json_rt ? "ok" : "FAIL", par ? "ok" : "FAIL");
    return {repeat && par && csv_rt && json_rt, buf};
}

// ---------------------------------------------------------------------------
// Criteria 1 and 2 over every run above plus grazing runs
// ---------------------------------------------------------------------------

void grazing_runs() {
    SweepConfig c = default_sweep_config();
    c.path_kind = PathKind::grazing;
    c.eps_ladder = {0.16, 0.08};
    const std::vector<RungReport> reps = run_sweep(c);
    record("grazing", reps);
    print_sweep("grazing path (body within eps/2 of the walls)", reps);
}

Verdict criterion1() {
    double worst = 0.0;
    bool ok = !runs.empty();
    for (const RunRecord& r : runs) {
        ok = ok && r.ok && r.mass_drift <= 1e-12;
        worst = std::max(worst, r.mass_drift);
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "%zu runs, max relative mass drift %.2e (<= 1e-12)", runs.size(), worst);
    return {ok, buf};
}

Verdict criterion2() {
    bool ok = !runs.empty();
    double worst_ratio = 0.0;
    std::string offenders;
    for (const RunRecord& r : runs) {
        const bool good = r.ok && r.energy_violation <= r.energy_tolerance;
        if (!good) offenders += " [" + r.label + "]";
        ok = ok && good;
        if (r.energy_tolerance > 0.0) worst_ratio = std::max(worst_ratio, r.energy_violation / r.energy_tolerance);
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu runs incl. grazing, max violation / (10 dt peak dissipation) = %.3e",
                  runs.size(), worst_ratio);
    return {ok, buf + offenders};
}

} // namespace

int main() {
    const auto t0 = Clock::now();
    std::vector<std::pair<int, Verdict>> verdicts;
    auto stage = [&](int id, const char* title, const std::function<Verdict()>& f) {
        std::printf("[criterion %d] %s\n", id, title);
        std::fflush(stdout);
        const auto ts = Clock::now();
        Verdict v;
        try {
            v = f();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        std::printf("  (%.1f s)\n", seconds_since(ts));
        verdicts.emplace_back(id, v);
    };

    stage(3, "incompressible reference", criterion3);
    stage(4, "eps ladder, m = 1 and m = 2", criterion4);
    stage(5, "coupled body", criterion5);
    stage(6, "test functions", criterion6);
    stage(7, "penalization consistency", criterion7);
    stage(8, "determinism and round trips", criterion8);
    std::printf("[criteria 1-2] grazing runs\n");
    grazing_runs();
    verdicts.emplace_back(1, criterion1());
    verdicts.emplace_back(2, criterion2());
    std::sort(verdicts.begin(), verdicts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    const char* names[] = {"",
                           "mass conservation",
                           "discrete energy inequality",
                           "incompressible reference",
                           "eps-ladder convergence",
                           "coupled body eps|h'|",
                           "test-function suite",
                           "penalization consistency",
                           "determinism and round trips"};
    std::printf("\n==== acceptance summary (%.0f s) ====\n", seconds_since(t0));
    bool all = true;
    for (const auto& [id, v] : verdicts) {
        std::printf("%s criterion %d %-28s %s\n", v.pass ? "PASS" : "FAIL", id, names[id], v.detail.c_str());
        all = all && v.pass;
    }
    return all ? 0 : 1;
}
