/// @file lmfsi.cpp
/// @brief Command-line front end: run, reference, sweep, verify-testfunctions, check-energy.
///
/// Exit codes: 0 success, 1 a validation check failed, 2 runtime or usage error.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lmfsi/config.hpp"
#include "lmfsi/errors.hpp"
#include "lmfsi/harness.hpp"
#include "lmfsi/incompressible.hpp"
#include "lmfsi/output.hpp"
#include "lmfsi/testfunctions.hpp"

using namespace lmfsi;
namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0, exit_invalid = 1, exit_runtime = 2;

struct Options {
    std::string config;
    std::string out;
    std::string eps;
    std::optional<double> m;
    std::optional<int> grid;
    std::optional<int> jobs;
    std::optional<long long> seed;
    std::string mode;
    std::string path;  // check-energy target
};

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config, "INI run file");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--eps", o.eps, "eps, or a comma-separated ladder for sweeps");
    sub->add_option("--m", o.m, "Mach exponent m");
    sub->add_option("--grid", o.grid, "cells per side (overrides the grid rule)")->check(CLI::PositiveNumber);
    sub->add_option("--jobs", o.jobs, "concurrent ladder rungs")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "seed of the initial density perturbation")->check(CLI::NonNegativeNumber);
    sub->add_option("--mode", o.mode, "body mode")->check(CLI::IsMember({"prescribed", "coupled"}));
}

std::vector<double> parse_ladder(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    for (std::string item; std::getline(in, item, ',');) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw ConfigError("--eps: malformed value '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("--eps: empty");
    return out;
}

/// Config file (or defaults) with the command-line overrides applied.
SweepConfig resolve(const Options& o) {
    SweepConfig c = o.config.empty() ? default_sweep_config() : load_config(o.config);
    if (!o.eps.empty()) {
        c.eps_ladder = parse_ladder(o.eps);
        c.base.params.eps = c.eps_ladder.front();
    }
    if (o.m) c.base.params.m = *o.m;
    if (o.grid) c.fixed_cells = *o.grid;
    if (o.jobs) c.jobs = *o.jobs;
    if (o.seed) c.base.seed = static_cast<std::uint64_t>(*o.seed);
    if (o.mode == "prescribed") c.base.body_mode = BodyMode::prescribed;
    if (o.mode == "coupled") c.base.body_mode = BodyMode::coupled;
    if (!o.out.empty()) c.out_dir = o.out;
    c.validate();
    return c;
}

int cmd_run(const Options& o) {
    const SweepConfig c = resolve(o);
    const SolverConfig sc = c.rung(c.base.params.eps);
    RunOptions opt;
    opt.keep_fields = !c.out_dir.empty();
    const Trajectory tr = run(sc, opt);
    const RunDiagnostics& d = tr.diag;
    std::printf("eps %g m %g grid %d steps %ld dt [%.3e, %.3e]\n", sc.params.eps, sc.params.m, sc.grid.nx, d.steps,
                d.dt_min, d.dt_max);
    std::printf("mass drift %.3e  min rho %.6f  eps|h'| max %.4e\n", d.max_mass_drift, d.min_rho_before_clamp,
                d.max_eps_hdot);
    std::printf("energy violation %.3e  tolerance %.3e  theorem regime %s\n", d.energy_violation, d.energy_tolerance,
                sc.params.theorem_regime() ? "yes" : "no");
    if (!c.out_dir.empty()) {
        write_run(c.out_dir, to_ini(c), tr);
        std::printf("wrote %s\n", c.out_dir.c_str());
    } else {
        std::cout << energy_csv(tr.energy);
    }
    const bool ok = d.energy_ok() && d.max_mass_drift <= 1e-12;
    if (!ok) std::fprintf(stderr, "validation failed: energy or mass check\n");
    return ok ? exit_ok : exit_invalid;
}

int cmd_reference(const Options& o) {
    const SweepConfig c = resolve(o);
    const SolverConfig sc = c.rung(c.base.params.eps);
    const IncTrajectory tr = run_reference(sc);
    bool ok = true;
    double max_div = 0.0;
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
        const IncSnapshot& s = tr.snapshots[k];
        std::printf("t %.4f kinetic %.10f max|div u| %.2e\n", s.t, s.kinetic, s.max_divergence);
        if (k > 0 && s.kinetic > tr.snapshots[k - 1].kinetic) ok = false;
        max_div = std::max(max_div, s.max_divergence);
    }
    std::printf("steps %ld dt_max %.3e\n", tr.steps, tr.dt_max);
    if (!c.out_dir.empty()) write_reference(c.out_dir, to_ini(c), sc, tr);
    if (!ok) std::fprintf(stderr, "validation failed: kinetic energy increased\n");
    return ok ? exit_ok : exit_invalid;
}

int cmd_sweep(const Options& o) {
    const SweepConfig c = resolve(o);
    const std::vector<RungReport> reps = run_sweep(c);
    std::cout << sweep_csv(rows_of(reps));
    bool failed = false, invalid = false;
    for (const RungReport& r : reps) {
        if (!r.ok) {
            failed = true;
            std::fprintf(stderr, "eps %g failed: %s\n", r.row.eps, r.failure.c_str());
            continue;
        }
        std::fprintf(stderr, "eps %g grid %d steps %ld %.1f s\n", r.row.eps, r.cells, r.steps, r.seconds);
        if (r.row.energy_violation > r.energy_tolerance || r.max_mass_drift > 1e-12) invalid = true;
    }
    if (!c.out_dir.empty()) write_sweep(c.out_dir, c, reps);
    if (failed) return exit_runtime;
    return invalid ? exit_invalid : exit_ok;
}

int cmd_verify(const Options& o) {
    SweepConfig c = resolve(o);
    if (o.eps.empty() && o.config.empty()) c.eps_ladder = {0.1, 0.05, 0.025};
    if (o.config.empty() && c.max_cells == 0) c.max_cells = 256;
    c.validate();
    const TestFunctionSpec spec = TestFunctionSpec::standard(c.base.grid.side_length);
    std::vector<VerifierRow> rows;
    bool ok = true;
    double prev_gap = INFINITY;
    for (double eps : c.eps_ladder) {
        SolverConfig sc = weak_test_config(eps, c.grid_cells(eps), std::max(20, c.base.snapshots), c.base.t_end);
        sc.params.m = c.base.params.m;
        const Trajectory tr = run(sc);
        const VerifierRow row = verify_trajectory(tr, spec);
        const BodyPath path = path_of(tr);
        FieldChecks worst;
        for (const Snapshot& s : tr.snapshots) {
            const FieldChecks f = field_checks(phi_eps(s.t, sc.grid, spec, eps, path), s.body.h, eps);
            worst.body_max = std::max(worst.body_max, f.body_max);
            worst.boundary_max = std::max(worst.boundary_max, f.boundary_max);
            worst.div_max = std::max(worst.div_max, f.div_max);
        }
        const double scaled = row.grad_eta_max * eps * std::log(spec.alpha(eps));
        std::fprintf(stderr, "eps %g: body %.1e boundary %.1e div %.1e sup|grad eta| eps log(alpha) %.3f\n", eps,
                     worst.body_max, worst.boundary_max, worst.div_max, scaled);
        if (worst.body_max != 0.0 || worst.boundary_max != 0.0 || worst.div_max > 1e-12 || scaled > 4.0 ||
            row.W12_gap > prev_gap)
            ok = false;
        prev_gap = row.W12_gap;
        rows.push_back(row);
    }
    const std::string csv = verifier_csv(rows);
    std::cout << csv;
    if (!c.out_dir.empty()) {
        fs::create_directories(c.out_dir);
        write_text(fs::path(c.out_dir) / "testfunctions.csv", csv);
    }
    if (!ok) std::fprintf(stderr, "validation failed: a test-function property does not hold\n");
    return ok ? exit_ok : exit_invalid;
}

int cmd_check_energy(const Options& o) {
    const std::string target = !o.path.empty() ? o.path : o.out;
    if (target.empty()) throw ConfigError("check-energy: give a run directory or energy CSV");
    const EnergyCheck c = check_energy(target);
    std::printf("rows %zu violation %.6e tolerance %.6e %s\n", c.rows, c.violation, c.tolerance,
                c.ok() ? "ok" : "VIOLATED");
    return c.ok() ? exit_ok : exit_invalid;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-Mach compressible flow around a small rigid disk: runs, references, sweeps and checks"};
    app.require_subcommand(1);
    Options o;
    CLI::App* run_cmd = app.add_subcommand("run", "single compressible run");
    CLI::App* ref_cmd = app.add_subcommand("reference", "incompressible reference run");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "eps-ladder sweep against the reference");
    CLI::App* verify_cmd = app.add_subcommand("verify-testfunctions", "test-function properties and residuals");
    CLI::App* check_cmd = app.add_subcommand("check-energy", "re-validate the energy inequality of stored output");
    for (CLI::App* s : {run_cmd, ref_cmd, sweep_cmd, verify_cmd, check_cmd}) add_common(s, o);
    check_cmd->add_option("path", o.path, "run directory or energy CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return exit_runtime;
    }

    try {
        if (*run_cmd) return cmd_run(o);
        if (*ref_cmd) return cmd_reference(o);
        if (*sweep_cmd) return cmd_sweep(o);
        if (*verify_cmd) return cmd_verify(o);
        return cmd_check_energy(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_runtime;
    }
}
