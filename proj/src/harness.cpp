/// @file harness.cpp
#include "lmfsi/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "lmfsi/config.hpp"
#include "lmfsi/errors.hpp"

namespace lmfsi {

void SweepConfig::validate() const {
    if (eps_ladder.empty()) throw ConfigError("sweep: eps ladder is empty");
    for (std::size_t k = 0; k < eps_ladder.size(); ++k) {
        const double e = eps_ladder[k];
        if (!(e > 0.0 && e < 1.0)) throw ConfigError("sweep: every eps must lie in (0, 1)");
        if (k > 0 && !(e < eps_ladder[k - 1])) throw ConfigError("sweep: eps ladder must be strictly decreasing");
    }
    if (min_cells < 8) throw ConfigError("sweep: min_cells must be >= 8");
    if (!(cells_per_unit > 0.0)) throw ConfigError("sweep: cells_per_unit must be > 0");
    if (max_cells < 0 || fixed_cells < 0) throw ConfigError("sweep: cell counts must be >= 0");
    if (jobs < 1) throw ConfigError("sweep: jobs must be >= 1");
    SolverConfig probe = rung(eps_ladder.front());
    probe.validate();
}

int SweepConfig::grid_cells(double eps) const {
    if (fixed_cells > 0) return fixed_cells;
    const int need = static_cast<int>(std::ceil(cells_per_unit / eps - 1e-9));
    int n = 1;
    while (n < need) n *= 2;
    n = std::max(n, min_cells);
    if (max_cells > 0) n = std::min(n, max_cells);
    return n;
}

SolverConfig SweepConfig::rung(double eps) const {
    SolverConfig c = base;
    c.params.eps = eps;
    c.grid = GridSpec::square(grid_cells(eps), base.grid.side_length);
    const double L = c.grid.side_length;
    if (path_kind != PathKind::custom) {
        PrescribedPath p = path_kind == PathKind::circle ? PrescribedPath::circle(L, base.path.period)
                                                         : PrescribedPath::grazing(L, eps, base.path.period);
        p.clockwise = base.path.clockwise;
        p.phase = base.path.phase;
        c.path = p;
    }
    return c;
}

SolverConfig default_solver_config() {
    SolverConfig c;
    c.params.a = 0.5;
    c.params.gamma = 2.0;
    c.params.mu = 0.01;
    c.params.lambda = 0.0;
    c.params.rho_bar = 1.0;
    c.params.eps = 0.1;
    c.params.m = 1.0;
    c.grid = GridSpec::square(64);
    c.t_end = 0.5;
    c.snapshots = 20;
    c.stream_amplitude = 1.0;
    c.path = PrescribedPath::circle(1.0, c.t_end);
    return c;
}

SweepConfig default_sweep_config() {
    SweepConfig s;
    s.base = default_solver_config();
    return s;
}

// ============================================================================
// Metrics
// ============================================================================

namespace {

double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < f.size(); ++k) s += 0.5 * (f[k] + f[k + 1]) * (t[k + 1] - t[k]);
    return s;
}

/// Reference state at time t, linear in time between its snapshots.
struct ReferenceAt {
    VectorField u;
    double kinetic;
};

ReferenceAt reference_at(const IncTrajectory& ref, double t) {
    const auto& s = ref.snapshots;
    if (s.empty()) throw DiagnosticError("reference trajectory is empty");
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    if (t < s.front().t - tol || t > s.back().t + tol) throw DiagnosticError("time outside the reference trajectory");
    std::size_t k = 0;
    while (k + 1 < s.size() && s[k + 1].t <= t + tol) ++k;
    if (std::abs(s[k].t - t) <= tol || k + 1 == s.size()) return {s[k].u, s[k].kinetic};
    const double w = (t - s[k].t) / (s[k + 1].t - s[k].t);
    return {(1.0 - w) * s[k].u + w * s[k + 1].u, (1.0 - w) * s[k].kinetic + w * s[k + 1].kinetic};
}

class Comparison {
public:
    Comparison(const SolverConfig& config, const IncTrajectory& ref) : config_(config), ref_(ref) {}

    void add(const Snapshot& snap, const EnergyRow& energy) {
        const FluidParams& fp = config_.params;
        const ReferenceAt r = reference_at(ref_, snap.t);
        ScalarField drho = snap.rho;
        for (double& v : drho.data()) v -= fp.rho_bar;
        const ScalarField fluid = body_mask(config_.grid, snap.body.h, snap.body.radius).complement();
        rho_err_ = std::max(rho_err_, norm_Lp(drho, fp.gamma, &fluid));
        const double e = norm_W12(snap.u - r.u);
        times_.push_back(snap.t);
        u_err2_.push_back(e * e);
        kinetic_gap_ = std::max(kinetic_gap_, std::abs(energy.energy.kinetic - r.kinetic));
    }

    SweepRow row(const RunDiagnostics& d) const {
        SweepRow row;
        row.eps = config_.params.eps;
        row.sup_rho_err = rho_err_;
        row.u_err_L2W12 = std::sqrt(trapezoid(times_, u_err2_));
        row.kinetic_gap = kinetic_gap_;
        row.eps_hdot_max = d.max_eps_hdot;
        row.energy_violation = d.energy_violation;
        row.theorem_regime = config_.params.theorem_regime();
        return row;
    }

private:
    const SolverConfig& config_;
    const IncTrajectory& ref_;
    double rho_err_ = 0.0, kinetic_gap_ = 0.0;
    std::vector<double> times_, u_err2_;
};

} // namespace

SweepRow compare(const Trajectory& tr, const IncTrajectory& ref) {
    if (tr.snapshots.size() != tr.energy.size()) throw DiagnosticError("trajectory snapshots and energy rows differ");
    Comparison c(tr.config, ref);
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
        if (tr.snapshots[k].rho.data().empty()) throw DiagnosticError("trajectory snapshots carry no fields");
        c.add(tr.snapshots[k], tr.energy[k]);
    }
    return c.row(tr.diag);
}

RungReport run_rung(const SolverConfig& config) {
    RungReport rep;
    rep.row.eps = config.params.eps;
    rep.row.theorem_regime = config.params.theorem_regime();
    rep.cells = config.grid.nx;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const IncTrajectory ref = run_reference(config);
        rep.reference_steps = ref.steps;
        Comparison cmp(config, ref);
        RunOptions opt;
        opt.keep_fields = false;
        opt.on_snapshot = [&](const Snapshot& s, const EnergyRow& e) { cmp.add(s, e); };
        const Trajectory tr = run(config, opt);
        rep.row = cmp.row(tr.diag);
        rep.steps = tr.diag.steps;
        rep.energy_tolerance = tr.diag.energy_tolerance;
        rep.max_mass_drift = tr.diag.max_mass_drift;
        rep.min_rho = tr.diag.min_rho_before_clamp;
    } catch (const std::exception& e) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        rep.ok = false;
        rep.failure = e.what();
        rep.row.sup_rho_err = rep.row.u_err_L2W12 = rep.row.kinetic_gap = nan;
        rep.row.eps_hdot_max = rep.row.energy_violation = nan;
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

std::vector<RungReport> run_sweep(const SweepConfig& config) {
    config.validate();
    std::vector<double> ladder = config.eps_ladder;
    std::sort(ladder.begin(), ladder.end(), std::greater<>());
    std::vector<RungReport> out(ladder.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t k = next++; k < ladder.size(); k = next++) out[k] = run_rung(config.rung(ladder[k]));
    };
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), ladder.size());
    if (n <= 1) {
        worker();
        return out;
    }
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return out;
}

std::vector<SweepRow> rows_of(const std::vector<RungReport>& reports) {
    std::vector<SweepRow> rows;
    for (const auto& r : reports) rows.push_back(r.row);
    return rows;
}

// ============================================================================
// Reports
// ============================================================================

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = std::string(sweep_csv_header) + "\n";
    char buf[512];
    for (const SweepRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.eps, r.sup_rho_err,
                      r.u_err_L2W12, r.kinetic_gap, r.eps_hdot_max, r.energy_violation, r.theorem_regime ? 1 : 0);
        out += buf;
    }
    return out;
}

namespace {

double parse_number(const std::string& field, int line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(field, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != field.size()) {
        std::ostringstream os;
        os << "report line " << line << ": malformed number '" << field << "'";
        throw ConfigError(os.str());
    }
    return v;
}

} // namespace

std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("report is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != sweep_csv_header) throw ConfigError("report header mismatch: '" + line + "'");
    std::vector<SweepRow> rows;
    int number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
        if (f.size() != 7) {
            std::ostringstream os;
            os << "report line " << number << ": expected 7 columns, found " << f.size();
            throw ConfigError(os.str());
        }
        SweepRow r;
        r.eps = parse_number(f[0], number);
        r.sup_rho_err = parse_number(f[1], number);
        r.u_err_L2W12 = parse_number(f[2], number);
        r.kinetic_gap = parse_number(f[3], number);
        r.eps_hdot_max = parse_number(f[4], number);
        r.energy_violation = parse_number(f[5], number);
        if (f[6] != "0" && f[6] != "1") throw ConfigError("report: theorem_regime must be 0 or 1");
        r.theorem_regime = f[6] == "1";
        rows.push_back(r);
    }
    return rows;
}

namespace {

/// JSON has no NaN; failed rungs carry null.
nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
double number(const nlohmann::json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

} // namespace

std::string sweep_json(const SweepConfig& config, const std::vector<RungReport>& reports) {
    nlohmann::json doc;
    const std::string ini = to_ini(config);
    doc["config"] = ini;
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(ini)));
    doc["config_hash"] = hash;
    doc["columns"] = sweep_csv_header;
    nlohmann::json rows = nlohmann::json::array();
    for (const RungReport& r : reports) {
        nlohmann::json j;
        j["eps"] = r.row.eps;
        j["sup_rho_err"] = number(r.row.sup_rho_err);
        j["u_err_L2W12"] = number(r.row.u_err_L2W12);
        j["kinetic_gap"] = number(r.row.kinetic_gap);
        j["eps_hdot_max"] = number(r.row.eps_hdot_max);
        j["energy_violation"] = number(r.row.energy_violation);
        j["theorem_regime"] = r.row.theorem_regime;
        j["ok"] = r.ok;
        if (!r.ok) j["failure"] = r.failure;
        j["cells"] = r.cells;
        j["steps"] = r.steps;
        j["reference_steps"] = r.reference_steps;
        j["energy_tolerance"] = r.energy_tolerance;
        j["max_mass_drift"] = r.max_mass_drift;
        j["min_rho"] = r.min_rho;
        j["seconds"] = r.seconds;
        rows.push_back(j);
    }
    doc["rows"] = rows;
    return doc.dump(2) + "\n";
}

std::vector<SweepRow> parse_sweep_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("report is not valid JSON: ") + e.what());
    }
    std::vector<SweepRow> rows;
    try {
        for (const auto& j : doc.at("rows")) {
            SweepRow r;
            r.eps = j.at("eps").get<double>();
            r.sup_rho_err = number(j.at("sup_rho_err"));
            r.u_err_L2W12 = number(j.at("u_err_L2W12"));
            r.kinetic_gap = number(j.at("kinetic_gap"));
            r.eps_hdot_max = number(j.at("eps_hdot_max"));
            r.energy_violation = number(j.at("energy_violation"));
            r.theorem_regime = j.at("theorem_regime").get<bool>();
            rows.push_back(r);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("report JSON is missing fields: ") + e.what());
    }
    return rows;
}

std::uint64_t config_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace lmfsi
