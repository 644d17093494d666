/// @file output.cpp
#include "lmfsi/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "lmfsi/errors.hpp"
#include "lmfsi/field_io.hpp"

namespace lmfsi {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw SolverError("cannot write " + path.string());
    f << text;
    if (!f) throw SolverError("write failed: " + path.string());
}

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hash_hex(const std::string& text) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(text)));
    return buf;
}

std::string numbered(const char* stem, std::size_t k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04zu.bin", stem, k);
    return buf;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw SolverError("cannot create " + dir.string() + ": " + ec.message());
}

nlohmann::json artifact(const std::string& name, const std::string& kind, const std::string& hash) {
    return {{"file", name}, {"kind", kind}, {"config_hash", hash}};
}

} // namespace

std::string energy_csv(const std::vector<EnergyRow>& rows) {
    std::string out = std::string(energy_csv_header) + "\n";
    for (const EnergyRow& r : rows)
        out += g17(r.t) + "," + g17(r.energy.kinetic) + "," + g17(r.energy.pressure_energy) + "," +
               g17(r.energy.dissipation_accum) + "," + g17(r.energy.total) + "," + g17(r.mass) + "," +
               g17(r.eps_hdot) + "\n";
    return out;
}

std::vector<EnergyRow> parse_energy_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("energy CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != energy_csv_header) throw ConfigError("energy CSV header mismatch: '" + line + "'");
    std::vector<EnergyRow> rows;
    int number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> v;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) {
            std::size_t used = 0;
            double d = 0.0;
            try {
                d = std::stod(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != cell.size())
                throw ConfigError("energy CSV line " + std::to_string(number) + ": malformed number '" + cell + "'");
            v.push_back(d);
        }
        if (v.size() != 7) throw ConfigError("energy CSV line " + std::to_string(number) + ": expected 7 columns");
        EnergyRow r;
        r.t = v[0];
        r.energy.kinetic = v[1];
        r.energy.pressure_energy = v[2];
        r.energy.dissipation_accum = v[3];
        r.energy.total = v[4];
        r.mass = v[5];
        r.eps_hdot = v[6];
        rows.push_back(r);
    }
    return rows;
}

std::string body_csv(const std::vector<Snapshot>& snaps) {
    std::string out = std::string(body_csv_header) + "\n";
    for (const Snapshot& s : snaps)
        out += g17(s.t) + "," + g17(s.body.h.x) + "," + g17(s.body.h.y) + "," + g17(s.body.beta) + "," +
               g17(s.body.h_dot.x) + "," + g17(s.body.h_dot.y) + "," + g17(s.body.beta_dot) + "\n";
    return out;
}

void write_run(const fs::path& dir, const std::string& config_text, const Trajectory& tr) {
    ensure_dir(dir);
    const std::string hash = hash_hex(config_text);
    nlohmann::json m;
    m["kind"] = "compressible";
    m["config"] = config_text;
    m["config_hash"] = hash;
    nlohmann::json artifacts = nlohmann::json::array(), times = nlohmann::json::array();
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
        const Snapshot& s = tr.snapshots[k];
        times.push_back(s.t);
        if (s.rho.data().empty()) continue;
        write_field(dir / numbered("rho", k), s.rho);
        write_field(dir / numbered("u", k), s.u);
        artifacts.push_back(artifact(numbered("rho", k), "scalar_field", hash));
        artifacts.push_back(artifact(numbered("u", k), "vector_field", hash));
    }
    write_text(dir / "energy.csv", energy_csv(tr.energy));
    write_text(dir / "body.csv", body_csv(tr.snapshots));
    artifacts.push_back(artifact("energy.csv", "energy", hash));
    artifacts.push_back(artifact("body.csv", "body_path", hash));
    m["times"] = times;
    m["artifacts"] = artifacts;
    const RunDiagnostics& d = tr.diag;
    m["diagnostics"] = {{"steps", d.steps},
                        {"dt_min", d.dt_min},
                        {"dt_max", d.dt_max},
                        {"peak_dissipation_rate", d.peak_dissipation_rate},
                        {"max_mass_drift", d.max_mass_drift},
                        {"min_rho_before_clamp", d.min_rho_before_clamp},
                        {"clamp_events", d.clamp_events},
                        {"max_eps_hdot", d.max_eps_hdot},
                        {"energy_violation", d.energy_violation},
                        {"energy_tolerance", d.energy_tolerance},
                        {"theorem_regime", tr.config.params.theorem_regime()}};
    m["energy_tolerance"] = d.energy_tolerance;
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

void write_reference(const fs::path& dir, const std::string& config_text, const SolverConfig& config,
                     const IncTrajectory& tr) {
    ensure_dir(dir);
    const std::string hash = hash_hex(config_text);
    const double L = config.grid.side_length;
    nlohmann::json m;
    m["kind"] = "incompressible";
    m["config"] = config_text;
    m["config_hash"] = hash;
    nlohmann::json artifacts = nlohmann::json::array(), times = nlohmann::json::array();
    std::vector<EnergyRow> rows;
    double max_div = 0.0;
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
        const IncSnapshot& s = tr.snapshots[k];
        times.push_back(s.t);
        write_field(dir / numbered("u", k), s.u);
        write_field(dir / numbered("pressure", k), s.pressure);
        artifacts.push_back(artifact(numbered("u", k), "vector_field", hash));
        artifacts.push_back(artifact(numbered("pressure", k), "scalar_field", hash));
        EnergyRow r;
        r.t = s.t;
        r.energy.kinetic = r.energy.total = s.kinetic;
        r.mass = config.params.rho_bar * L * L;
        rows.push_back(r);
        max_div = std::max(max_div, s.max_divergence);
    }
    write_text(dir / "energy.csv", energy_csv(rows));
    artifacts.push_back(artifact("energy.csv", "energy", hash));
    m["times"] = times;
    m["artifacts"] = artifacts;
    m["energy_tolerance"] = 0.0;
    m["diagnostics"] = {{"steps", tr.steps}, {"dt_max", tr.dt_max}, {"max_divergence", max_div}};
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

void write_sweep(const fs::path& dir, const SweepConfig& config, const std::vector<RungReport>& reports) {
    ensure_dir(dir);
    const std::string json = sweep_json(config, reports);
    const std::string hash = nlohmann::json::parse(json).at("config_hash").get<std::string>();
    write_text(dir / "sweep.csv", sweep_csv(rows_of(reports)));
    write_text(dir / "sweep.json", json);
    nlohmann::json m;
    m["kind"] = "sweep";
    m["config_hash"] = hash;
    m["artifacts"] = nlohmann::json::array({artifact("sweep.csv", "report", hash), artifact("sweep.json", "report", hash)});
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

EnergyCheck check_energy(const fs::path& where) {
    fs::path csv = where, manifest;
    if (fs::is_directory(where)) {
        csv = where / "energy.csv";
        manifest = where / "manifest.json";
    } else if (fs::exists(where.parent_path() / "manifest.json")) {
        manifest = where.parent_path() / "manifest.json";
    }
    if (!fs::exists(csv)) throw ConfigError("energy CSV not found: " + csv.string());
    const std::vector<EnergyRow> rows = parse_energy_csv(read_text(csv));
    EnergyCheck c;
    c.rows = rows.size();
    if (!manifest.empty() && fs::exists(manifest)) {
        try {
            const auto j = nlohmann::json::parse(read_text(manifest));
            c.tolerance = j.value("energy_tolerance", 0.0);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("malformed manifest " + manifest.string() + ": " + e.what());
        }
    }
    if (rows.empty()) return c;
    const double e0 = rows.front().energy.total;
    for (const EnergyRow& r : rows) {
        if (!std::isfinite(r.energy.total)) {
            c.violation = std::numeric_limits<double>::infinity();
            break;
        }
        c.violation = std::max(c.violation, r.energy.total - e0);
    }
    return c;
}

} // namespace lmfsi
