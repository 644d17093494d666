/// @file test_output.cpp
/// @brief Run directories, manifests and the stored-energy check.
#include "doctest.h"

#include <filesystem>

#include "json.hpp"

#include "lmfsi/config.hpp"
#include "lmfsi/errors.hpp"
#include "lmfsi/field_io.hpp"
#include "lmfsi/output.hpp"

using namespace lmfsi;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

SweepConfig small() {
    SweepConfig c = default_sweep_config();
    c.eps_ladder = {0.16};
    c.fixed_cells = 16;
    c.base.t_end = 0.02;
    c.base.snapshots = 2;
    return c;
}

} // namespace

TEST_CASE("energy CSV round trip") {
    std::vector<EnergyRow> rows(2);
    rows[0].t = 0.0;
    rows[0].energy = {1.0 / 3.0, 1e-17, 0.0, 0.0, 1.0 / 3.0};
    rows[0].mass = 1.0;
    rows[1].t = 0.1;
    rows[1].energy = {0.3, 2e-5, 0.01, 0.0, 0.31002};
    rows[1].mass = 1.0 - 1e-16;
    rows[1].eps_hdot = 0.5;
    const std::string csv = energy_csv(rows);
    CHECK(csv.rfind("t,kinetic,pressure_energy,dissipation_accum,total,mass,eps_hdot\n", 0) == 0);
    const std::vector<EnergyRow> back = parse_energy_csv(csv);
    REQUIRE(back.size() == 2);
    CHECK(back[1].energy.total == rows[1].energy.total);
    CHECK(back[0].energy.kinetic == rows[0].energy.kinetic);
    CHECK(back[1].mass == rows[1].mass);
    CHECK(back[1].eps_hdot == 0.5);
    CHECK_THROWS_AS(parse_energy_csv(""), ConfigError);
    CHECK_THROWS_AS(parse_energy_csv("t,total\n"), ConfigError);
    CHECK_THROWS_AS(parse_energy_csv(std::string(energy_csv_header) + "\n1,2,3\n"), ConfigError);
}

TEST_CASE("run directory") {
    TempDir dir("lmfsi_test_run");
    const SweepConfig c = small();
    const Trajectory tr = run(c.rung(0.16));
    write_run(dir.path, to_ini(c), tr);
    for (const char* f : {"manifest.json", "energy.csv", "body.csv", "rho_0000.bin", "u_0002.bin"})
        CHECK(fs::exists(dir.path / f));
    const auto m = nlohmann::json::parse(read_text(dir.path / "manifest.json"));
    const std::string hash = m.at("config_hash");
    CHECK(hash.size() == 16);
    CHECK(m.at("artifacts").size() == 8);
    for (const auto& a : m.at("artifacts")) {
        CHECK(a.at("config_hash") == hash);
        CHECK(fs::exists(dir.path / a.at("file").get<std::string>()));
    }
    CHECK(m.at("times").size() == 3);
    CHECK(read_scalar_field(dir.path / "rho_0002.bin").data() == tr.snapshots[2].rho.data());
    const std::string body = read_text(dir.path / "body.csv");
    CHECK(body.rfind("t,h_x,h_y,beta,hdot_x,hdot_y,beta_dot\n", 0) == 0);

    const EnergyCheck ok = check_energy(dir.path);
    CHECK(ok.rows == 3);
    CHECK(ok.ok());
    CHECK(ok.tolerance == tr.diag.energy_tolerance);

    SUBCASE("a tampered total fails the check") {
        std::vector<EnergyRow> rows = parse_energy_csv(read_text(dir.path / "energy.csv"));
        rows.back().energy.total += 1.0;
        write_text(dir.path / "energy.csv", energy_csv(rows));
        const EnergyCheck bad = check_energy(dir.path);
        CHECK_FALSE(bad.ok());
        CHECK(bad.violation > 0.5);
        CHECK_FALSE(check_energy(dir.path / "energy.csv").ok());
    }
    SUBCASE("missing files") {
        CHECK_THROWS_AS(check_energy(dir.path / "nope"), ConfigError);
        fs::remove(dir.path / "energy.csv");
        CHECK_THROWS_AS(check_energy(dir.path), ConfigError);
    }
}

TEST_CASE("reference and sweep directories") {
    TempDir dir("lmfsi_test_ref");
    const SweepConfig c = small();
    const SolverConfig sc = c.rung(0.16);
    write_reference(dir.path / "ref", to_ini(c), sc, run_reference(sc));
    CHECK(fs::exists(dir.path / "ref" / "pressure_0001.bin"));
    CHECK(check_energy(dir.path / "ref").ok());

    const std::vector<RungReport> reps = run_sweep(c);
    write_sweep(dir.path / "sweep", c, reps);
    const std::vector<SweepRow> rows = parse_sweep_csv(read_text(dir.path / "sweep" / "sweep.csv"));
    CHECK(rows == rows_of(reps));
    CHECK(parse_sweep_json(read_text(dir.path / "sweep" / "sweep.json")) == rows);
    const auto m = nlohmann::json::parse(read_text(dir.path / "sweep" / "manifest.json"));
    CHECK(m.at("artifacts").size() == 2);
}
