/// @file test_cli.cpp
/// @brief Exit codes and outputs of the command-line tool.
#include "doctest.h"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "lmfsi/output.hpp"

using namespace lmfsi;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string output;
};

/// Runs the tool with stderr folded into the captured output.
Result cli(const std::string& args) {
    const std::string cmd = std::string(LMFSI_CLI_PATH) + " " + args + " 2>&1";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf;
    while (std::fgets(buf.data(), buf.size(), p)) r.output += buf.data();
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(cli("").code == 2);
    const Result unknown = cli("run --bogus 1");
    CHECK(unknown.code == 2);
    CHECK(unknown.output.find("Usage") != std::string::npos);
    CHECK(cli("launch").code == 2);
    CHECK(cli("run --mode floating").code == 2);
    CHECK(cli("run --jobs 0").code == 2);
    const Result missing = cli("sweep --config /nonexistent/sweep.ini");
    CHECK(missing.code == 2);
    CHECK(missing.output.find("/nonexistent/sweep.ini") != std::string::npos);
    CHECK(cli("sweep --eps 0.1,abc").code == 2);
    CHECK(cli("sweep --eps 0.05,0.1").code == 2);
    CHECK(cli("--help").code == 0);
}

TEST_CASE("run then check-energy, including a tampered file") {
    const fs::path out = scratch("lmfsi_test_cli_run");
    const fs::path cfg = out.string() + ".ini";
    std::ofstream(cfg) << "[solver]\nt_end = 0.02\nsnapshots = 2\n";
    const Result r = cli("run --config " + cfg.string() + " --eps 0.16 --grid 16 --out " + out.string());
    CHECK(r.code == 0);
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(cli("check-energy " + out.string()).code == 0);

    std::vector<EnergyRow> rows = parse_energy_csv(read_text(out / "energy.csv"));
    rows.back().energy.total = rows.front().energy.total + 0.5;
    write_text(out / "energy.csv", energy_csv(rows));
    const Result bad = cli("check-energy " + out.string());
    CHECK(bad.code == 1);
    CHECK(bad.output.find("VIOLATED") != std::string::npos);
    CHECK(cli("check-energy " + (out / "missing").string()).code == 2);
    fs::remove_all(out);
    fs::remove(cfg);
}

TEST_CASE("reference and sweep subcommands") {
    const fs::path cfg = scratch("lmfsi_test_cli.ini");
    std::ofstream(cfg) << "[solver]\nt_end = 0.02\nsnapshots = 2\n[grid]\ncells = 16\n";
    const Result ref = cli("reference --config " + cfg.string() + " --eps 0.16");
    CHECK(ref.code == 0);
    CHECK(ref.output.find("kinetic") != std::string::npos);

    const fs::path out = scratch("lmfsi_test_cli_sweep");
    const Result sw = cli("sweep --config " + cfg.string() + " --eps 0.2,0.16 --jobs 2 --seed 3 --out " + out.string());
    CHECK(sw.code == 0);
    CHECK(sw.output.find(std::string(sweep_csv_header)) != std::string::npos);
    CHECK(parse_sweep_csv(read_text(out / "sweep.csv")).size() == 2);
    fs::remove_all(out);
    fs::remove(cfg);
}
