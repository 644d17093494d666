/// @file harness.hpp
/// @brief eps-ladder sweeps comparing compressible runs with the incompressible
///        reference, and the report formats they produce.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lmfsi/compressible.hpp"
#include "lmfsi/incompressible.hpp"

namespace lmfsi {

enum class PathKind { circle, grazing, custom };

struct SweepConfig {
    SolverConfig base;              ///< everything except eps and the grid; base.params.m is the exponent
    std::vector<double> eps_ladder{0.16, 0.08, 0.04};
    int min_cells = 64;             ///< grid rule nx = max(min_cells, pow2(ceil(cells_per_unit / eps)))
    double cells_per_unit = 8.0;
    int max_cells = 0;              ///< 0: no cap
    int fixed_cells = 0;            ///< > 0 overrides the grid rule
    PathKind path_kind = PathKind::circle;
    std::string out_dir;
    int jobs = 1;

    /// Throws ConfigError unless the ladder is non-empty, strictly decreasing and inside (0, 1).
    void validate() const;
    int grid_cells(double eps) const;
    /// The solver setup of one ladder rung.
    SolverConfig rung(double eps) const;
};

/// a = 0.5, gamma = 2, mu = 0.01, lambda = 0, rho_bar = 1, V = 1, T = 0.5, 20 snapshot intervals,
/// clockwise circle of radius L/4 with period T.
SolverConfig default_solver_config();
SweepConfig default_sweep_config();

struct SweepRow {
    double eps = 0.0;
    double sup_rho_err = 0.0;      ///< sup_t ||rho - rho_bar||_{L^gamma(fluid)}
    double u_err_L2W12 = 0.0;      ///< (int_0^T ||u_eps - u||^2_{W^{1,2}} dt)^(1/2)
    double kinetic_gap = 0.0;      ///< sup_t |1/2 int rho |u_eps|^2 - 1/2 int rho_bar |u|^2|
    double eps_hdot_max = 0.0;
    double energy_violation = 0.0;
    bool theorem_regime = false;

    bool operator==(const SweepRow&) const = default;
};

/// Per-rung bookkeeping that is not part of the CSV contract.
struct RungReport {
    SweepRow row;
    bool ok = true;
    std::string failure;
    int cells = 0;
    long steps = 0;
    long reference_steps = 0;
    double energy_tolerance = 0.0;
    double max_mass_drift = 0.0;
    double min_rho = 0.0;
    double seconds = 0.0;
};

/// Metrics of one compressible trajectory (fields kept) against a reference.
SweepRow compare(const Trajectory& compressible, const IncTrajectory& reference);

/// Runs both solvers for one rung and returns the metrics; failures are recorded, not thrown.
RungReport run_rung(const SolverConfig& config);

/// Rungs run on a pool of config.jobs threads; results are ordered by eps descending.
std::vector<RungReport> run_sweep(const SweepConfig& config);

std::vector<SweepRow> rows_of(const std::vector<RungReport>& reports);

// ----------------------------------------------------------------------------
// Reports
// ----------------------------------------------------------------------------

inline constexpr const char* sweep_csv_header =
    "eps,sup_rho_err,u_err_L2W12,kinetic_gap,eps_hdot_max,energy_violation,theorem_regime";

/// Values printed with %.17g so parse_sweep_csv restores them exactly.
std::string sweep_csv(const std::vector<SweepRow>& rows);
/// Throws ConfigError on a wrong header or malformed line.
std::vector<SweepRow> parse_sweep_csv(const std::string& text);

/// JSON document with the config echo, the rows and the per-rung bookkeeping.
std::string sweep_json(const SweepConfig& config, const std::vector<RungReport>& reports);
std::vector<SweepRow> parse_sweep_json(const std::string& text);

/// FNV-1a over the canonical text form of a config.
std::uint64_t config_hash(const std::string& canonical_text);

} // namespace lmfsi
