/// @file output.hpp
/// @brief Run directories: binary snapshots, energy and body-path CSVs and a
///        JSON manifest naming every artifact with its config hash.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lmfsi/compressible.hpp"
#include "lmfsi/harness.hpp"
#include "lmfsi/incompressible.hpp"

namespace lmfsi {

inline constexpr const char* energy_csv_header = "t,kinetic,pressure_energy,dissipation_accum,total,mass,eps_hdot";
inline constexpr const char* body_csv_header = "t,h_x,h_y,beta,hdot_x,hdot_y,beta_dot";

std::string energy_csv(const std::vector<EnergyRow>& rows);
/// Rows carry kinetic, pressure_energy, dissipation_accum and total; body_exchange is not stored.
std::vector<EnergyRow> parse_energy_csv(const std::string& text);
std::string body_csv(const std::vector<Snapshot>& snapshots);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Writes rho_NNNN.bin / u_NNNN.bin (if the snapshots carry fields), energy.csv, body.csv
/// and manifest.json into dir.
void write_run(const std::filesystem::path& dir, const std::string& config_text, const Trajectory& trajectory);

/// Writes u_NNNN.bin / pressure_NNNN.bin, energy.csv and manifest.json into dir.
void write_reference(const std::filesystem::path& dir, const std::string& config_text, const SolverConfig& config,
                     const IncTrajectory& trajectory);

/// Writes sweep.csv, sweep.json and manifest.json into dir.
void write_sweep(const std::filesystem::path& dir, const SweepConfig& config, const std::vector<RungReport>& reports);

struct EnergyCheck {
    double violation = 0.0;   ///< max_t (total(t) - total(0))^+
    double tolerance = 0.0;   ///< from the manifest; 0 if absent
    std::size_t rows = 0;
    bool ok() const { return violation <= tolerance; }
};

/// Re-validates the energy inequality of a run directory (or a bare energy CSV file).
/// Throws ConfigError if the files are missing or malformed.
EnergyCheck check_energy(const std::filesystem::path& dir_or_csv);

} // namespace lmfsi
