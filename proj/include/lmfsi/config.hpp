/// @file config.hpp
/// @brief INI run files: [fluid] [grid] [solver] [body] [sweep] sections, unknown keys rejected.
///
/// Keys (all optional, defaults from default_sweep_config):
///   [fluid]  a gamma mu lambda rho_bar eps m
///   [grid]   cells side_length          (cells = 0 selects the eps-dependent grid rule)
///   [solver] dt_safety penalization_eta t_end snapshots stream_amplitude density_perturbation seed
///   [body]   mode=prescribed|coupled path=circle|grazing|custom center_x center_y radius period
///            clockwise phase density_exponent start_x start_y velocity_x velocity_y beta0 omega0
///   [sweep]  eps=0.16,0.08,0.04 min_cells cells_per_unit max_cells jobs out
#pragma once

#include <string>

#include "lmfsi/harness.hpp"

namespace lmfsi {

/// Throws ConfigError on syntax errors, unknown sections or keys, and invalid values.
SweepConfig parse_config(const std::string& text);
/// Throws ConfigError naming the path if the file cannot be read.
SweepConfig load_config(const std::string& path);

/// Canonical INI text; parse_config(to_ini(c)) reproduces c exactly.
std::string to_ini(const SweepConfig& config);

} // namespace lmfsi
