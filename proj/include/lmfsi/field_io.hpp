/// @file field_io.hpp
/// @brief Flat binary and CSV serialization of grid fields.
///
/// Binary layout (little-endian): int64 nx, int64 ny, float64 L, then the
/// field values as float64 in row-major order. Vector fields store the
/// x-component array ((nx+1) * ny values) followed by the y-component array
/// (nx * (ny+1) values) after the same header.
#pragma once

#include <filesystem>

#include "lmfsi/grid.hpp"

namespace lmfsi {

void write_field(const std::filesystem::path& path, const ScalarField& f);
void write_field(const std::filesystem::path& path, const VectorField& v);

ScalarField read_scalar_field(const std::filesystem::path& path);
VectorField read_vector_field(const std::filesystem::path& path);

/// Rows "x,y,value" for every cell center, with a header line.
void write_field_csv(const std::filesystem::path& path, const ScalarField& f);

} // namespace lmfsi
