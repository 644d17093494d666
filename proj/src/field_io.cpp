/// @file field_io.cpp
#include "lmfsi/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

#include "lmfsi/errors.hpp"

namespace lmfsi {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
}

template <class T>
void put(std::ofstream& os, T v) {
    v = to_little(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is, const std::filesystem::path& path) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("truncated field file: " + path.string());
    return to_little(v);
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::binary) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, mode);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    return os;
}

void write_header(std::ofstream& os, const GridSpec& g) {
    put<std::int64_t>(os, g.nx);
    put<std::int64_t>(os, g.ny);
    put<double>(os, g.side_length);
}

GridSpec read_header(std::ifstream& is, const std::filesystem::path& path) {
    GridSpec g;
    g.nx = static_cast<int>(get<std::int64_t>(is, path));
    g.ny = static_cast<int>(get<std::int64_t>(is, path));
    g.side_length = get<double>(is, path);
    g.validate();
    return g;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open field file: " + path.string());
    return is;
}

} // namespace

void write_field(const std::filesystem::path& path, const ScalarField& f) {
    auto os = open_out(path);
    write_header(os, f.grid());
    for (double v : f.data()) put(os, v);
}

void write_field(const std::filesystem::path& path, const VectorField& v) {
    auto os = open_out(path);
    write_header(os, v.grid());
    for (double x : v.xs()) put(os, x);
    for (double y : v.ys()) put(os, y);
}

ScalarField read_scalar_field(const std::filesystem::path& path) {
    auto is = open_in(path);
    ScalarField f(read_header(is, path));
    for (double& v : f.data()) v = get<double>(is, path);
    return f;
}

VectorField read_vector_field(const std::filesystem::path& path) {
    auto is = open_in(path);
    VectorField v(read_header(is, path));
    for (double& x : v.xs()) x = get<double>(is, path);
    for (double& y : v.ys()) y = get<double>(is, path);
    return v;
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& f) {
    auto os = open_out(path, std::ios::out);
    os << "x,y,value\n";
    char buf[96];
    for (int j = 0; j < f.ny(); ++j)
        for (int i = 0; i < f.nx(); ++i) {
            const Vec2 c = f.center(i, j);
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", c.x, c.y, f(i, j));
            os << buf;
        }
}

} // namespace lmfsi
