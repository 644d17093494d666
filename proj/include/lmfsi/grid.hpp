/// @file grid.hpp
/// @brief Uniform MAC grid on a square, staggered fields, discrete operators and norms.
///
/// Layout conventions (all arrays row-major, j is the slow index):
///   - ScalarField: cell centers ((i+1/2)h, (j+1/2)h), i < nx, j < ny
///   - VectorField: x-components on vertical faces (i h, (j+1/2)h), i <= nx;
///                  y-components on horizontal faces ((i+1/2)h, j h), j <= ny
///   - NodeField:   cell corners (i h, j h), i <= nx, j <= ny
///
/// Wall-normal face values (i = 0, nx for x; j = 0, ny for y) are part of the
/// arrays. Solvers keep them at zero; the generic operators treat them as data.
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace lmfsi {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    /// x^perp = (-x2, x1)
    Vec2 perp() const { return {-y, x}; }
    bool operator==(const Vec2&) const = default;
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

struct GridSpec {
    int nx = 64;
    int ny = 64;
    double side_length = 1.0;

    double h() const { return side_length / nx; }
    std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }

    /// Throws DomainError unless nx == ny >= 8 and side_length > 0.
    void validate() const;

    static GridSpec square(int n, double side = 1.0);

    bool operator==(const GridSpec&) const = default;
};

// ============================================================================
// Fields
// ============================================================================

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(GridSpec grid, double fill = 0.0);

    const GridSpec& grid() const { return grid_; }
    int nx() const { return grid_.nx; }
    int ny() const { return grid_.ny; }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(j) * grid_.nx + i]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(j) * grid_.nx + i]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    Vec2 center(int i, int j) const { return {(i + 0.5) * grid_.h(), (j + 0.5) * grid_.h()}; }

    /// Sample f(x, y) at cell centers.
    template <class F>
    static ScalarField sample(GridSpec grid, F&& f) {
        ScalarField out(grid);
        const double h = grid.h();
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) out(i, j) = f((i + 0.5) * h, (j + 0.5) * h);
        return out;
    }

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double s);

private:
    GridSpec grid_{};
    std::vector<double> data_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// Values at cell corners; the natural home of a discrete stream function.
class NodeField {
public:
    NodeField() = default;
    explicit NodeField(GridSpec grid, double fill = 0.0);

    const GridSpec& grid() const { return grid_; }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(j) * (grid_.nx + 1) + i]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(j) * (grid_.nx + 1) + i]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    template <class F>
    static NodeField sample(GridSpec grid, F&& f) {
        NodeField out(grid);
        const double h = grid.h();
        for (int j = 0; j <= grid.ny; ++j)
            for (int i = 0; i <= grid.nx; ++i) out(i, j) = f(i * h, j * h);
        return out;
    }

private:
    GridSpec grid_{};
    std::vector<double> data_;
};

class VectorField {
public:
    VectorField() = default;
    explicit VectorField(GridSpec grid, double fill = 0.0);

    const GridSpec& grid() const { return grid_; }
    int nx() const { return grid_.nx; }
    int ny() const { return grid_.ny; }

    /// x-component on vertical face i (0..nx), row j (0..ny-1)
    double& x(int i, int j) { return ux_[static_cast<std::size_t>(j) * (grid_.nx + 1) + i]; }
    double x(int i, int j) const { return ux_[static_cast<std::size_t>(j) * (grid_.nx + 1) + i]; }
    /// y-component on horizontal face j (0..ny), column i (0..nx-1)
    double& y(int i, int j) { return uy_[static_cast<std::size_t>(j) * grid_.nx + i]; }
    double y(int i, int j) const { return uy_[static_cast<std::size_t>(j) * grid_.nx + i]; }

    std::vector<double>& xs() { return ux_; }
    const std::vector<double>& xs() const { return ux_; }
    std::vector<double>& ys() { return uy_; }
    const std::vector<double>& ys() const { return uy_; }

    Vec2 x_face(int i, int j) const { return {i * grid_.h(), (j + 0.5) * grid_.h()}; }
    Vec2 y_face(int i, int j) const { return {(i + 0.5) * grid_.h(), j * grid_.h()}; }

    /// Sample a vector function g(x, y) -> Vec2 at the face locations of each component.
    template <class G>
    static VectorField sample(GridSpec grid, G&& g) {
        VectorField out(grid);
        const double h = grid.h();
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i <= grid.nx; ++i) out.x(i, j) = g(i * h, (j + 0.5) * h).x;
        for (int j = 0; j <= grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) out.y(i, j) = g((i + 0.5) * h, j * h).y;
        return out;
    }

    /// Component-wise velocity interpolated to cell (i, j) center.
    Vec2 at_center(int i, int j) const {
        return {0.5 * (x(i, j) + x(i + 1, j)), 0.5 * (y(i, j) + y(i, j + 1))};
    }

    VectorField& operator+=(const VectorField& o);
    VectorField& operator-=(const VectorField& o);
    VectorField& operator*=(double s);

    double max_abs() const;

private:
    GridSpec grid_{};
    std::vector<double> ux_;
    std::vector<double> uy_;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);

/// Smoothed indicator of a disk, sampled at cell centers. Weights lie in [0, 1].
struct BodyMask {
    ScalarField weights;

    /// Sum of weights times cell area.
    double area() const;
    /// 1 - weights: the fluid-region weights used by masked norms.
    ScalarField complement() const;
};

// ============================================================================
// Operators
// ============================================================================

/// Face-centered differences. Wall faces use a linearly extrapolated ghost,
/// so affine fields are reproduced exactly everywhere.
VectorField gradient(const ScalarField& f);

/// Cell-centered flux difference of all face values.
ScalarField divergence(const VectorField& v);

/// (-d_y psi, d_x psi) from corner values; divergence of the result vanishes identically.
VectorField perp_gradient(const NodeField& psi);

/// Center values are averaged to corners (linear extrapolation across walls), then the nodal curl.
VectorField perp_gradient(const ScalarField& psi);

/// divergence(gradient(f)): the 5-point stencil in the interior.
ScalarField laplacian(const ScalarField& f);

/// 5-point Laplacian of each component with no-slip ghosts (tangential values odd across walls).
/// Wall-normal faces are returned as zero.
VectorField vector_laplacian(const VectorField& v);

/// Corner average of center values with linearly extrapolated ghosts.
NodeField to_nodes(const ScalarField& f);

// ============================================================================
// Norms and inner products
// ============================================================================

/// (sum |f|^p w h^2)^(1/p); p = infinity gives the (weighted-support) max norm.
/// Throws DomainError for p < 1 or NaN.
double norm_Lp(const ScalarField& f, double p, const ScalarField* weights = nullptr);

/// L2 norm of a face field with trapezoidal weights (wall faces count half).
double norm_L2(const VectorField& v);

/// sqrt(||v||^2 + ||grad v||^2), gradients from differences of neighbouring face values.
double norm_W12(const VectorField& v);

/// sum f g h^2
double inner(const ScalarField& f, const ScalarField& g);
/// sum over all faces of u.v h^2 (no trapezoid weights)
double inner(const VectorField& u, const VectorField& v);

double max_abs(const ScalarField& f);

// ============================================================================
// Masks
// ============================================================================

/// Linear ramp over one cell width on the signed distance d = |x - c| - r:
/// weight = clamp(1/2 - d/h, 0, 1).
inline double mask_weight(double signed_distance, double h) {
    const double w = 0.5 - signed_distance / h;
    return w < 0.0 ? 0.0 : (w > 1.0 ? 1.0 : w);
}

BodyMask body_mask(const GridSpec& grid, Vec2 center, double radius);

/// Mask weights at the face locations of a VectorField (used for face-based penalization).
VectorField face_mask(const GridSpec& grid, Vec2 center, double radius);

/// Euclidean distance from p to the boundary of [0, L]^2; negative outside.
double distance_to_boundary(Vec2 p, double side_length);

} // namespace lmfsi
