/// @file grid.cpp
#include "lmfsi/grid.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "lmfsi/errors.hpp"

namespace lmfsi {

void GridSpec::validate() const {
    if (nx < 8) throw DomainError("grid: nx must be >= 8, got " + std::to_string(nx));
    if (ny != nx) throw DomainError("grid: only square grids are supported (nx == ny)");
    if (!(side_length > 0.0) || !std::isfinite(side_length)) throw DomainError("grid: side_length must be > 0");
}

GridSpec GridSpec::square(int n, double side) {
    GridSpec g{n, n, side};
    g.validate();
    return g;
}

// ============================================================================
// Field storage
// ============================================================================

ScalarField::ScalarField(GridSpec grid, double fill) : grid_(grid), data_(grid.cells(), fill) {}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}
ScalarField& ScalarField::operator-=(const ScalarField& o) {
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}
ScalarField& ScalarField::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}
ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

NodeField::NodeField(GridSpec grid, double fill)
    : grid_(grid), data_(static_cast<std::size_t>(grid.nx + 1) * (grid.ny + 1), fill) {}

VectorField::VectorField(GridSpec grid, double fill)
    : grid_(grid),
      ux_(static_cast<std::size_t>(grid.nx + 1) * grid.ny, fill),
      uy_(static_cast<std::size_t>(grid.nx) * (grid.ny + 1), fill) {}

VectorField& VectorField::operator+=(const VectorField& o) {
    for (std::size_t k = 0; k < ux_.size(); ++k) ux_[k] += o.ux_[k];
    for (std::size_t k = 0; k < uy_.size(); ++k) uy_[k] += o.uy_[k];
    return *this;
}
VectorField& VectorField::operator-=(const VectorField& o) {
    for (std::size_t k = 0; k < ux_.size(); ++k) ux_[k] -= o.ux_[k];
    for (std::size_t k = 0; k < uy_.size(); ++k) uy_[k] -= o.uy_[k];
    return *this;
}
VectorField& VectorField::operator*=(double s) {
    for (double& v : ux_) v *= s;
    for (double& v : uy_) v *= s;
    return *this;
}
double VectorField::max_abs() const {
    double m = 0.0;
    for (double v : ux_) m = std::max(m, std::abs(v));
    for (double v : uy_) m = std::max(m, std::abs(v));
    return m;
}
VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

double BodyMask::area() const {
    const double h = weights.grid().h();
    double s = 0.0;
    for (double w : weights.data()) s += w;
    return s * h * h;
}

ScalarField BodyMask::complement() const {
    ScalarField out = weights;
    for (double& w : out.data()) w = 1.0 - w;
    return out;
}

// ============================================================================
// Operators
// ============================================================================

namespace {

/// Center value with linearly extrapolated ghosts in both directions.
double extrapolated(const ScalarField& f, int i, int j) {
    const int nx = f.nx();
    const int ny = f.ny();
    auto col = [&](int jj) {
        if (i < 0) return 2.0 * f(0, jj) - f(1, jj);
        if (i >= nx) return 2.0 * f(nx - 1, jj) - f(nx - 2, jj);
        return f(i, jj);
    };
    if (j < 0) return 2.0 * col(0) - col(1);
    if (j >= ny) return 2.0 * col(ny - 1) - col(ny - 2);
    return col(j);
}

} // namespace

VectorField gradient(const ScalarField& f) {
    const GridSpec& g = f.grid();
    const int nx = g.nx, ny = g.ny;
    const double inv_h = 1.0 / g.h();
    VectorField out(g);
    for (int j = 0; j < ny; ++j) {
        for (int i = 1; i < nx; ++i) out.x(i, j) = (f(i, j) - f(i - 1, j)) * inv_h;
        out.x(0, j) = (f(1, j) - f(0, j)) * inv_h;
        out.x(nx, j) = (f(nx - 1, j) - f(nx - 2, j)) * inv_h;
    }
    for (int i = 0; i < nx; ++i) {
        for (int j = 1; j < ny; ++j) out.y(i, j) = (f(i, j) - f(i, j - 1)) * inv_h;
        out.y(i, 0) = (f(i, 1) - f(i, 0)) * inv_h;
        out.y(i, ny) = (f(i, ny - 1) - f(i, ny - 2)) * inv_h;
    }
    return out;
}

ScalarField divergence(const VectorField& v) {
    const GridSpec& g = v.grid();
    const double inv_h = 1.0 / g.h();
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out(i, j) = ((v.x(i + 1, j) - v.x(i, j)) + (v.y(i, j + 1) - v.y(i, j))) * inv_h;
    return out;
}

VectorField perp_gradient(const NodeField& psi) {
    const GridSpec& g = psi.grid();
    const double inv_h = 1.0 / g.h();
    VectorField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) out.x(i, j) = -(psi(i, j + 1) - psi(i, j)) * inv_h;
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) out.y(i, j) = (psi(i + 1, j) - psi(i, j)) * inv_h;
    return out;
}

NodeField to_nodes(const ScalarField& f) {
    const GridSpec& g = f.grid();
    NodeField out(g);
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            out(i, j) = 0.25 * (extrapolated(f, i - 1, j - 1) + extrapolated(f, i, j - 1) +
                                extrapolated(f, i - 1, j) + extrapolated(f, i, j));
    return out;
}

VectorField perp_gradient(const ScalarField& psi) { return perp_gradient(to_nodes(psi)); }

ScalarField laplacian(const ScalarField& f) { return divergence(gradient(f)); }

VectorField vector_laplacian(const VectorField& v) {
    const GridSpec& g = v.grid();
    const int nx = g.nx, ny = g.ny;
    const double inv_h2 = 1.0 / (g.h() * g.h());
    VectorField out(g);
    for (int j = 0; j < ny; ++j) {
        for (int i = 1; i < nx; ++i) {
            const double c = v.x(i, j);
            const double s = j > 0 ? v.x(i, j - 1) : -c;
            const double n = j < ny - 1 ? v.x(i, j + 1) : -c;
            out.x(i, j) = (v.x(i - 1, j) + v.x(i + 1, j) + s + n - 4.0 * c) * inv_h2;
        }
    }
    for (int j = 1; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double c = v.y(i, j);
            const double w = i > 0 ? v.y(i - 1, j) : -c;
            const double e = i < nx - 1 ? v.y(i + 1, j) : -c;
            out.y(i, j) = (w + e + v.y(i, j - 1) + v.y(i, j + 1) - 4.0 * c) * inv_h2;
        }
    }
    return out;
}

// ============================================================================
// Norms
// ============================================================================

double norm_Lp(const ScalarField& f, double p, const ScalarField* weights) {
    if (std::isnan(p) || p < 1.0) throw DomainError("norm_Lp: exponent must lie in [1, inf]");
    const double h2 = f.grid().h() * f.grid().h();
    const auto& d = f.data();
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t k = 0; k < d.size(); ++k)
            if (!weights || weights->data()[k] > 0.0) m = std::max(m, std::abs(d[k]));
        return m;
    }
    double s = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double w = weights ? weights->data()[k] : 1.0;
        if (w == 0.0) continue;
        const double a = std::abs(d[k]);
        s += (p == 2.0 ? a * a : (p == 1.0 ? a : std::pow(a, p))) * w;
    }
    s *= h2;
    return p == 2.0 ? std::sqrt(s) : std::pow(s, 1.0 / p);
}

double norm_L2(const VectorField& v) {
    const GridSpec& g = v.grid();
    const double h2 = g.h() * g.h();
    double s = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            const double w = (i == 0 || i == g.nx) ? 0.5 : 1.0;
            s += w * v.x(i, j) * v.x(i, j);
        }
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double w = (j == 0 || j == g.ny) ? 0.5 : 1.0;
            s += w * v.y(i, j) * v.y(i, j);
        }
    return std::sqrt(s * h2);
}

double norm_W12(const VectorField& v) {
    const GridSpec& g = v.grid();
    const int nx = g.nx, ny = g.ny;
    const double inv_h = 1.0 / g.h();
    const double h2 = g.h() * g.h();
    double grad = 0.0;
    // x-component: d/dx lives at centers, d/dy at interior corners
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double d = (v.x(i + 1, j) - v.x(i, j)) * inv_h;
            grad += d * d;
        }
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            const double w = (i == 0 || i == nx) ? 0.5 : 1.0;
            const double d = (v.x(i, j + 1) - v.x(i, j)) * inv_h;
            grad += w * d * d;
        }
    // y-component
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double d = (v.y(i, j + 1) - v.y(i, j)) * inv_h;
            grad += d * d;
        }
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            const double w = (j == 0 || j == ny) ? 0.5 : 1.0;
            const double d = (v.y(i + 1, j) - v.y(i, j)) * inv_h;
            grad += w * d * d;
        }
    const double l2 = norm_L2(v);
    return std::sqrt(l2 * l2 + grad * h2);
}

double inner(const ScalarField& f, const ScalarField& g) {
    double s = 0.0;
    for (std::size_t k = 0; k < f.data().size(); ++k) s += f.data()[k] * g.data()[k];
    const double h = f.grid().h();
    return s * h * h;
}

double inner(const VectorField& u, const VectorField& v) {
    double s = 0.0;
    for (std::size_t k = 0; k < u.xs().size(); ++k) s += u.xs()[k] * v.xs()[k];
    for (std::size_t k = 0; k < u.ys().size(); ++k) s += u.ys()[k] * v.ys()[k];
    const double h = u.grid().h();
    return s * h * h;
}

double max_abs(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.data()) m = std::max(m, std::abs(v));
    return m;
}

// ============================================================================
// Masks
// ============================================================================

BodyMask body_mask(const GridSpec& grid, Vec2 center, double radius) {
    if (!(radius > 0.0)) throw DomainError("body_mask: radius must be positive");
    BodyMask m{ScalarField(grid)};
    const double h = grid.h();
    const double reach = radius + h;
    const int i0 = std::max(0, static_cast<int>(std::floor((center.x - reach) / h)) - 1);
    const int i1 = std::min(grid.nx - 1, static_cast<int>(std::ceil((center.x + reach) / h)) + 1);
    const int j0 = std::max(0, static_cast<int>(std::floor((center.y - reach) / h)) - 1);
    const int j1 = std::min(grid.ny - 1, static_cast<int>(std::ceil((center.y + reach) / h)) + 1);
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            const Vec2 c{(i + 0.5) * h, (j + 0.5) * h};
            m.weights(i, j) = mask_weight((c - center).norm() - radius, h);
        }
    return m;
}

VectorField face_mask(const GridSpec& grid, Vec2 center, double radius) {
    if (!(radius > 0.0)) throw DomainError("face_mask: radius must be positive");
    VectorField m(grid);
    const double h = grid.h();
    const double reach = radius + h;
    const int i0 = std::max(0, static_cast<int>(std::floor((center.x - reach) / h)) - 1);
    const int i1 = std::min(grid.nx, static_cast<int>(std::ceil((center.x + reach) / h)) + 1);
    const int j0 = std::max(0, static_cast<int>(std::floor((center.y - reach) / h)) - 1);
    const int j1 = std::min(grid.ny, static_cast<int>(std::ceil((center.y + reach) / h)) + 1);
    for (int j = j0; j <= std::min(j1, grid.ny - 1); ++j)
        for (int i = i0; i <= i1; ++i)
            m.x(i, j) = mask_weight((Vec2{i * h, (j + 0.5) * h} - center).norm() - radius, h);
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= std::min(i1, grid.nx - 1); ++i)
            m.y(i, j) = mask_weight((Vec2{(i + 0.5) * h, j * h} - center).norm() - radius, h);
    return m;
}

double distance_to_boundary(Vec2 p, double L) {
    const bool inside = p.x >= 0.0 && p.x <= L && p.y >= 0.0 && p.y <= L;
    if (inside) return std::min({p.x, L - p.x, p.y, L - p.y});
    const double dx = std::max({-p.x, 0.0, p.x - L});
    const double dy = std::max({-p.y, 0.0, p.y - L});
    return -std::hypot(dx, dy);
}

} // namespace lmfsi
