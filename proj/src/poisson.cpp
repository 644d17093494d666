/// @file poisson.cpp
/// DCT-II diagonalizes the Neumann 5-point Laplacian on cell centers:
/// eigenvalues (2cos(pi k/n) - 2)/h^2 in each direction.
#include "lmfsi/poisson.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "lmfsi/errors.hpp"

namespace lmfsi {

namespace {

/// fftw planning is not thread-safe; execution with the new-array interface is.
struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

PlanPair plans_for(int nx, int ny) {
    static std::map<std::pair<int, int>, PlanPair> cache;
    std::lock_guard lock(plan_mutex());
    auto it = cache.find({nx, ny});
    if (it != cache.end()) return it->second;
    double* buf = fftw_alloc_real(static_cast<std::size_t>(nx) * ny);
    PlanPair p;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p.forward = fftw_plan_r2r_2d(ny, nx, buf, buf, FFTW_REDFT10, FFTW_REDFT10, flags);
    p.backward = fftw_plan_r2r_2d(ny, nx, buf, buf, FFTW_REDFT01, FFTW_REDFT01, flags);
    fftw_free(buf);
    cache.emplace(std::pair{nx, ny}, p);
    return p;
}

double l2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace

ScalarField neumann_laplacian(const ScalarField& q) {
    const int nx = q.nx(), ny = q.ny();
    const double inv_h2 = 1.0 / (q.grid().h() * q.grid().h());
    ScalarField out(q.grid());
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double c = q(i, j);
            double s = 0.0;
            if (i > 0) s += q(i - 1, j) - c;
            if (i < nx - 1) s += q(i + 1, j) - c;
            if (j > 0) s += q(i, j - 1) - c;
            if (j < ny - 1) s += q(i, j + 1) - c;
            out(i, j) = s * inv_h2;
        }
    return out;
}

PoissonResult solve_neumann_poisson(const ScalarField& rhs_in, double tolerance, int max_iterations) {
    const GridSpec& g = rhs_in.grid();
    const int nx = g.nx, ny = g.ny;
    const double h = g.h();
    const PlanPair plans = plans_for(nx, ny);

    ScalarField rhs = rhs_in;
    double mean = 0.0;
    for (double v : rhs.data()) mean += v;
    mean /= static_cast<double>(rhs.data().size());
    for (double& v : rhs.data()) v -= mean;

    std::vector<double> lam_x(nx), lam_y(ny);
    for (int k = 0; k < nx; ++k) lam_x[k] = (2.0 * std::cos(M_PI * k / nx) - 2.0) / (h * h);
    for (int k = 0; k < ny; ++k) lam_y[k] = (2.0 * std::cos(M_PI * k / ny) - 2.0) / (h * h);
    const double norm = 4.0 * nx * ny;

    PoissonResult result{ScalarField(g), 0.0, 0};
    const double rhs_norm = l2(rhs.data());
    if (rhs_norm == 0.0) return result;

    std::vector<double> defect = rhs.data();
    for (int it = 1; it <= max_iterations; ++it) {
        fftw_execute_r2r(plans.forward, defect.data(), defect.data());
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const double lam = lam_x[i] + lam_y[j];
                auto& v = defect[static_cast<std::size_t>(j) * nx + i];
                v = (i == 0 && j == 0) ? 0.0 : v / (lam * norm);
            }
        fftw_execute_r2r(plans.backward, defect.data(), defect.data());
        for (std::size_t k = 0; k < defect.size(); ++k) result.solution.data()[k] += defect[k];

        const ScalarField applied = neumann_laplacian(result.solution);
        for (std::size_t k = 0; k < defect.size(); ++k) defect[k] = rhs.data()[k] - applied.data()[k];
        result.iterations = it;
        result.relative_residual = l2(defect) / rhs_norm;
        if (result.relative_residual <= tolerance) return result;
    }
    throw SolverError("Poisson solve did not reach tolerance " + std::to_string(tolerance) +
                      "; final relative residual " + std::to_string(result.relative_residual));
}

} // namespace lmfsi
