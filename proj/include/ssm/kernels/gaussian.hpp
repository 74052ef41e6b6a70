// Gaussian kernel sums over particle position arrays — the hot inner
// loops of the entropy optimization. A scalar reference implementation
// and an AVX2 variant share this interface; the active backend is chosen
// at runtime from CPU capabilities and can be overridden for testing.
// Positions are SoA (separate x/y/z arrays) in mm.
#pragma once

#include <cstddef>

#include "ssm/vec3.hpp"

namespace ssm::kernels {

// Σ_k w_k and Σ_k w_k (x_k − q) with w_k = exp(−‖x_k − q‖² · inv_two_sigma_sq),
// skipping k == skip and any k with ‖x_k − q‖² > cutoff_sq.
struct MomentSums {
    double weight = 0.0;
    Vec3 moment;
};

using MomentSumFn = MomentSums (*)(const double* xs, const double* ys, const double* zs,
                                   std::size_t count, std::ptrdiff_t skip, const Vec3& q,
                                   double inv_two_sigma_sq, double cutoff_sq);

// For each k != skip with ‖x_k − q‖² ≤ cutoff_sq:
//   g[k] += scale · exp(−‖x_k − q‖² · inv_two_sigma_sq) · (q − x_k)
// accumulated into the SoA output arrays gx/gy/gz.
using ScatterForceFn = void (*)(const double* xs, const double* ys, const double* zs,
                                std::size_t count, std::ptrdiff_t skip, const Vec3& q,
                                double inv_two_sigma_sq, double cutoff_sq, double scale,
                                double* gx, double* gy, double* gz);

struct Backend {
    const char* name;
    MomentSumFn moment_sums;
    ScatterForceFn scatter_force;
};

enum class BackendKind { auto_detect, scalar, avx2 };

const Backend& scalar_backend();
bool avx2_available();          // compiled in and supported by this CPU
const Backend& avx2_backend();  // valid only when avx2_available()

/// Pick the backend used by active(). auto_detect prefers the widest
/// supported SIMD variant. Throws ssm::Error when a forced backend is
/// unavailable.
void select_backend(BackendKind kind);
const Backend& active();

}  // namespace ssm::kernels
