// Reference implementation of the Gaussian kernel sums. The SIMD variants
// are equivalence-tested against these loops.
#include <cmath>

#include "ssm/kernels/gaussian.hpp"

namespace ssm::kernels {

namespace {

MomentSums moment_sums_scalar(const double* xs, const double* ys, const double* zs,
                              std::size_t count, std::ptrdiff_t skip, const Vec3& q,
                              double inv_two_sigma_sq, double cutoff_sq) {
    MomentSums out;
    for (std::size_t k = 0; k < count; ++k) {
        if (static_cast<std::ptrdiff_t>(k) == skip) continue;
        double dx = xs[k] - q.x;
        double dy = ys[k] - q.y;
        double dz = zs[k] - q.z;
        double d2 = dx * dx + dy * dy + dz * dz;
        if (d2 > cutoff_sq) continue;
        double w = std::exp(-d2 * inv_two_sigma_sq);
        out.weight += w;
        out.moment.x += w * dx;
        out.moment.y += w * dy;
        out.moment.z += w * dz;
    }
    return out;
}

void scatter_force_scalar(const double* xs, const double* ys, const double* zs, std::size_t count,
                          std::ptrdiff_t skip, const Vec3& q, double inv_two_sigma_sq,
                          double cutoff_sq, double scale, double* gx, double* gy, double* gz) {
    for (std::size_t k = 0; k < count; ++k) {
        if (static_cast<std::ptrdiff_t>(k) == skip) continue;
        double dx = q.x - xs[k];
        double dy = q.y - ys[k];
        double dz = q.z - zs[k];
        double d2 = dx * dx + dy * dy + dz * dz;
        if (d2 > cutoff_sq) continue;
        double w = scale * std::exp(-d2 * inv_two_sigma_sq);
        gx[k] += w * dx;
        gy[k] += w * dy;
        gz[k] += w * dz;
    }
}

}  // namespace

const Backend& scalar_backend() {
    static const Backend backend{"scalar", moment_sums_scalar, scatter_force_scalar};
    return backend;
}

}  // namespace ssm::kernels
