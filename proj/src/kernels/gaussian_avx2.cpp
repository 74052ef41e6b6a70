// AVX2+FMA variant of the Gaussian kernel sums. This translation unit is
// compiled with -mavx2 -mfma and must only be reached through the runtime
// dispatcher. exp() is a Cephes-style rational approximation evaluated in
// all four lanes; agreement with std::exp is a few ulp, covered by the
// backend equivalence tests.
#include <immintrin.h>

#include <cmath>

#include "ssm/kernels/gaussian.hpp"

namespace ssm::kernels {

namespace {

inline __m256d exp_pd(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);

    // Arguments here are always <= 0; the lower clamp keeps 2^n exponent
    // arithmetic in range (values below ~exp(-708) flush toward zero).
    x = _mm256_max_pd(x, _mm256_set1_pd(-708.0));
    x = _mm256_min_pd(x, _mm256_set1_pd(708.0));

    // n = round(x / ln 2); r = x - n ln 2 in two pieces for accuracy.
    __m256d fx = _mm256_floor_pd(_mm256_fmadd_pd(x, log2e, _mm256_set1_pd(0.5)));
    x = _mm256_fnmadd_pd(fx, ln2_hi, x);
    x = _mm256_fnmadd_pd(fx, ln2_lo, x);

    __m256d z = _mm256_mul_pd(x, x);
    __m256d px = _mm256_fmadd_pd(p0, z, p1);
    px = _mm256_fmadd_pd(px, z, p2);
    px = _mm256_mul_pd(px, x);
    __m256d qx = _mm256_fmadd_pd(q0, z, q1);
    qx = _mm256_fmadd_pd(qx, z, q2);
    qx = _mm256_fmadd_pd(qx, z, q3);
    __m256d r = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
    r = _mm256_fmadd_pd(r, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

    // Scale by 2^n through the exponent bits.
    __m128i n32 = _mm256_cvtpd_epi32(fx);
    __m256i n64 = _mm256_cvtepi32_epi64(n32);
    n64 = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(r, _mm256_castsi256_pd(n64));
}

inline double hsum_pd(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// All-ones in lanes whose global index k+lane equals skip.
inline __m256d skip_mask(std::size_t k, std::ptrdiff_t skip) {
    __m256i idx = _mm256_add_epi64(_mm256_set1_epi64x(static_cast<long long>(k)),
                                   _mm256_setr_epi64x(0, 1, 2, 3));
    __m256i eq = _mm256_cmpeq_epi64(idx, _mm256_set1_epi64x(static_cast<long long>(skip)));
    return _mm256_castsi256_pd(eq);
}

MomentSums moment_sums_avx2(const double* xs, const double* ys, const double* zs,
                            std::size_t count, std::ptrdiff_t skip, const Vec3& q,
                            double inv_two_sigma_sq, double cutoff_sq) {
    const __m256d qx = _mm256_set1_pd(q.x);
    const __m256d qy = _mm256_set1_pd(q.y);
    const __m256d qz = _mm256_set1_pd(q.z);
    const __m256d neg_its = _mm256_set1_pd(-inv_two_sigma_sq);
    const __m256d cut = _mm256_set1_pd(cutoff_sq);

    __m256d acc_w = _mm256_setzero_pd();
    __m256d acc_x = _mm256_setzero_pd();
    __m256d acc_y = _mm256_setzero_pd();
    __m256d acc_z = _mm256_setzero_pd();

    std::size_t k = 0;
    for (; k + 4 <= count; k += 4) {
        __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + k), qx);
        __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + k), qy);
        __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + k), qz);
        __m256d d2 = _mm256_fmadd_pd(dx, dx, _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dz, dz)));
        __m256d keep = _mm256_cmp_pd(d2, cut, _CMP_LE_OQ);
        keep = _mm256_andnot_pd(skip_mask(k, skip), keep);
        if (_mm256_movemask_pd(keep) == 0) continue;
        __m256d w = _mm256_and_pd(exp_pd(_mm256_mul_pd(d2, neg_its)), keep);
        acc_w = _mm256_add_pd(acc_w, w);
        acc_x = _mm256_fmadd_pd(w, dx, acc_x);
        acc_y = _mm256_fmadd_pd(w, dy, acc_y);
        acc_z = _mm256_fmadd_pd(w, dz, acc_z);
    }

    MomentSums out;
    out.weight = hsum_pd(acc_w);
    out.moment = {hsum_pd(acc_x), hsum_pd(acc_y), hsum_pd(acc_z)};
    for (; k < count; ++k) {
        if (static_cast<std::ptrdiff_t>(k) == skip) continue;
        double dx = xs[k] - q.x, dy = ys[k] - q.y, dz = zs[k] - q.z;
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

void scatter_force_avx2(const double* xs, const double* ys, const double* zs, std::size_t count,
                        std::ptrdiff_t skip, const Vec3& q, double inv_two_sigma_sq,
                        double cutoff_sq, double scale, double* gx, double* gy, double* gz) {
    const __m256d qx = _mm256_set1_pd(q.x);
    const __m256d qy = _mm256_set1_pd(q.y);
    const __m256d qz = _mm256_set1_pd(q.z);
    const __m256d neg_its = _mm256_set1_pd(-inv_two_sigma_sq);
    const __m256d cut = _mm256_set1_pd(cutoff_sq);
    const __m256d vscale = _mm256_set1_pd(scale);

    std::size_t k = 0;
    for (; k + 4 <= count; k += 4) {
        __m256d dx = _mm256_sub_pd(qx, _mm256_loadu_pd(xs + k));
        __m256d dy = _mm256_sub_pd(qy, _mm256_loadu_pd(ys + k));
        __m256d dz = _mm256_sub_pd(qz, _mm256_loadu_pd(zs + k));
        __m256d d2 = _mm256_fmadd_pd(dx, dx, _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dz, dz)));
        __m256d keep = _mm256_cmp_pd(d2, cut, _CMP_LE_OQ);
        keep = _mm256_andnot_pd(skip_mask(k, skip), keep);
        if (_mm256_movemask_pd(keep) == 0) continue;
        __m256d w = _mm256_and_pd(exp_pd(_mm256_mul_pd(d2, neg_its)), keep);
        w = _mm256_mul_pd(w, vscale);
        _mm256_storeu_pd(gx + k, _mm256_fmadd_pd(w, dx, _mm256_loadu_pd(gx + k)));
        _mm256_storeu_pd(gy + k, _mm256_fmadd_pd(w, dy, _mm256_loadu_pd(gy + k)));
        _mm256_storeu_pd(gz + k, _mm256_fmadd_pd(w, dz, _mm256_loadu_pd(gz + k)));
    }
    for (; k < count; ++k) {
        if (static_cast<std::ptrdiff_t>(k) == skip) continue;
        double dx = q.x - xs[k], dy = q.y - ys[k], dz = q.z - zs[k];
        double d2 = dx * dx + dy * dy + dz * dz;
        if (d2 > cutoff_sq) continue;
        double w = scale * std::exp(-d2 * inv_two_sigma_sq);
        gx[k] += w * dx;
        gy[k] += w * dy;
        gz[k] += w * dz;
    }
}

}  // namespace

const Backend& avx2_backend() {
    static const Backend backend{"avx2", moment_sums_avx2, scatter_force_avx2};
    return backend;
}

}  // namespace ssm::kernels
