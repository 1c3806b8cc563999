// NEON variants for aarch64. Advanced SIMD is baseline on aarch64, so no
// runtime feature check is needed beyond the architecture itself.

#include "flageffect/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace ffx::kernels {

namespace {

double sum_neon(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        acc = vaddq_f64(acc, vld1q_f64(x + i));
    double total = vaddvq_f64(acc);
    for (; i < n; ++i) total += x[i];
    return total;
}

double dot_signed_neon(const std::int8_t* signs, const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vals = vld1q_f64(x + i);
        float64x2_t factors = {static_cast<double>(signs[i]),
                               static_cast<double>(signs[i + 1])};
        acc = vfmaq_f64(acc, vals, factors);
    }
    double total = vaddvq_f64(acc);
    for (; i < n; ++i) total += signs[i] > 0 ? x[i] : -x[i];
    return total;
}

double trapezoid_neon(const double* t, const double* p, std::size_t n) {
    if (n < 2) return 0.0;
    const float64x2_t half = vdupq_n_f64(0.5);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 3 <= n; i += 2) {
        float64x2_t dt = vsubq_f64(vld1q_f64(t + i + 1), vld1q_f64(t + i));
        float64x2_t ps = vaddq_f64(vld1q_f64(p + i), vld1q_f64(p + i + 1));
        acc = vfmaq_f64(acc, vmulq_f64(half, ps), dt);
    }
    double total = vaddvq_f64(acc);
    for (; i + 1 < n; ++i)
        total += 0.5 * (p[i] + p[i + 1]) * (t[i + 1] - t[i]);
    return total;
}

void yates_pass_neon(const double* src, double* dst, std::size_t n) {
    const std::size_t half = n / 2;
    std::size_t j = 0;
    for (; j + 2 <= half; j += 2) {
        float64x2_t a = vld1q_f64(src + 2 * j);     // s0 s1
        float64x2_t b = vld1q_f64(src + 2 * j + 2); // s2 s3
        float64x2_t evens = vuzp1q_f64(a, b);       // s0 s2
        float64x2_t odds = vuzp2q_f64(a, b);        // s1 s3
        vst1q_f64(dst + j, vaddq_f64(evens, odds));
        vst1q_f64(dst + half + j, vsubq_f64(odds, evens));
    }
    for (; j < half; ++j) {
        dst[j] = src[2 * j] + src[2 * j + 1];
        dst[half + j] = src[2 * j + 1] - src[2 * j];
    }
}

} // namespace

const Ops& neon_ops() {
    static const Ops ops{"neon", sum_neon, dot_signed_neon,
                         trapezoid_neon, yates_pass_neon};
    return ops;
}

} // namespace ffx::kernels

#endif // aarch64
