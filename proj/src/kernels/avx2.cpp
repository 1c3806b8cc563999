// AVX2 variants of the analysis kernels. This translation unit is compiled
// with -mavx2 -mfma and must only be entered after a runtime CPU check
// (see dispatch.cpp).

#include "flageffect/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace ffx::kernels {

namespace {

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double total = hsum(acc);
    for (; i < n; ++i) total += x[i];
    return total;
}

double dot_signed_avx2(const std::int8_t* signs, const double* x, std::size_t n) {
    const __m256d signbit = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // Sign-extend 4 bytes to 4 qwords, build an all-ones mask for
        // negative entries, then flip the sign bit of the matching lanes.
        __m128i bytes = _mm_cvtsi32_si128(*reinterpret_cast<const int*>(signs + i));
        __m256i wide = _mm256_cvtepi8_epi64(bytes);
        __m256i neg = _mm256_cmpgt_epi64(_mm256_setzero_si256(), wide);
        __m256d flip = _mm256_and_pd(_mm256_castsi256_pd(neg), signbit);
        __m256d vals = _mm256_xor_pd(_mm256_loadu_pd(x + i), flip);
        acc = _mm256_add_pd(acc, vals);
    }
    double total = hsum(acc);
    for (; i < n; ++i) total += signs[i] > 0 ? x[i] : -x[i];
    return total;
}

double trapezoid_avx2(const double* t, const double* p, std::size_t n) {
    if (n < 2) return 0.0;
    const __m256d half = _mm256_set1_pd(0.5);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 5 <= n; i += 4) {
        __m256d dt = _mm256_sub_pd(_mm256_loadu_pd(t + i + 1), _mm256_loadu_pd(t + i));
        __m256d ps = _mm256_add_pd(_mm256_loadu_pd(p + i), _mm256_loadu_pd(p + i + 1));
        acc = _mm256_fmadd_pd(_mm256_mul_pd(half, ps), dt, acc);
    }
    double total = hsum(acc);
    for (; i + 1 < n; ++i)
        total += 0.5 * (p[i] + p[i + 1]) * (t[i + 1] - t[i]);
    return total;
}

void yates_pass_avx2(const double* src, double* dst, std::size_t n) {
    const std::size_t half = n / 2;
    std::size_t j = 0;
    for (; j + 4 <= half; j += 4) {
        __m256d a = _mm256_loadu_pd(src + 2 * j);     // s0 s1 s2 s3
        __m256d b = _mm256_loadu_pd(src + 2 * j + 4); // s4 s5 s6 s7
        __m256d evens = _mm256_unpacklo_pd(a, b);     // s0 s4 s2 s6
        __m256d odds = _mm256_unpackhi_pd(a, b);      // s1 s5 s3 s7
        __m256d sums = _mm256_add_pd(evens, odds);    // pairs 0 2 1 3
        __m256d diffs = _mm256_sub_pd(odds, evens);
        sums = _mm256_permute4x64_pd(sums, _MM_SHUFFLE(3, 1, 2, 0));
        diffs = _mm256_permute4x64_pd(diffs, _MM_SHUFFLE(3, 1, 2, 0));
        _mm256_storeu_pd(dst + j, sums);
        _mm256_storeu_pd(dst + half + j, diffs);
    }
    for (; j < half; ++j) {
        dst[j] = src[2 * j] + src[2 * j + 1];
        dst[half + j] = src[2 * j + 1] - src[2 * j];
    }
}

} // namespace

const Ops& avx2_ops() {
    static const Ops ops{"avx2", sum_avx2, dot_signed_avx2,
                         trapezoid_avx2, yates_pass_avx2};
    return ops;
}

} // namespace ffx::kernels

#endif // x86-64
