#include "flageffect/kernels.hpp"

namespace ffx::kernels {

namespace {

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double dot_signed_scalar(const std::int8_t* signs, const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += signs[i] > 0 ? x[i] : -x[i];
    return acc;
}

double trapezoid_scalar(const double* t, const double* p, std::size_t n) {
    if (n < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        acc += 0.5 * (p[i] + p[i + 1]) * (t[i + 1] - t[i]);
    return acc;
}

void yates_pass_scalar(const double* src, double* dst, std::size_t n) {
    const std::size_t half = n / 2;
    for (std::size_t j = 0; j < half; ++j) {
        dst[j] = src[2 * j] + src[2 * j + 1];
        dst[half + j] = src[2 * j + 1] - src[2 * j];
    }
}

} // namespace

const Ops& scalar_ops() {
    static const Ops ops{"scalar", sum_scalar, dot_signed_scalar,
                         trapezoid_scalar, yates_pass_scalar};
    return ops;
}

} // namespace ffx::kernels
