#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel primitives backing the analysis math: response sums,
// sign-column contrasts, trace integration and the pairwise sum/difference
// pass of the effects transform. Every primitive has a scalar reference
// implementation; wider variants (AVX2 on x86-64, NEON on aarch64) are
// selected at runtime and must agree with the reference to tight tolerance
// (tests/test_kernels.cpp).

namespace ffx::kernels {

struct Ops {
    const char* name;

    // Plain sum of n doubles.
    double (*sum)(const double* x, std::size_t n);

    // Dot product of a {-1,+1} sign column with a response vector, i.e.
    // sum of x[i] where signs[i] > 0 minus sum where signs[i] < 0.
    double (*dot_signed)(const std::int8_t* signs, const double* x, std::size_t n);

    // Trapezoidal integral of samples p over timestamps t (n samples,
    // n-1 segments). Returns 0 for n < 2.
    double (*trapezoid)(const double* t, const double* p, std::size_t n);

    // One pass of the effects transform: dst[j] = src[2j] + src[2j+1] for
    // the first half, dst[n/2+j] = src[2j+1] - src[2j] for the second.
    // n must be even; src and dst must not overlap.
    void (*yates_pass)(const double* src, double* dst, std::size_t n);
};

const Ops& scalar_ops();

// Best variant supported by this machine. Overridable via the
// FLAGEFFECT_KERNEL environment variable ("scalar", "avx2", "neon");
// an unsupported request falls back to scalar.
const Ops& active_ops();

// Lookup by name; nullptr when the variant is not compiled in or not
// supported by the running CPU.
const Ops* ops_by_name(const char* name);

} // namespace ffx::kernels
