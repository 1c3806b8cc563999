#include "flageffect/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace ffx::kernels {

#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
#endif
#if defined(__aarch64__)
const Ops& neon_ops();
#endif

namespace {

const Ops* detect_best() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2")) return &avx2_ops();
#endif
#if defined(__aarch64__)
    return &neon_ops();
#endif
    return &scalar_ops();
}

} // namespace

const Ops* ops_by_name(const char* name) {
    if (!name) return nullptr;
    if (std::strcmp(name, "scalar") == 0) return &scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
    if (std::strcmp(name, "avx2") == 0 && __builtin_cpu_supports("avx2"))
        return &avx2_ops();
#endif
#if defined(__aarch64__)
    if (std::strcmp(name, "neon") == 0) return &neon_ops();
#endif
    return nullptr;
}

const Ops& active_ops() {
    static const Ops* selected = [] {
        if (const char* wanted = std::getenv("FLAGEFFECT_KERNEL")) {
            if (const Ops* ops = ops_by_name(wanted)) return ops;
            return &scalar_ops();
        }
        return detect_best();
    }();
    return *selected;
}

} // namespace ffx::kernels
