#pragma once

#include "flageffect/trace.hpp"

#include <cstdint>
#include <span>

namespace ffx {

// Synthetic measurement device. Power responds multiplicatively to factor
// levels: base_power * prod_j (1 + effect[j] * level[j]), with per-sample
// relative Gaussian noise and sampling-period jitter. Levels may be -1, 0
// (factor not set) or +1.
struct DeviceModel {
    double base_power_w = 1.0;
    std::vector<double> effects;  // per-factor power multipliers e_j
    double noise_rel = 0.0;       // relative standard deviation per sample
    double sample_period_s = 1e-3;
    double jitter_rel = 0.0;      // relative deviation of the sample period
    std::uint64_t seed = 0;

    void validate(std::span<const std::int8_t> levels) const;
};

// Noiseless model response in watts for the given levels.
double model_power(const DeviceModel& model, std::span<const std::int8_t> levels);

// Deterministic for a fixed seed: emits samples from t=0 to exactly
// t=duration. Requires duration >= 10 * sample_period.
PowerTrace simulate_execution(const DeviceModel& model,
                              std::span<const std::int8_t> levels, double duration_s);

// Portable deterministic RNG helpers used by the simulator (the standard
// distributions are implementation-defined, which would break
// reproducibility across standard libraries).
class SimRng {
public:
    explicit SimRng(std::uint64_t seed);
    double uniform();       // [0, 1)
    double normal();        // standard normal, Box-Muller
    std::uint64_t next();

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Stable mix for deriving per-measurement seeds from (base seed, run id,
// replicate index).
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b);

} // namespace ffx
