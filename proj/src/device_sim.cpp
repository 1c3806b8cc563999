#include "flageffect/device_sim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ffx {

namespace {

// splitmix64: full-period 64-bit generator, stable across platforms.
std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

SimRng::SimRng(std::uint64_t seed) : state_(seed) {}

std::uint64_t SimRng::next() { return splitmix64(state_); }

double SimRng::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SimRng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    std::uint64_t state = base ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b + 0x165667b19e3779f9ULL);
    splitmix64(state);
    return splitmix64(state);
}

void DeviceModel::validate(std::span<const std::int8_t> levels) const {
    if (sample_period_s <= 0.0)
        throw std::invalid_argument("DeviceModel: sample_period must be positive");
    if (jitter_rel < 0.0 || jitter_rel >= 1.0)
        throw std::invalid_argument("DeviceModel: jitter must be in [0, 1)");
    if (noise_rel < 0.0)
        throw std::invalid_argument("DeviceModel: noise must be non-negative");
    if (model_power(*this, levels) <= 0.0)
        throw std::invalid_argument("DeviceModel: multipliers must keep power positive");
}

double model_power(const DeviceModel& model, std::span<const std::int8_t> levels) {
    double power = model.base_power_w;
    const std::size_t n = std::min(model.effects.size(), levels.size());
    for (std::size_t j = 0; j < n; ++j)
        power *= 1.0 + model.effects[j] * static_cast<double>(levels[j]);
    return power;
}

PowerTrace simulate_execution(const DeviceModel& model,
                              std::span<const std::int8_t> levels, double duration_s) {
    if (duration_s < 10.0 * model.sample_period_s)
        throw std::invalid_argument(
            "simulate_execution: duration must be at least 10 sample periods");
    model.validate(levels);

    const double power = model_power(model, levels);
    SimRng rng(model.seed);

    PowerTrace trace;
    trace.t.reserve(static_cast<std::size_t>(duration_s / model.sample_period_s) + 2);
    double t = 0.0;
    while (true) {
        double sample = power;
        if (model.noise_rel > 0.0)
            sample *= 1.0 + model.noise_rel * rng.normal();
        trace.t.push_back(t);
        trace.p.push_back(sample);
        if (t >= duration_s) break;
        double dt = model.sample_period_s;
        if (model.jitter_rel > 0.0)
            dt *= 1.0 + model.jitter_rel * (2.0 * rng.uniform() - 1.0);
        t = std::min(t + dt, duration_s);
    }
    return trace;
}

} // namespace ffx
