#pragma once

#include "flageffect/device_sim.hpp"
#include "flageffect/trace.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <string>

namespace ffx {

enum class BackendType { wall_clock, external_command, trace_file, simulated };
std::string to_string(BackendType t);
std::optional<BackendType> parse_backend_type(const std::string& text);

// How a single execution is turned into a Measurement.
//
//   wall_clock       runs the command and times it; energy is
//                    time * nominal_power when a nominal power is
//                    configured, otherwise the measurement is time-only.
//   external_command runs `command` which must print "energy_j=<float>"
//                    and "time_s=<float>" lines on stdout.
//   trace_file       runs the command, then integrates the power trace it
//                    left at `trace_path`.
//   simulated        no process at all; samples the DeviceModel.
struct BackendSpec {
    BackendType type = BackendType::simulated;
    double nominal_power_w = 0.0; // wall_clock; 0 means not configured
    std::string command;          // external_command, {bin} placeholder
    std::string trace_path;       // trace_file, {bin} placeholder
    int pause_exit_code = 75;     // EX_TEMPFAIL: device unreachable, pause campaign

    // simulated
    double sim_base_power_w = 1.0;
    double sim_noise_rel = 0.0;
    double sim_jitter_rel = 0.0;
    double sim_sample_period_s = 1e-3;
    std::uint64_t sim_seed = 1;

    std::string id() const; // stable digest component for run ids
};

// Everything a backend may need for one measurement. Placeholder templates
// ({bin} etc.) are resolved by the caller before the request is built.
struct MeasureRequest {
    std::string run_command;          // resolved, may be empty for simulated
    std::string trace_path;           // resolved, trace_file backend
    std::vector<std::int8_t> levels;  // factor levels, simulated backend
    std::vector<double> power_effects; // per-factor e_j, simulated backend
    double sim_duration_s = 0.0;
    double sim_power_scale = 1.0;     // level multiplier, simulated backend
    std::uint64_t sim_seed = 0;
};

// Raised when the measurement device reports a transient failure (the
// configured pause exit code); campaigns checkpoint and stop instead of
// recording the run as unavailable.
struct DeviceUnreachable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Per-run failures (crashed command, unparseable output, malformed trace)
// come back as status=unavailable and never abort a campaign.
Measurement measure_via_backend(const BackendSpec& spec, const MeasureRequest& req);

// Serialization point for a physical or simulated device: one in-flight
// measurement per device handle.
class Device {
public:
    explicit Device(BackendSpec spec) : spec_(std::move(spec)) {}
    Measurement measure(const MeasureRequest& req) {
        std::lock_guard<std::mutex> lock(mutex_);
        return measure_via_backend(spec_, req);
    }
    const BackendSpec& spec() const { return spec_; }

private:
    BackendSpec spec_;
    std::mutex mutex_;
};

// Shell out, capturing combined stdout/stderr, the exit code and wall time.
struct CommandResult {
    int exit_code = -1;
    std::string output;
    double wall_s = 0.0;
};
CommandResult run_command(const std::string& command);

} // namespace ffx
