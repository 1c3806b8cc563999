#include "flageffect/backend.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

namespace ffx {

std::string to_string(BackendType t) {
    switch (t) {
        case BackendType::wall_clock: return "wall-clock";
        case BackendType::external_command: return "external-command";
        case BackendType::trace_file: return "trace-file";
        case BackendType::simulated: return "simulated";
    }
    return "?";
}

std::optional<BackendType> parse_backend_type(const std::string& text) {
    if (text == "wall-clock") return BackendType::wall_clock;
    if (text == "external-command") return BackendType::external_command;
    if (text == "trace-file") return BackendType::trace_file;
    if (text == "simulated") return BackendType::simulated;
    return std::nullopt;
}

std::string BackendSpec::id() const {
    std::ostringstream out;
    out << to_string(type) << '|' << nominal_power_w << '|' << command << '|'
        << trace_path << '|' << sim_base_power_w << '|' << sim_noise_rel << '|'
        << sim_jitter_rel << '|' << sim_sample_period_s << '|' << sim_seed;
    return out.str();
}

CommandResult run_command(const std::string& command) {
    CommandResult result;
    const std::string wrapped = command + " 2>&1";
    const auto start = std::chrono::steady_clock::now();
    FILE* pipe = popen(wrapped.c_str(), "r");
    if (!pipe) {
        result.exit_code = -1;
        result.output = "popen failed";
        return result;
    }
    std::array<char, 4096> buffer;
    std::size_t n;
    while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0)
        result.output.append(buffer.data(), n);
    const int status = pclose(pipe);
    const auto end = std::chrono::steady_clock::now();
    result.wall_s = std::chrono::duration<double>(end - start).count();
    if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else
        result.exit_code = -1;
    return result;
}

namespace {

std::optional<double> parse_key_line(const std::string& output, const std::string& key) {
    std::istringstream in(output);
    std::string line;
    std::optional<double> found;
    while (std::getline(in, line)) {
        std::size_t begin = line.find_first_not_of(" \t");
        if (begin == std::string::npos) continue;
        if (line.compare(begin, key.size(), key) != 0) continue;
        const char* first = line.data() + begin + key.size();
        const char* last = line.data() + line.size();
        double value = 0.0;
        auto r = std::from_chars(first, last, value);
        if (r.ec == std::errc{}) found = value; // last occurrence wins
    }
    return found;
}

Measurement measure_wall_clock(const BackendSpec& spec, const MeasureRequest& req) {
    if (req.run_command.empty())
        return Measurement::unavailable("wall-clock backend needs a run command");
    CommandResult r = run_command(req.run_command);
    if (r.exit_code == spec.pause_exit_code)
        throw DeviceUnreachable("run command requested pause (exit " +
                                std::to_string(r.exit_code) + ")");
    if (r.exit_code != 0)
        return Measurement::unavailable("run command exited " + std::to_string(r.exit_code));
    Measurement m;
    m.time_s = r.wall_s;
    if (spec.nominal_power_w > 0.0) {
        m.energy_j = r.wall_s * spec.nominal_power_w;
        m.avg_power_w = spec.nominal_power_w;
    }
    return m;
}

Measurement measure_external(const BackendSpec& spec, const MeasureRequest& req) {
    if (spec.command.empty())
        return Measurement::unavailable("external-command backend has no command configured");
    CommandResult r = run_command(req.run_command.empty() ? spec.command : req.run_command);
    if (r.exit_code == spec.pause_exit_code)
        throw DeviceUnreachable("measurement command requested pause (exit " +
                                std::to_string(r.exit_code) + ")");
    if (r.exit_code != 0)
        return Measurement::unavailable("measurement command exited " +
                                        std::to_string(r.exit_code));
    auto energy = parse_key_line(r.output, "energy_j=");
    auto time = parse_key_line(r.output, "time_s=");
    if (!energy || !time)
        return Measurement::unavailable(
            "measurement output missing energy_j=/time_s= lines");
    Measurement m;
    m.energy_j = *energy;
    m.time_s = *time;
    if (*time > 0.0) m.avg_power_w = *energy / *time;
    return m;
}

Measurement measure_trace_file(const BackendSpec& spec, const MeasureRequest& req) {
    if (!req.run_command.empty()) {
        CommandResult r = run_command(req.run_command);
        if (r.exit_code == spec.pause_exit_code)
            throw DeviceUnreachable("run command requested pause (exit " +
                                    std::to_string(r.exit_code) + ")");
        if (r.exit_code != 0)
            return Measurement::unavailable("run command exited " +
                                            std::to_string(r.exit_code));
    }
    const std::string& path = req.trace_path.empty() ? spec.trace_path : req.trace_path;
    std::ifstream in(path);
    if (!in)
        return Measurement::unavailable("trace file not readable: " + path);
    try {
        PowerTrace trace = read_trace(in);
        return integrate_trace(trace);
    } catch (const std::exception& e) {
        return Measurement::unavailable(std::string("malformed trace: ") + e.what());
    }
}

Measurement measure_simulated(const BackendSpec& spec, const MeasureRequest& req) {
    DeviceModel model;
    model.base_power_w = spec.sim_base_power_w * req.sim_power_scale;
    model.effects = req.power_effects;
    model.noise_rel = spec.sim_noise_rel;
    model.jitter_rel = spec.sim_jitter_rel;
    model.sample_period_s = spec.sim_sample_period_s;
    model.seed = req.sim_seed != 0 ? req.sim_seed : spec.sim_seed;
    try {
        PowerTrace trace = simulate_execution(model, req.levels, req.sim_duration_s);
        return integrate_trace(trace);
    } catch (const std::exception& e) {
        return Measurement::unavailable(std::string("simulation failed: ") + e.what());
    }
}

} // namespace

Measurement measure_via_backend(const BackendSpec& spec, const MeasureRequest& req) {
    switch (spec.type) {
        case BackendType::wall_clock: return measure_wall_clock(spec, req);
        case BackendType::external_command: return measure_external(spec, req);
        case BackendType::trace_file: return measure_trace_file(spec, req);
        case BackendType::simulated: return measure_simulated(spec, req);
    }
    return Measurement::unavailable("unknown backend type");
}

} // namespace ffx
