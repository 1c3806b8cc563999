#include "flageffect/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace ffx {

namespace {

std::string trim(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(value);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

struct RawEntry {
    std::string section;
    std::string key;
    std::string value;
    int line;
};

std::vector<RawEntry> parse_ini(const std::string& text) {
    std::vector<RawEntry> entries;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": malformed section header '" + stripped + "'");
            section = trim(stripped.substr(1, stripped.size() - 2));
            continue;
        }
        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key=value, got '" + stripped + "'");
        RawEntry e;
        e.section = section;
        e.key = trim(stripped.substr(0, eq));
        e.value = trim(stripped.substr(eq + 1));
        e.line = line_no;
        if (e.key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        entries.push_back(std::move(e));
    }
    return entries;
}

double parse_double(const RawEntry& e) {
    try {
        std::size_t pos = 0;
        double v = std::stod(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("config line " + std::to_string(e.line) + ": key '" + e.key +
                          "' expects a number, got '" + e.value + "'");
    }
}

long long parse_int(const RawEntry& e) {
    long long v = 0;
    auto r = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (r.ec != std::errc{} || r.ptr != e.value.data() + e.value.size())
        throw ConfigError("config line " + std::to_string(e.line) + ": key '" + e.key +
                          "' expects an integer, got '" + e.value + "'");
    return v;
}

void apply_entry(Experiment& e, const RawEntry& entry) {
    const std::string& s = entry.section;
    const std::string& k = entry.key;
    const std::string& v = entry.value;
    auto unknown = [&]() -> ConfigError {
        return ConfigError("config line " + std::to_string(entry.line) + ": unknown key '" +
                           k + "' in section [" + s + "]");
    };

    if (s == "compiler") {
        if (k == "command") e.compiler_command = v;
        else if (k == "base_level") e.base_level = v;
        else if (k == "lto_flag") e.lto_flag = v;
        else throw unknown();
    } else if (s == "benchmark") {
        if (k == "sources") e.sources = split_list(v);
        else if (k == "run") e.run_command = v;
        else throw unknown();
    } else if (s == "factors") {
        // Every key in [factors] names a flag; an optional value overrides
        // the enable/disable spellings as "enable, disable".
        FlagFactor f = FlagFactor::from_name(k);
        if (!v.empty()) {
            auto spellings = split_list(v);
            if (spellings.size() != 2)
                throw ConfigError("config line " + std::to_string(entry.line) +
                                  ": factor '" + k +
                                  "' spellings must be 'enable, disable'");
            f.enable = spellings[0];
            f.disable = spellings[1];
        }
        for (const auto& existing : e.factors)
            if (existing.name == f.name)
                throw ConfigError("config line " + std::to_string(entry.line) +
                                  ": duplicate factor '" + k + "'");
        e.factors.push_back(std::move(f));
    } else if (s == "backend") {
        if (k == "type") {
            auto t = parse_backend_type(v);
            if (!t)
                throw ConfigError("config line " + std::to_string(entry.line) +
                                  ": unknown backend type '" + v + "'");
            e.backend.type = *t;
        } else if (k == "nominal_power") e.backend.nominal_power_w = parse_double(entry);
        else if (k == "command") e.backend.command = v;
        else if (k == "trace_path") e.backend.trace_path = v;
        else if (k == "pause_exit_code") e.backend.pause_exit_code = static_cast<int>(parse_int(entry));
        else if (k == "base_power") e.backend.sim_base_power_w = parse_double(entry);
        else if (k == "base_time") e.sim.base_time_s = parse_double(entry);
        else if (k == "noise") e.backend.sim_noise_rel = parse_double(entry);
        else if (k == "jitter") e.backend.sim_jitter_rel = parse_double(entry);
        else if (k == "sample_period") e.backend.sim_sample_period_s = parse_double(entry);
        else if (k == "seed") e.backend.sim_seed = static_cast<std::uint64_t>(parse_int(entry));
        else if (k.rfind("effect.", 0) == 0) e.sim.power_effect[k.substr(7)] = parse_double(entry);
        else if (k.rfind("time_effect.", 0) == 0) e.sim.time_effect[k.substr(12)] = parse_double(entry);
        else if (k.rfind("level.", 0) == 0) {
            auto parts = split_list(v);
            if (parts.size() != 2)
                throw ConfigError("config line " + std::to_string(entry.line) +
                                  ": level scale must be 'time_mult, power_mult'");
            SimResponse::LevelScale scale;
            scale.time_mult = std::stod(parts[0]);
            scale.power_mult = std::stod(parts[1]);
            e.sim.level_scale[k.substr(6)] = scale;
        } else throw unknown();
    } else if (s == "campaign") {
        if (k == "replicates") e.replicates = static_cast<int>(parse_int(entry));
        else if (k == "seed") e.seed = static_cast<std::uint64_t>(parse_int(entry));
        else if (k == "run_order") {
            if (v == "randomized") e.run_order = RunOrder::randomized;
            else if (v == "design") e.run_order = RunOrder::design;
            else throw ConfigError("config line " + std::to_string(entry.line) +
                                   ": run_order must be 'randomized' or 'design'");
        } else if (k == "resolution") {
            auto r = parse_resolution(v);
            if (!r)
                throw ConfigError("config line " + std::to_string(entry.line) +
                                  ": unknown resolution '" + v + "'");
            e.resolution = *r;
        } else if (k == "max_runs") e.max_runs = static_cast<int>(parse_int(entry));
        else if (k == "n_factors") e.n_factors = static_cast<int>(parse_int(entry));
        else if (k == "levels") e.levels = split_list(v);
        else if (k == "alpha") e.alpha = parse_double(entry);
        else if (k == "metric") {
            auto m = parse_metric(v);
            if (!m)
                throw ConfigError("config line " + std::to_string(entry.line) +
                                  ": unknown metric '" + v + "'");
            e.metric = *m;
        } else if (k == "compile_jobs") e.compile_jobs = static_cast<int>(parse_int(entry));
        else if (k == "store") e.store_name = v;
        else throw unknown();
    } else {
        throw ConfigError("config line " + std::to_string(entry.line) +
                          ": unknown section [" + s + "]");
    }
}

} // namespace

void FlagFactor::validate() const {
    if (name.empty() || enable.empty() || disable.empty())
        throw ConfigError("factor '" + name + "': spellings must be non-empty");
    if (enable == disable)
        throw ConfigError("factor '" + name + "': enable and disable spellings must differ");
}

void Experiment::validate() const {
    if (replicates < 1) throw ConfigError("campaign.replicates must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("campaign.alpha must be in (0, 1)");
    if (compile_jobs < 1) throw ConfigError("campaign.compile_jobs must be >= 1");
    std::vector<std::string> names;
    for (const auto& f : factors) {
        f.validate();
        names.push_back(f.name);
    }
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end())
        throw ConfigError("factor names must be unique");
}

std::vector<std::string> Experiment::factor_names() const {
    std::vector<std::string> names;
    names.reserve(factors.size());
    for (const auto& f : factors) names.push_back(f.name);
    return names;
}

std::string expand_level(const std::string& level, const std::string& lto_flag) {
    if (level.empty()) return level;
    if (level.front() == '-') return level;
    if (level == "O4") return "-O3 " + lto_flag;
    return "-" + level;
}

Experiment load_experiment(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment(buffer.str(), overrides);
}

Experiment parse_experiment(const std::string& text,
                            const std::vector<std::string>& overrides) {
    Experiment e;
    for (const auto& entry : parse_ini(text)) apply_entry(e, entry);
    for (const auto& ov : overrides) {
        auto eq = ov.find('=');
        auto dot = ov.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw ConfigError("override must look like section.key=value, got '" + ov + "'");
        RawEntry entry;
        entry.section = ov.substr(0, dot);
        entry.key = ov.substr(dot + 1, eq - dot - 1);
        entry.value = ov.substr(eq + 1);
        entry.line = 0;
        apply_entry(e, entry);
    }
    e.validate();
    return e;
}

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t hash = seed;
    for (std::size_t i = 0; i < n; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t seed) {
    return fnv1a(s.data(), s.size(), seed);
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

} // namespace ffx
