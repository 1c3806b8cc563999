#pragma once

#include "flageffect/backend.hpp"
#include "flageffect/design.hpp"
#include "flageffect/stats.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ffx {

// A compiler flag explored as one two-level factor.
struct FlagFactor {
    std::string name;    // e.g. "tree-ter"
    std::string enable;  // default "-f<name>"
    std::string disable; // default "-fno-<name>"

    static FlagFactor from_name(std::string name) {
        FlagFactor f;
        f.enable = "-f" + name;
        f.disable = "-fno-" + name;
        f.name = std::move(name);
        return f;
    }
    void validate() const;
};

// Simulated-device response shaping, resolved per run by the campaign.
struct SimResponse {
    double base_time_s = 0.1;
    std::map<std::string, double> power_effect; // factor name -> e_j
    std::map<std::string, double> time_effect;  // factor name -> tau_j
    struct LevelScale {
        double time_mult = 1.0;
        double power_mult = 1.0;
    };
    std::map<std::string, LevelScale> level_scale; // level name -> multipliers
};

enum class RunOrder { randomized, design };

// Campaign configuration: how to build, run and measure one benchmark
// under a set of flag factors.
struct Experiment {
    // [compiler]
    std::string compiler_command; // template with {flags} {src} {out}; empty = no build step
    std::string base_level = "-O1";
    std::string lto_flag = "-flto"; // used when a level spells "O4"

    // [benchmark]
    std::vector<std::string> sources;
    std::string run_command; // template with {bin}

    // [factors]
    std::vector<FlagFactor> factors;

    // [backend]
    BackendSpec backend;
    SimResponse sim;

    // [campaign]
    int replicates = 8;
    std::uint64_t seed = 0;
    RunOrder run_order = RunOrder::randomized;
    Resolution resolution = Resolution::IV;
    int max_runs = 0;
    int n_factors = 0; // design-only runs may size the plan without flags
    std::vector<std::string> levels; // sweep mode, first entry is the baseline
    double alpha = 0.05;
    Metric metric = Metric::energy;
    int compile_jobs = 1;
    std::string store_name = "store.jsonl";

    void validate() const;
    std::vector<std::string> factor_names() const;
};

// "O4" is the third optimisation level plus link-time optimisation; other
// bare names gain a leading dash, and strings already starting with '-'
// pass through untouched.
std::string expand_level(const std::string& level, const std::string& lto_flag);

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// INI-style configuration with [compiler], [benchmark], [factors],
// [backend] and [campaign] sections. Unknown keys are rejected with the
// offending key and line number. `overrides` entries look like
// "section.key=value".
Experiment load_experiment(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides = {});
Experiment parse_experiment(const std::string& text,
                            const std::vector<std::string>& overrides = {});

// FNV-1a digests used for cache keys and manifests.
std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(const std::string& s, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

} // namespace ffx
