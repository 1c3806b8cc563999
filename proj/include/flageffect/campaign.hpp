#pragma once

#include "flageffect/experiment.hpp"
#include "flageffect/store.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ffx {

// One planned compile-execute-measure cell.
struct PlanEntry {
    std::string mode;  // "ffd" | "sweep" | "oneshot" | "exhaustive"
    int row = -1;      // design row for ffd/exhaustive
    std::string label; // level name or +/-flag spelling
    std::string flags; // full flag string handed to the compiler
    std::vector<std::int8_t> levels; // per-factor level, 0 = not set
    std::string run_id;
};

// Stable cache key: compiler template, flag string, source digest and
// backend identity.
std::string compute_run_id(const Experiment& e, const std::string& flags);

// One entry per design row: base level followed by the per-factor enable
// (+1) or disable (-1) spelling in declared factor order.
std::vector<PlanEntry> plan_runs(const Experiment& e, const DesignMatrix& d);

// Full enumeration over m <= 12 factors, standard order.
std::vector<PlanEntry> exhaustive_plan(const Experiment& e);

// Plain base build plus one enable and one disable build per factor
// (2n + 1 compilations).
std::vector<PlanEntry> oneshot_plan(const Experiment& e);

// One entry per optimisation level in e.levels.
std::vector<PlanEntry> sweep_plan(const Experiment& e);

// Seeded Fisher-Yates permutation of 0..n-1; decouples execution order
// from design order so slow environmental drift cannot masquerade as a
// factor effect.
std::vector<std::size_t> execution_order(std::size_t n, std::uint64_t seed);

struct CompileOutcome {
    bool ok = false;
    std::filesystem::path binary;
    std::string diagnostics;
    bool cache_hit = false;
};

// Invokes the compiler template unless the cached artifact for this run id
// already exists. Nonzero exit or a missing output marks the outcome
// failed with captured diagnostics; nothing is thrown.
CompileOutcome compile(const Experiment& e, const PlanEntry& entry,
                       const std::filesystem::path& workdir);

struct CampaignResult {
    bool paused = false;
    std::string pause_reason;
    std::size_t executed = 0; // records appended this invocation
    std::size_t skipped = 0;  // records already present
};

// Runs every missing (entry, replicate) measurement, appending each record
// durably as soon as it exists. Re-running skips completed records, so an
// interrupted campaign resumes from the store. A compile failure yields
// unavailable replicate records; only a device-unreachable signal pauses
// the campaign.
CampaignResult execute_campaign(const Experiment& e, std::span<const PlanEntry> plan,
                                ResultStore& store, const std::filesystem::path& workdir);

// Replicate responses per design row for the requested metric; rows with
// no usable records stay empty (unavailable).
ResponseSet responses_from_store(const std::vector<RunRecord>& records, int n_rows,
                                 Metric metric, const std::string& mode = "ffd");

struct SweepRow {
    std::string level;
    std::size_t ok_records = 0;
    std::optional<double> energy_j, time_s, power_w; // level means
    std::optional<double> energy_ratio, time_ratio, power_ratio; // vs baseline
};

// Compiles and measures every level, then reports each level's mean
// energy/time/power as a ratio to the first (baseline) level. Throws if
// the baseline produced no usable measurements.
struct SweepOutcome {
    CampaignResult campaign;
    std::vector<SweepRow> rows; // empty when paused
};
SweepOutcome level_sweep(const Experiment& e, ResultStore& store,
                         const std::filesystem::path& workdir);

struct OneShotRow {
    std::string flag;
    std::optional<double> enable_energy_pct, enable_time_pct;   // vs base
    std::optional<double> disable_energy_pct, disable_time_pct; // vs base
};

struct OneShotOutcome {
    CampaignResult campaign;
    std::vector<OneShotRow> rows;
};
OneShotOutcome one_at_a_time(const Experiment& e, ResultStore& store,
                             const std::filesystem::path& workdir);

} // namespace ffx
