#pragma once

#include "flageffect/campaign.hpp"
#include "flageffect/stats.hpp"
#include "flageffect/store.hpp"

#include <map>
#include <string>
#include <vector>

namespace ffx {

// Main-effects table in the shape of the paper's charts: one row per
// option ordered by |percent effect| descending, a significance marker per
// metric, energy and time side by side when both are available.
struct MainEffectsReport {
    std::string text;     // aligned table
    std::string plot_csv; // one series per metric, for external plotting
};
MainEffectsReport render_main_effects(std::span<const EffectEstimate> energy,
                                      std::span<const EffectEstimate> time,
                                      double alpha);

// Exhaustive-enumeration table: one row per combination with the absolute
// energy (mJ, three significant figures) and the percent difference
// against the base combination. Percentages are always computed from the
// unrounded stored means; the printed mJ column is rounded last. Missing
// combinations are listed explicitly.
struct ExhaustiveRow {
    int combo = 0;            // standard-order index; bit f set = factor f enabled
    double mean_energy_j = 0; // unrounded
    std::size_t n_records = 0;
};
struct ExhaustiveReport {
    std::string text;
    std::string csv;
    std::vector<ExhaustiveRow> rows;
    std::vector<int> missing;
};
ExhaustiveReport render_exhaustive(const std::vector<RunRecord>& records,
                                   std::size_t n_factors,
                                   const std::vector<std::string>& factor_names,
                                   int base_combo);

// Cross-tabulated top-flags table: benchmark rows, configuration columns
// with 1st/2nd/3rd winners as letters, "." for absent entries, and a
// legend mapping letter -> flag -> count. Letters are assigned by global
// frequency (descending), then flag name.
struct TopFlagsCell {
    std::string benchmark;
    std::string configuration;
    std::vector<std::string> ranked_flags; // already filtered to significant
};
std::string render_top_flags(const std::vector<TopFlagsCell>& cells);

// Level-sweep table of ratios against the baseline level.
std::string render_sweep(const std::vector<SweepRow>& rows);
std::string sweep_csv(const std::vector<SweepRow>& rows);

std::string render_oneshot(const std::vector<OneShotRow>& rows);
std::string oneshot_csv(const std::vector<OneShotRow>& rows);

// Round-trip guard used by tests and the `report` subcommand: every
// percentage in the exhaustive table must re-derive from the stored raw
// records to within half a unit in the last printed digit.
bool verify_exhaustive_report(const ExhaustiveReport& report, int base_combo,
                              double tolerance_pp = 0.005);

} // namespace ffx
