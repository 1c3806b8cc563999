#pragma once

#include "flageffect/design.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ffx {

enum class Metric { energy, time, power };
std::string to_string(Metric m);
std::optional<Metric> parse_metric(const std::string& text);

struct TestConfig {
    double alpha = 0.05;      // two-sided
    int exact_threshold = 20; // exact p when n1+n2 <= threshold and tie-free
};

// Per-run replicate measurements aligned index-for-index with a design.
// A run with no replicates is treated as unavailable.
struct ResponseSet {
    std::vector<std::vector<double>> replicates;
    Metric metric = Metric::energy;
};

struct EffectEstimate {
    std::vector<int> term;   // factor indices; a single index for a main effect
    std::string term_label;
    double effect = 0.0;         // mean at +1 minus mean at -1, response units
    double percent_effect = 0.0; // 100 * effect / grand mean
    double u_statistic = 0.0;
    double p_value = 1.0;
    bool significant = false;    // p_value < alpha
    std::string note;            // e.g. runs excluded to rebalance the column
};

// One entry of the effects transform output; term_mask bit i set means
// factor i participates (mask 0 carries the grand mean).
struct YatesEntry {
    std::uint32_t term_mask = 0;
    double value = 0.0;
    std::string label; // "mean", "A", "AB", ...
};

// k passes of pairwise sums-then-differences over 2^k responses in standard
// order. Entry 0 is the grand mean; the rest are effects in standard-order
// labeling (A, B, AB, C, AC, ...).
std::vector<YatesEntry> yates_effects(std::span<const double> responses, int k);

// Mean response where column is +1 minus mean where it is -1. The column
// must be balanced and of matching length.
double contrast_effect(std::span<const std::int8_t> column,
                       std::span<const double> responses);

// Contrast over the elementwise product of the term's columns.
double interaction_effect(const DesignMatrix& d, std::span<const int> term,
                          std::span<const double> responses);

struct MannWhitneyResult {
    double u = 0.0; // min(U_a, U_b), midranks for ties
    double p = 1.0; // two-sided, clamped to (0, 1]
    bool exact = false;
};

// Rank-sum test. Exact two-sided p by enumeration of rank assignments when
// the pooled size is within cfg.exact_threshold and the data is tie-free;
// otherwise normal approximation with tie-corrected variance and 0.5
// continuity correction.
MannWhitneyResult mann_whitney(std::span<const double> a, std::span<const double> b,
                               const TestConfig& cfg = {});

// Per-factor effect (contrast on run means), percent effect against the
// grand mean of all samples, and Mann-Whitney significance over pooled
// replicates at +1 vs -1. Unavailable runs are excluded together with a
// deterministic complement run from the opposite level so the column stays
// balanced; exclusions are noted on the estimate.
std::vector<EffectEstimate> analyze_design(const DesignMatrix& d, const ResponseSet& r,
                                           const TestConfig& cfg,
                                           const std::vector<std::string>& names = {});

// The at-most-k significant estimates with largest |percent_effect|; ties
// broken by term label ascending.
std::vector<EffectEstimate> rank_top_flags(std::span<const EffectEstimate> estimates,
                                           int k);

// CSV report: term, effect, percent_effect, u, p, significant. The leading
// comment block records the test choices (two-sided, midranks) and alpha.
void write_effects_csv(std::ostream& out, std::span<const EffectEstimate> estimates,
                       const TestConfig& cfg, Metric metric);
std::vector<EffectEstimate> read_effects_csv(std::istream& in);

} // namespace ffx
