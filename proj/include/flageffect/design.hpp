#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ffx {

// Aliasing guarantee of a two-level design, ordered III < IV < V < Full.
// III: main effects mutually distinguishable. IV: main effects clear of
// two-factor interactions. V: two-factor interactions also mutually clear.
enum class Resolution : int { III = 3, IV = 4, V = 5, Full = 99 };

std::string to_string(Resolution r);
std::optional<Resolution> parse_resolution(const std::string& text);

// Regular two-level experimental plan. Rows are runs, columns are factors,
// entries are -1 (disabled) / +1 (enabled). Each factor column is the
// elementwise product of the base-factor columns named by its generator
// mask (base factor i carries mask 1<<i).
struct DesignMatrix {
    int n_factors = 0;
    int n_runs = 0;   // always a power of two
    int base_count = 0;
    std::vector<std::int8_t> signs;           // row-major, n_runs * n_factors
    std::vector<std::uint32_t> generator_masks; // one per factor
    Resolution achieved_resolution = Resolution::III;

    std::int8_t sign(int run, int factor) const {
        return signs[static_cast<std::size_t>(run) * n_factors + factor];
    }
    std::vector<std::int8_t> column(int factor) const;
    bool is_base(int factor) const { return factor < base_count; }
};

// Default column label: A..Z, then AA, AB, ...
std::string factor_label(int index);

// Full 2^k plan in standard order (first factor alternates fastest).
// Requires 1 <= k <= 20.
DesignMatrix full_factorial(int k);

// Regular fraction for n_factors at the requested resolution using a run
// budget of max_runs (a power of two >= 4). Uses min(n_factors,
// log2(max_runs)) base factors and assigns each remaining factor to an
// interaction column of the base plan, greedily scanning candidates by
// descending interaction order then lexicographic position, accepting a
// candidate only while the resolution condition still holds. Throws if the
// target cannot be met within the budget; the error names the smallest run
// count at which construction succeeded during the upward search, when one
// exists.
DesignMatrix generate_fractional(int n_factors, Resolution target, int max_runs);

// Pure predicate: does the design meet `target`? Decided by distinctness
// checks on effect columns (a column and its negation count as the same
// contrast), not by enumerating the defining-relation subgroup.
bool verify_resolution(const DesignMatrix& d, Resolution target);

// For each main effect, the interaction terms of order 2..max_order whose
// column coincides (up to sign) with it. max_order must be 2 or 3.
struct AliasReport {
    // aliases[factor] = sorted list of interacting factor-index sets
    std::vector<std::vector<std::vector<int>>> aliases;
    int max_order = 2;
};
AliasReport alias_structure(const DesignMatrix& d, int max_order);

// Row `run_index` as a factor-index -> level mapping (total over factors).
std::vector<std::int8_t> signs_for_run(const DesignMatrix& d, int run_index);

// CSV exchange format: '#'-prefixed metadata block (base count, generators,
// verified resolution), then a header row of factor names and one row of
// literal "+1"/"-1" fields per run.
void write_design_csv(std::ostream& out, const DesignMatrix& d,
                      const std::vector<std::string>& names);
struct NamedDesign {
    DesignMatrix design;
    std::vector<std::string> names;
};
NamedDesign read_design_csv(std::istream& in);

std::string render_alias_report(const AliasReport& report,
                                const std::vector<std::string>& names);

} // namespace ffx
