#include "flageffect/design.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace ffx {

namespace {

constexpr int kMaxBaseFactors = 20; // 2^20 runs; guard against memory blowup

bool is_power_of_two(long long v) { return v > 0 && (v & (v - 1)) == 0; }

int log2_exact(long long v) {
    int k = 0;
    while ((1LL << k) < v) ++k;
    return k;
}

// Bit-packed factor column (+1 -> 1). Canonical form is the lexicographic
// minimum of the column and its negation, so sign-flipped contrasts compare
// equal.
using Packed = std::vector<std::uint64_t>;

Packed pack_column(const std::vector<std::int8_t>& col) {
    Packed bits((col.size() + 63) / 64, 0);
    for (std::size_t i = 0; i < col.size(); ++i)
        if (col[i] > 0) bits[i / 64] |= (1ULL << (i % 64));
    return bits;
}

Packed negate_packed(const Packed& bits, std::size_t n_entries) {
    Packed out(bits.size());
    for (std::size_t w = 0; w < bits.size(); ++w) out[w] = ~bits[w];
    const std::size_t tail = n_entries % 64;
    if (tail != 0) out.back() &= (1ULL << tail) - 1;
    return out;
}

Packed canonical(const Packed& bits, std::size_t n_entries) {
    Packed neg = negate_packed(bits, n_entries);
    return std::min(bits, neg);
}

bool is_constant(const Packed& bits, std::size_t n_entries) {
    Packed zero(bits.size(), 0);
    return bits == zero || bits == negate_packed(zero, n_entries);
}

std::vector<std::int8_t> product_column(const DesignMatrix& d,
                                        const std::vector<int>& term) {
    std::vector<std::int8_t> col(d.n_runs, 1);
    for (int f : term)
        for (int r = 0; r < d.n_runs; ++r) col[r] *= d.sign(r, f);
    return col;
}

// Column of the interaction named by `mask` over k base factors, evaluated
// at base row r. Equals the elementwise product of the base columns in the
// mask under the standard-order convention (bit set -> +1).
std::int8_t mask_sign(std::uint32_t run, std::uint32_t mask) {
    const int pop = std::popcount(run & mask) + std::popcount(mask);
    return (pop % 2 == 0) ? std::int8_t{1} : std::int8_t{-1};
}

struct GeneratorSearch {
    std::vector<std::uint32_t> masks;
    std::unordered_set<std::uint32_t> used;
    std::unordered_set<std::uint32_t> pair_xors; // maintained for target V
    Resolution target;

    explicit GeneratorSearch(Resolution t) : target(t) {}

    bool acceptable(std::uint32_t c) const {
        if (c == 0 || used.count(c)) return false;
        if (target >= Resolution::IV) {
            for (std::uint32_t m : masks)
                if (used.count(c ^ m)) return false;
        }
        if (target >= Resolution::V) {
            for (std::uint32_t m : masks)
                if (pair_xors.count(c ^ m)) return false;
        }
        return true;
    }

    void add(std::uint32_t c) {
        if (target >= Resolution::V)
            for (std::uint32_t m : masks) pair_xors.insert(c ^ m);
        masks.push_back(c);
        used.insert(c);
    }
};

// Greedy assignment of interaction columns to the n-k non-base factors.
std::optional<std::vector<std::uint32_t>> assign_generators(int n_factors, int k,
                                                            Resolution target) {
    GeneratorSearch search(target);
    for (int j = 0; j < k; ++j) search.add(1u << j);

    // Candidates ordered by descending interaction order, then ascending
    // mask value (lexicographic over base-index sets).
    std::vector<std::uint32_t> candidates;
    candidates.reserve((1u << k) - 1u - static_cast<unsigned>(k));
    for (int w = k; w >= 2; --w)
        for (std::uint32_t c = 0; c < (1u << k); ++c)
            if (std::popcount(c) == w) candidates.push_back(c);

    for (int j = k; j < n_factors; ++j) {
        bool placed = false;
        for (std::uint32_t c : candidates) {
            if (search.acceptable(c)) {
                search.add(c);
                placed = true;
                break;
            }
        }
        if (!placed) return std::nullopt;
    }
    return search.masks;
}

DesignMatrix build_from_masks(int n_factors, int k,
                              const std::vector<std::uint32_t>& masks) {
    DesignMatrix d;
    d.n_factors = n_factors;
    d.n_runs = 1 << k;
    d.base_count = k;
    d.generator_masks = masks;
    d.signs.resize(static_cast<std::size_t>(d.n_runs) * n_factors);
    for (int r = 0; r < d.n_runs; ++r)
        for (int f = 0; f < n_factors; ++f)
            d.signs[static_cast<std::size_t>(r) * n_factors + f] =
                mask_sign(static_cast<std::uint32_t>(r), masks[f]);
    return d;
}

Resolution confirm_resolution(const DesignMatrix& d) {
    if (verify_resolution(d, Resolution::Full)) return Resolution::Full;
    if (verify_resolution(d, Resolution::V)) return Resolution::V;
    if (verify_resolution(d, Resolution::IV)) return Resolution::IV;
    return Resolution::III;
}

} // namespace

std::string to_string(Resolution r) {
    switch (r) {
        case Resolution::III: return "III";
        case Resolution::IV: return "IV";
        case Resolution::V: return "V";
        case Resolution::Full: return "FULL";
    }
    return "?";
}

std::optional<Resolution> parse_resolution(const std::string& text) {
    std::string up;
    for (char c : text) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (up == "III" || up == "3") return Resolution::III;
    if (up == "IV" || up == "4") return Resolution::IV;
    if (up == "V" || up == "5") return Resolution::V;
    if (up == "FULL") return Resolution::Full;
    return std::nullopt;
}

std::vector<std::int8_t> DesignMatrix::column(int factor) const {
    std::vector<std::int8_t> col(n_runs);
    for (int r = 0; r < n_runs; ++r) col[r] = sign(r, factor);
    return col;
}

std::string factor_label(int index) {
    std::string label;
    int v = index;
    do {
        label.insert(label.begin(), static_cast<char>('A' + v % 26));
        v = v / 26 - 1;
    } while (v >= 0);
    return label;
}

DesignMatrix full_factorial(int k) {
    if (k < 1 || k > kMaxBaseFactors)
        throw std::invalid_argument("full_factorial: k must be in [1, " +
                                    std::to_string(kMaxBaseFactors) + "], got " +
                                    std::to_string(k));
    std::vector<std::uint32_t> masks;
    for (int j = 0; j < k; ++j) masks.push_back(1u << j);
    DesignMatrix d = build_from_masks(k, k, masks);
    d.achieved_resolution = Resolution::Full;
    return d;
}

DesignMatrix generate_fractional(int n_factors, Resolution target, int max_runs) {
    if (n_factors < 1)
        throw std::invalid_argument("generate_fractional: n_factors must be >= 1");
    if (max_runs < 4 || !is_power_of_two(max_runs))
        throw std::invalid_argument(
            "generate_fractional: max_runs must be a power of two >= 4, got " +
            std::to_string(max_runs));

    const int k_budget = log2_exact(max_runs);

    if (target == Resolution::Full) {
        if (n_factors <= k_budget) return full_factorial(n_factors);
        throw std::runtime_error(
            "generate_fractional: FULL resolution for " + std::to_string(n_factors) +
            " factors needs " + std::to_string(1LL << std::min(n_factors, 62)) +
            " runs, exceeding max_runs=" + std::to_string(max_runs) +
            "; smallest succeeding run count: " +
            std::to_string(1LL << std::min(n_factors, 62)));
    }

    const int k = std::min(n_factors, k_budget);
    if (k == n_factors) {
        // The budget covers the full plan; no fraction needed.
        return full_factorial(n_factors);
    }

    if (auto masks = assign_generators(n_factors, k, target)) {
        DesignMatrix d = build_from_masks(n_factors, k, *masks);
        if (!verify_resolution(d, target))
            throw std::logic_error("generate_fractional: constructed design failed "
                                   "resolution verification");
        d.achieved_resolution = confirm_resolution(d);
        return d;
    }

    // Infeasible within the budget: search upward so the error can name the
    // smallest run count that would work.
    std::optional<long long> smallest;
    for (int k2 = k + 1; k2 <= std::min(n_factors, kMaxBaseFactors); ++k2) {
        if (k2 == n_factors || assign_generators(n_factors, k2, target)) {
            smallest = 1LL << k2;
            break;
        }
    }
    std::string msg = "generate_fractional: resolution " + to_string(target) +
                      " for " + std::to_string(n_factors) +
                      " factors is not achievable within max_runs=" +
                      std::to_string(max_runs);
    if (smallest)
        msg += "; smallest succeeding run count: " + std::to_string(*smallest);
    throw std::runtime_error(msg);
}

bool verify_resolution(const DesignMatrix& d, Resolution target) {
    const std::size_t n = static_cast<std::size_t>(d.n_runs);

    if (target == Resolution::Full)
        return d.n_factors < 63 && d.n_runs == (1LL << d.n_factors);

    // Resolution III: main-effect columns pairwise distinct (up to sign)
    // and non-constant.
    std::set<Packed> mains;
    for (int f = 0; f < d.n_factors; ++f) {
        Packed canon = canonical(pack_column(d.column(f)), n);
        if (is_constant(canon, n)) return false;
        if (!mains.insert(std::move(canon)).second) return false;
    }
    if (target == Resolution::III) return true;

    // Resolution IV: no main effect coincides with a two-factor interaction.
    std::vector<Packed> twofis;
    for (int a = 0; a < d.n_factors; ++a) {
        for (int b = a + 1; b < d.n_factors; ++b) {
            Packed canon = canonical(pack_column(product_column(d, {a, b})), n);
            if (mains.count(canon)) return false;
            if (target >= Resolution::V) twofis.push_back(std::move(canon));
        }
    }
    if (target == Resolution::IV) return true;

    // Resolution V: two-factor interactions pairwise distinct as well.
    std::set<Packed> seen;
    for (auto& canon : twofis)
        if (!seen.insert(std::move(canon)).second) return false;
    return true;
}

AliasReport alias_structure(const DesignMatrix& d, int max_order) {
    if (max_order < 2 || max_order > 3)
        throw std::invalid_argument("alias_structure: max_order must be 2 or 3, got " +
                                    std::to_string(max_order));
    const std::size_t n = static_cast<std::size_t>(d.n_runs);

    AliasReport report;
    report.max_order = max_order;
    report.aliases.resize(d.n_factors);

    std::vector<Packed> main_canon(d.n_factors);
    for (int f = 0; f < d.n_factors; ++f)
        main_canon[f] = canonical(pack_column(d.column(f)), n);

    auto record = [&](const std::vector<int>& term) {
        Packed canon = canonical(pack_column(product_column(d, term)), n);
        for (int f = 0; f < d.n_factors; ++f)
            if (main_canon[f] == canon) report.aliases[f].push_back(term);
    };

    for (int a = 0; a < d.n_factors; ++a)
        for (int b = a + 1; b < d.n_factors; ++b) record({a, b});
    if (max_order >= 3)
        for (int a = 0; a < d.n_factors; ++a)
            for (int b = a + 1; b < d.n_factors; ++b)
                for (int c = b + 1; c < d.n_factors; ++c) record({a, b, c});

    return report;
}

std::vector<std::int8_t> signs_for_run(const DesignMatrix& d, int run_index) {
    if (run_index < 0 || run_index >= d.n_runs)
        throw std::out_of_range("signs_for_run: run index " + std::to_string(run_index) +
                                " outside [0, " + std::to_string(d.n_runs) + ")");
    std::vector<std::int8_t> row(d.n_factors);
    for (int f = 0; f < d.n_factors; ++f) row[f] = d.sign(run_index, f);
    return row;
}

void write_design_csv(std::ostream& out, const DesignMatrix& d,
                      const std::vector<std::string>& names) {
    if (static_cast<int>(names.size()) != d.n_factors)
        throw std::invalid_argument("write_design_csv: name count mismatch");
    out << "# flageffect design\n";
    out << "# k: " << d.base_count << "\n";
    for (int f = d.base_count; f < d.n_factors; ++f) {
        out << "# generator: " << names[f] << " =";
        for (int j = 0; j < d.base_count; ++j)
            if (d.generator_masks[f] & (1u << j)) out << " " << names[j];
        out << "\n";
    }
    out << "# resolution: " << to_string(d.achieved_resolution) << "\n";
    for (int f = 0; f < d.n_factors; ++f)
        out << (f ? "," : "") << names[f];
    out << "\n";
    for (int r = 0; r < d.n_runs; ++r) {
        for (int f = 0; f < d.n_factors; ++f)
            out << (f ? "," : "") << (d.sign(r, f) > 0 ? "+1" : "-1");
        out << "\n";
    }
}

NamedDesign read_design_csv(std::istream& in) {
    NamedDesign result;
    std::string line;
    int base_count = -1;
    Resolution stated = Resolution::III;
    std::vector<std::pair<std::string, std::vector<std::string>>> generator_lines;
    std::vector<std::vector<std::int8_t>> rows;
    bool header_seen = false;

    auto split_csv = [](const std::string& s) {
        std::vector<std::string> fields;
        std::stringstream ss(s);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        return fields;
    };

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            auto colon = body.find(':');
            if (colon == std::string::npos) continue;
            std::string key = body.substr(0, colon);
            std::string value = body.substr(colon + 1);
            auto trim = [](std::string s) {
                while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
                while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
                return s;
            };
            key = trim(key);
            value = trim(value);
            if (key == "k") base_count = std::stoi(value);
            else if (key == "resolution") {
                if (auto r = parse_resolution(value)) stated = *r;
            } else if (key == "generator") {
                auto eq = value.find('=');
                if (eq == std::string::npos)
                    throw std::runtime_error("read_design_csv: malformed generator line");
                std::string target = trim(value.substr(0, eq));
                std::stringstream ss(value.substr(eq + 1));
                std::vector<std::string> sources;
                std::string tok;
                while (ss >> tok) sources.push_back(tok);
                generator_lines.emplace_back(target, sources);
            }
            continue;
        }
        if (!header_seen) {
            result.names = split_csv(line);
            header_seen = true;
            continue;
        }
        auto fields = split_csv(line);
        if (fields.size() != result.names.size())
            throw std::runtime_error("read_design_csv: row width mismatch");
        std::vector<std::int8_t> row;
        for (const auto& f : fields) {
            if (f == "+1") row.push_back(1);
            else if (f == "-1") row.push_back(-1);
            else throw std::runtime_error("read_design_csv: entry must be +1 or -1, got '" + f + "'");
        }
        rows.push_back(std::move(row));
    }

    if (!header_seen || rows.empty())
        throw std::runtime_error("read_design_csv: no design rows found");
    if (!is_power_of_two(static_cast<long long>(rows.size())))
        throw std::runtime_error("read_design_csv: run count must be a power of two");

    DesignMatrix& d = result.design;
    d.n_factors = static_cast<int>(result.names.size());
    d.n_runs = static_cast<int>(rows.size());
    d.base_count = base_count >= 0 ? base_count : log2_exact(d.n_runs);
    d.signs.resize(static_cast<std::size_t>(d.n_runs) * d.n_factors);
    for (int r = 0; r < d.n_runs; ++r)
        for (int f = 0; f < d.n_factors; ++f)
            d.signs[static_cast<std::size_t>(r) * d.n_factors + f] = rows[r][f];

    // Rebuild generator masks from the metadata block when present.
    d.generator_masks.assign(d.n_factors, 0);
    for (int j = 0; j < std::min(d.base_count, d.n_factors); ++j)
        d.generator_masks[j] = 1u << j;
    auto name_index = [&](const std::string& nm) {
        for (std::size_t i = 0; i < result.names.size(); ++i)
            if (result.names[i] == nm) return static_cast<int>(i);
        return -1;
    };
    for (const auto& [target_name, sources] : generator_lines) {
        int f = name_index(target_name);
        if (f < 0) throw std::runtime_error("read_design_csv: generator names unknown factor '" + target_name + "'");
        std::uint32_t mask = 0;
        for (const auto& src : sources) {
            int j = name_index(src);
            if (j < 0 || j >= d.base_count)
                throw std::runtime_error("read_design_csv: generator source '" + src + "' is not a base factor");
            mask |= 1u << j;
        }
        d.generator_masks[f] = mask;
    }

    // Column balance is a hard invariant of the format.
    for (int f = 0; f < d.n_factors; ++f) {
        int plus = 0;
        for (int r = 0; r < d.n_runs; ++r)
            if (d.sign(r, f) > 0) ++plus;
        if (plus * 2 != d.n_runs)
            throw std::runtime_error("read_design_csv: column '" + result.names[f] +
                                     "' is unbalanced");
    }

    if (!verify_resolution(d, stated))
        throw std::runtime_error("read_design_csv: stated resolution " + to_string(stated) +
                                 " fails verification");
    d.achieved_resolution = stated;
    return result;
}

std::string render_alias_report(const AliasReport& report,
                                const std::vector<std::string>& names) {
    std::ostringstream out;
    out << "alias structure (order <= " << report.max_order << ")\n";
    for (std::size_t f = 0; f < report.aliases.size(); ++f) {
        out << names[f] << ":";
        if (report.aliases[f].empty()) {
            out << " (clear)";
        } else {
            for (const auto& term : report.aliases[f]) {
                out << " ";
                for (std::size_t i = 0; i < term.size(); ++i)
                    out << (i ? "*" : "") << names[term[i]];
            }
        }
        out << "\n";
    }
    return out.str();
}

} // namespace ffx
