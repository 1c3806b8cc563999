#include "flageffect/stats.hpp"
#include "flageffect/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ffx {

namespace {

std::string term_mask_label(std::uint32_t mask) {
    if (mask == 0) return "mean";
    std::string label;
    for (int f = 0; f < 32; ++f)
        if (mask & (1u << f)) label += factor_label(f);
    return label;
}

// Null distribution count: number of rank assignments with U statistic
// exactly u for group sizes (n1, n2). Classic two-way recurrence.
class UCountTable {
public:
    UCountTable(int n1, int n2, int u_max)
        : n1_(n1), n2_(n2), u_max_(u_max),
          table_(static_cast<std::size_t>(n1 + 1) * (n2 + 1) * (u_max + 1), -1.0) {}

    double count(int a, int b, int u) {
        if (u < 0) return 0.0;
        if (a == 0 || b == 0) return u == 0 ? 1.0 : 0.0;
        double& slot = at(a, b, u);
        if (slot < 0.0) slot = count(a - 1, b, u - b) + count(a, b - 1, u);
        return slot;
    }

private:
    double& at(int a, int b, int u) {
        return table_[(static_cast<std::size_t>(a) * (n2_ + 1) + b) * (u_max_ + 1) + u];
    }
    int n1_, n2_, u_max_;
    std::vector<double> table_;
};

double binomial(int n, int k) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1);
    return v;
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

struct RankedPool {
    double rank_sum_a = 0.0;
    double tie_sum = 0.0; // sum of t^3 - t over tie groups
    bool has_ties = false;
};

RankedPool midrank(std::span<const double> a, std::span<const double> b) {
    struct Tagged {
        double value;
        bool from_a;
    };
    std::vector<Tagged> pool;
    pool.reserve(a.size() + b.size());
    for (double v : a) pool.push_back({v, true});
    for (double v : b) pool.push_back({v, false});
    std::sort(pool.begin(), pool.end(),
              [](const Tagged& x, const Tagged& y) { return x.value < y.value; });

    RankedPool out;
    std::size_t i = 0;
    while (i < pool.size()) {
        std::size_t j = i;
        while (j < pool.size() && pool[j].value == pool[i].value) ++j;
        const double t = static_cast<double>(j - i);
        const double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        if (t > 1.0) {
            out.has_ties = true;
            out.tie_sum += t * t * t - t;
        }
        for (std::size_t m = i; m < j; ++m)
            if (pool[m].from_a) out.rank_sum_a += rank;
        i = j;
    }
    return out;
}

} // namespace

std::string to_string(Metric m) {
    switch (m) {
        case Metric::energy: return "energy";
        case Metric::time: return "time";
        case Metric::power: return "power";
    }
    return "?";
}

std::optional<Metric> parse_metric(const std::string& text) {
    if (text == "energy") return Metric::energy;
    if (text == "time") return Metric::time;
    if (text == "power") return Metric::power;
    return std::nullopt;
}

std::vector<YatesEntry> yates_effects(std::span<const double> responses, int k) {
    if (k < 1 || k > 30)
        throw std::invalid_argument("yates_effects: k out of range");
    const std::size_t n = std::size_t{1} << k;
    if (responses.size() != n)
        throw std::invalid_argument("yates_effects: expected " + std::to_string(n) +
                                    " responses for k=" + std::to_string(k) + ", got " +
                                    std::to_string(responses.size()));

    std::vector<double> cur(responses.begin(), responses.end());
    std::vector<double> next(n);
    const auto& ops = kernels::active_ops();
    for (int pass = 0; pass < k; ++pass) {
        ops.yates_pass(cur.data(), next.data(), n);
        cur.swap(next);
    }

    // After k passes entry index bits name the participating factors, with
    // bit 0 the fastest-alternating factor.
    std::vector<YatesEntry> out(n);
    const double mean_div = static_cast<double>(n);
    const double effect_div = static_cast<double>(n) / 2.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i].term_mask = static_cast<std::uint32_t>(i);
        out[i].value = cur[i] / (i == 0 ? mean_div : effect_div);
        out[i].label = term_mask_label(out[i].term_mask);
    }
    return out;
}

double contrast_effect(std::span<const std::int8_t> column,
                       std::span<const double> responses) {
    if (column.size() != responses.size())
        throw std::invalid_argument("contrast_effect: column and responses differ in length");
    if (column.empty())
        throw std::invalid_argument("contrast_effect: empty inputs");
    std::size_t plus = 0;
    for (std::int8_t s : column)
        if (s > 0) ++plus;
    if (plus * 2 != column.size())
        throw std::invalid_argument("contrast_effect: column is unbalanced (" +
                                    std::to_string(plus) + " of " +
                                    std::to_string(column.size()) + " at +1)");
    const auto& ops = kernels::active_ops();
    const double dot = ops.dot_signed(column.data(), responses.data(), column.size());
    return dot / (static_cast<double>(column.size()) / 2.0);
}

double interaction_effect(const DesignMatrix& d, std::span<const int> term,
                          std::span<const double> responses) {
    if (term.empty())
        throw std::invalid_argument("interaction_effect: empty term");
    for (int f : term)
        if (f < 0 || f >= d.n_factors)
            throw std::invalid_argument("interaction_effect: factor index out of range");
    std::vector<std::int8_t> col(d.n_runs, 1);
    for (int f : term)
        for (int r = 0; r < d.n_runs; ++r) col[r] *= d.sign(r, f);
    return contrast_effect(col, responses);
}

MannWhitneyResult mann_whitney(std::span<const double> a, std::span<const double> b,
                               const TestConfig& cfg) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("mann_whitney: samples must be non-empty");

    const int n1 = static_cast<int>(a.size());
    const int n2 = static_cast<int>(b.size());
    const RankedPool pool = midrank(a, b);

    const double u_a = pool.rank_sum_a - 0.5 * n1 * (n1 + 1);
    const double u_b = static_cast<double>(n1) * n2 - u_a;
    MannWhitneyResult result;
    result.u = std::min(u_a, u_b);

    if (!pool.has_ties && n1 + n2 <= cfg.exact_threshold) {
        // Exact two-sided p: twice the lower tail of the null distribution,
        // counted over all C(n1+n2, n1) rank assignments.
        const int u_obs = static_cast<int>(std::floor(result.u + 0.5));
        UCountTable table(n1, n2, std::max(u_obs, 0));
        double cum = 0.0;
        for (int u = 0; u <= u_obs; ++u) cum += table.count(n1, n2, u);
        const double total = binomial(n1 + n2, n1);
        result.p = std::min(1.0, 2.0 * cum / total);
        result.exact = true;
        return result;
    }

    const double n = static_cast<double>(n1 + n2);
    const double mu = 0.5 * n1 * n2;
    double var = (static_cast<double>(n1) * n2 / 12.0) *
                 ((n + 1.0) - pool.tie_sum / (n * (n - 1.0)));
    if (var <= 0.0) {
        result.p = 1.0;
        return result;
    }
    double z = (std::abs(result.u - mu) - 0.5) / std::sqrt(var);
    if (z < 0.0) z = 0.0;
    result.p = std::min(1.0, 2.0 * normal_sf(z));
    return result;
}

std::vector<EffectEstimate> analyze_design(const DesignMatrix& d, const ResponseSet& r,
                                           const TestConfig& cfg,
                                           const std::vector<std::string>& names) {
    if (static_cast<int>(r.replicates.size()) != d.n_runs)
        throw std::invalid_argument("analyze_design: responses cover " +
                                    std::to_string(r.replicates.size()) + " runs, design has " +
                                    std::to_string(d.n_runs));
    if (!names.empty() && static_cast<int>(names.size()) != d.n_factors)
        throw std::invalid_argument("analyze_design: name count mismatch");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw std::invalid_argument("analyze_design: alpha must be in (0, 1)");

    const auto& ops = kernels::active_ops();

    std::vector<bool> available(d.n_runs);
    std::vector<double> run_mean(d.n_runs, 0.0);
    double grand_sum = 0.0;
    std::size_t grand_count = 0;
    for (int run = 0; run < d.n_runs; ++run) {
        const auto& reps = r.replicates[run];
        available[run] = !reps.empty();
        if (!reps.empty()) {
            const double s = ops.sum(reps.data(), reps.size());
            run_mean[run] = s / static_cast<double>(reps.size());
            grand_sum += s;
            grand_count += reps.size();
        }
    }
    if (grand_count == 0)
        throw std::invalid_argument("analyze_design: no available runs");
    const double grand_mean = grand_sum / static_cast<double>(grand_count);

    std::vector<EffectEstimate> out;
    out.reserve(d.n_factors);
    for (int f = 0; f < d.n_factors; ++f) {
        EffectEstimate est;
        est.term = {f};
        est.term_label = names.empty() ? factor_label(f) : names[f];

        // Start from the available runs; drop a deterministic complement at
        // the opposite level for every unavailable run so the contrast stays
        // balanced.
        std::vector<bool> keep = available;
        std::string note;
        for (int run = 0; run < d.n_runs; ++run) {
            if (available[run]) continue;
            const std::int8_t missing_sign = d.sign(run, f);
            int complement = -1;
            for (int cand = 0; cand < d.n_runs; ++cand) {
                if (keep[cand] && d.sign(cand, f) == -missing_sign) {
                    complement = cand;
                    break;
                }
            }
            if (complement >= 0) {
                keep[complement] = false;
                if (!note.empty()) note += "; ";
                note += "run " + std::to_string(run) + " unavailable, excluded run " +
                        std::to_string(complement) + " as its complement";
            }
        }

        std::vector<double> means_plus, means_minus;
        std::vector<double> pool_plus, pool_minus;
        for (int run = 0; run < d.n_runs; ++run) {
            if (!keep[run] || !available[run]) continue;
            if (d.sign(run, f) > 0) {
                means_plus.push_back(run_mean[run]);
                pool_plus.insert(pool_plus.end(), r.replicates[run].begin(),
                                 r.replicates[run].end());
            } else {
                means_minus.push_back(run_mean[run]);
                pool_minus.insert(pool_minus.end(), r.replicates[run].begin(),
                                  r.replicates[run].end());
            }
        }
        if (means_plus.empty() || means_minus.empty())
            throw std::runtime_error("analyze_design: factor " + est.term_label +
                                     " has no runs left at one level");

        const double mean_plus =
            ops.sum(means_plus.data(), means_plus.size()) / static_cast<double>(means_plus.size());
        const double mean_minus =
            ops.sum(means_minus.data(), means_minus.size()) / static_cast<double>(means_minus.size());
        est.effect = mean_plus - mean_minus;
        est.percent_effect = grand_mean != 0.0 ? 100.0 * est.effect / grand_mean : 0.0;

        const auto mw = mann_whitney(pool_plus, pool_minus, cfg);
        est.u_statistic = mw.u;
        est.p_value = mw.p;
        est.significant = mw.p < cfg.alpha;
        est.note = std::move(note);
        out.push_back(std::move(est));
    }
    return out;
}

std::vector<EffectEstimate> rank_top_flags(std::span<const EffectEstimate> estimates,
                                           int k) {
    if (k < 1) throw std::invalid_argument("rank_top_flags: k must be >= 1");
    std::vector<EffectEstimate> significant;
    for (const auto& est : estimates)
        if (est.significant) significant.push_back(est);
    std::sort(significant.begin(), significant.end(),
              [](const EffectEstimate& x, const EffectEstimate& y) {
                  const double ax = std::abs(x.percent_effect);
                  const double ay = std::abs(y.percent_effect);
                  if (ax != ay) return ax > ay;
                  return x.term_label < y.term_label;
              });
    if (static_cast<int>(significant.size()) > k) significant.resize(k);
    return significant;
}

void write_effects_csv(std::ostream& out, std::span<const EffectEstimate> estimates,
                       const TestConfig& cfg, Metric metric) {
    out << "# flageffect effects\n";
    out << "# metric: " << to_string(metric) << "\n";
    out << "# test: mann-whitney two-sided, midranks\n";
    out << "# alpha: " << cfg.alpha << "\n";
    out << "term,effect,percent_effect,u,p,significant\n";
    out.precision(17);
    for (const auto& est : estimates) {
        out << est.term_label << ',' << est.effect << ',' << est.percent_effect << ','
            << est.u_statistic << ',' << est.p_value << ','
            << (est.significant ? "true" : "false");
        if (!est.note.empty()) out << " # " << est.note;
        out << "\n";
    }
}

std::vector<EffectEstimate> read_effects_csv(std::istream& in) {
    std::vector<EffectEstimate> out;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true; // column header
            continue;
        }
        auto note_pos = line.find(" # ");
        std::string note;
        if (note_pos != std::string::npos) {
            note = line.substr(note_pos + 3);
            line = line.substr(0, note_pos);
        }
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 6)
            throw std::runtime_error("read_effects_csv: expected 6 fields, got " +
                                     std::to_string(fields.size()));
        EffectEstimate est;
        est.term_label = fields[0];
        est.effect = std::stod(fields[1]);
        est.percent_effect = std::stod(fields[2]);
        est.u_statistic = std::stod(fields[3]);
        est.p_value = std::stod(fields[4]);
        est.significant = fields[5] == "true";
        est.note = note;
        out.push_back(std::move(est));
    }
    return out;
}

} // namespace ffx
