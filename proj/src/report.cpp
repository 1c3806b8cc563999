#include "flageffect/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace ffx {

namespace {

std::string fixed(double v, int digits) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

// Three significant figures, printed as a plain decimal (no exponent).
std::string sigfig3(double v) {
    if (v == 0.0) return "0.00";
    const double mag = std::floor(std::log10(std::abs(v)));
    const int decimals = std::max(0, 2 - static_cast<int>(mag));
    return fixed(v, decimals);
}

std::string pad(const std::string& s, std::size_t width, bool right = true) {
    if (s.size() >= width) return s;
    std::string fill(width - s.size(), ' ');
    return right ? fill + s : s + fill;
}

} // namespace

MainEffectsReport render_main_effects(std::span<const EffectEstimate> energy,
                                      std::span<const EffectEstimate> time,
                                      double alpha) {
    struct Row {
        std::string term;
        const EffectEstimate* energy = nullptr;
        const EffectEstimate* time = nullptr;
    };
    std::map<std::string, Row> by_term;
    for (const auto& est : energy) {
        by_term[est.term_label].term = est.term_label;
        by_term[est.term_label].energy = &est;
    }
    for (const auto& est : time) {
        by_term[est.term_label].term = est.term_label;
        by_term[est.term_label].time = &est;
    }

    std::vector<Row> rows;
    rows.reserve(by_term.size());
    for (auto& [_, row] : by_term) rows.push_back(row);
    auto key = [](const Row& r) {
        const EffectEstimate* primary = r.energy ? r.energy : r.time;
        return primary ? std::abs(primary->percent_effect) : 0.0;
    };
    std::sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
        const double ka = key(a), kb = key(b);
        if (ka != kb) return ka > kb;
        return a.term < b.term;
    });

    std::size_t term_width = 6;
    for (const auto& row : rows) term_width = std::max(term_width, row.term.size());

    std::ostringstream text;
    text << "main effects (alpha = " << alpha << ", * = significant)\n";
    text << pad("option", term_width, false) << "  " << pad("energy%", 9) << "    "
         << pad("time%", 9) << "\n";
    std::ostringstream csv;
    csv << "term,energy_pct,energy_p,energy_significant,time_pct,time_p,time_significant\n";
    csv.precision(17);
    for (const auto& row : rows) {
        auto cell = [&](const EffectEstimate* est) {
            if (!est) return pad("-", 9) + "  ";
            return pad(fixed(est->percent_effect, 3), 9) +
                   (est->significant ? " *" : "  ");
        };
        text << pad(row.term, term_width, false) << "  " << cell(row.energy) << "  "
             << cell(row.time) << "\n";
        csv << row.term << ',';
        if (row.energy)
            csv << row.energy->percent_effect << ',' << row.energy->p_value << ','
                << (row.energy->significant ? "true" : "false");
        else
            csv << ",,";
        csv << ',';
        if (row.time)
            csv << row.time->percent_effect << ',' << row.time->p_value << ','
                << (row.time->significant ? "true" : "false");
        else
            csv << ",,";
        csv << '\n';
    }

    MainEffectsReport report;
    report.text = text.str();
    report.plot_csv = csv.str();
    return report;
}

ExhaustiveReport render_exhaustive(const std::vector<RunRecord>& records,
                                   std::size_t n_factors,
                                   const std::vector<std::string>& factor_names,
                                   int base_combo) {
    const int n_combos = 1 << n_factors;
    std::vector<double> sums(n_combos, 0.0);
    std::vector<std::size_t> counts(n_combos, 0);
    for (const auto& rec : records) {
        if (rec.mode != "exhaustive" || rec.status != "ok" || !rec.energy_j) continue;
        if (rec.row < 0 || rec.row >= n_combos) continue;
        sums[rec.row] += *rec.energy_j;
        ++counts[rec.row];
    }

    // Rows run from the all-enabled combination downwards, so the base
    // configuration leads the table.
    ExhaustiveReport report;
    for (int combo = n_combos - 1; combo >= 0; --combo) {
        if (counts[combo] == 0) {
            report.missing.push_back(combo);
            continue;
        }
        ExhaustiveRow row;
        row.combo = combo;
        row.n_records = counts[combo];
        row.mean_energy_j = sums[combo] / static_cast<double>(counts[combo]);
        report.rows.push_back(row);
    }

    const bool have_base =
        base_combo >= 0 && base_combo < n_combos && counts[base_combo] > 0;
    const double base_energy =
        have_base ? sums[base_combo] / static_cast<double>(counts[base_combo]) : 0.0;

    std::ostringstream out;
    for (std::size_t f = 0; f < n_factors; ++f)
        out << "# X" << f + 1 << ": "
            << (f < factor_names.size() ? factor_names[f] : factor_label(static_cast<int>(f)))
            << "\n";
    out << "# percentages are computed from unrounded stored energies; the mJ\n"
        << "# column is rounded to 3 significant figures for display only, so\n"
        << "# recomputing a percentage from the printed mJ values can differ.\n";
    for (std::size_t f = 0; f < n_factors; ++f) out << pad("X" + std::to_string(f + 1), 4);
    out << pad("(mJ)", 10) << pad("(%)", 9) << "\n";
    for (const auto& row : report.rows) {
        for (std::size_t f = 0; f < n_factors; ++f)
            out << pad((row.combo >> f) & 1 ? "on" : "off", 4);
        out << pad(sigfig3(row.mean_energy_j * 1e3), 10);
        if (have_base)
            out << pad(fixed(100.0 * (row.mean_energy_j - base_energy) / base_energy, 2), 9);
        else
            out << pad("-", 9);
        out << "\n";
    }
    if (!report.missing.empty()) {
        out << "missing combinations:";
        for (int combo : report.missing) out << " " << combo;
        out << "\n";
    }
    report.text = out.str();

    std::ostringstream csv;
    csv.precision(17);
    for (std::size_t f = 0; f < n_factors; ++f) csv << "X" << f + 1 << ',';
    csv << "energy_j,percent_vs_base\n";
    for (const auto& row : report.rows) {
        for (std::size_t f = 0; f < n_factors; ++f)
            csv << ((row.combo >> f) & 1 ? "on" : "off") << ',';
        csv << row.mean_energy_j << ',';
        if (have_base)
            csv << 100.0 * (row.mean_energy_j - base_energy) / base_energy;
        csv << '\n';
    }
    report.csv = csv.str();
    return report;
}

std::string render_top_flags(const std::vector<TopFlagsCell>& cells) {
    // Letters by global frequency, then name.
    std::map<std::string, int> flag_counts;
    for (const auto& cell : cells)
        for (const auto& flag : cell.ranked_flags) ++flag_counts[flag];
    std::vector<std::pair<std::string, int>> ordered(flag_counts.begin(), flag_counts.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::map<std::string, std::string> letter_of;
    for (std::size_t i = 0; i < ordered.size(); ++i)
        letter_of[ordered[i].first] = factor_label(static_cast<int>(i));

    std::set<std::string> benchmarks, configurations;
    std::map<std::pair<std::string, std::string>, const TopFlagsCell*> grid;
    for (const auto& cell : cells) {
        benchmarks.insert(cell.benchmark);
        configurations.insert(cell.configuration);
        grid[{cell.benchmark, cell.configuration}] = &cell;
    }

    std::size_t row_width = 9;
    for (const auto& b : benchmarks) row_width = std::max(row_width, b.size());

    std::ostringstream out;
    out << pad("benchmark", row_width, false);
    for (const auto& c : configurations)
        out << "  " << pad(c + " 1st 2nd 3rd", std::max<std::size_t>(c.size(), 12));
    out << "\n";
    for (const auto& b : benchmarks) {
        out << pad(b, row_width, false);
        for (const auto& c : configurations) {
            std::string cell_text;
            auto it = grid.find({b, c});
            for (int slot = 0; slot < 3; ++slot) {
                std::string mark = ".";
                if (it != grid.end() &&
                    slot < static_cast<int>(it->second->ranked_flags.size()))
                    mark = letter_of[it->second->ranked_flags[slot]];
                cell_text += pad(mark, 4);
            }
            out << "  " << pad(cell_text, std::max<std::size_t>(c.size(), 12));
        }
        out << "\n";
    }
    out << "\nlegend (letter, count, flag):\n";
    for (std::size_t i = 0; i < ordered.size(); ++i)
        out << pad(factor_label(static_cast<int>(i)), 3) << pad(std::to_string(ordered[i].second), 5)
            << "  " << ordered[i].first << "\n";
    return out.str();
}

std::string render_sweep(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << pad("level", 8, false) << pad("energy", 10) << pad("time", 10)
        << pad("power", 10) << pad("records", 9) << "\n";
    auto cell = [](const std::optional<double>& v) {
        return v ? fixed(*v, 4) : std::string("n/a");
    };
    for (const auto& row : rows) {
        out << pad(row.level, 8, false) << pad(cell(row.energy_ratio), 10)
            << pad(cell(row.time_ratio), 10) << pad(cell(row.power_ratio), 10)
            << pad(std::to_string(row.ok_records), 9) << "\n";
    }
    out << "(ratios against the first level)\n";
    return out.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out.precision(17);
    out << "level,energy_ratio,time_ratio,power_ratio,energy_j,time_s,power_w,records\n";
    auto cell = [&](const std::optional<double>& v) {
        return v ? std::to_string(*v) : std::string();
    };
    for (const auto& row : rows) {
        out << row.level << ',' << cell(row.energy_ratio) << ',' << cell(row.time_ratio)
            << ',' << cell(row.power_ratio) << ',' << cell(row.energy_j) << ','
            << cell(row.time_s) << ',' << cell(row.power_w) << ',' << row.ok_records
            << '\n';
    }
    return out.str();
}

std::string render_oneshot(const std::vector<OneShotRow>& rows) {
    std::ostringstream out;
    std::size_t flag_width = 6;
    for (const auto& row : rows) flag_width = std::max(flag_width, row.flag.size());
    out << pad("flag", flag_width, false) << pad("+energy%", 11) << pad("+time%", 10)
        << pad("-energy%", 11) << pad("-time%", 10) << "\n";
    auto cell = [](const std::optional<double>& v) {
        return v ? fixed(*v, 2) : std::string("n/a");
    };
    for (const auto& row : rows) {
        out << pad(row.flag, flag_width, false) << pad(cell(row.enable_energy_pct), 11)
            << pad(cell(row.enable_time_pct), 10) << pad(cell(row.disable_energy_pct), 11)
            << pad(cell(row.disable_time_pct), 10) << "\n";
    }
    out << "(percent deltas against the plain base build)\n";
    return out.str();
}

std::string oneshot_csv(const std::vector<OneShotRow>& rows) {
    std::ostringstream out;
    out.precision(17);
    out << "flag,enable_energy_pct,enable_time_pct,disable_energy_pct,disable_time_pct\n";
    auto cell = [&](const std::optional<double>& v) {
        return v ? std::to_string(*v) : std::string();
    };
    for (const auto& row : rows) {
        out << row.flag << ',' << cell(row.enable_energy_pct) << ','
            << cell(row.enable_time_pct) << ',' << cell(row.disable_energy_pct) << ','
            << cell(row.disable_time_pct) << '\n';
    }
    return out.str();
}

bool verify_exhaustive_report(const ExhaustiveReport& report, int base_combo,
                              double tolerance_pp) {
    const ExhaustiveRow* base = nullptr;
    for (const auto& row : report.rows)
        if (row.combo == base_combo) base = &row;
    if (!base) return report.rows.empty();

    // Parse the percent column back out of the rendered text and compare
    // against a fresh computation from the unrounded means.
    std::istringstream in(report.text);
    std::string line;
    std::size_t row_idx = 0;
    while (std::getline(in, line) && row_idx < report.rows.size()) {
        if (line.empty() || line[0] == '#' || line.find("(mJ)") != std::string::npos ||
            line.rfind("missing", 0) == 0)
            continue;
        const auto pos = line.find_last_of(' ');
        if (pos == std::string::npos) return false;
        const double printed = std::stod(line.substr(pos + 1));
        const auto& row = report.rows[row_idx++];
        const double expected =
            100.0 * (row.mean_energy_j - base->mean_energy_j) / base->mean_energy_j;
        if (std::abs(printed - expected) > tolerance_pp) return false;
    }
    return row_idx == report.rows.size();
}

} // namespace ffx
