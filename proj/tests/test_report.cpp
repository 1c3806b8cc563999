#include "flageffect/report.hpp"

#include <sstream>

#include <doctest.h>

using namespace ffx;

namespace {

EffectEstimate estimate(std::string label, double pct, double p, bool sig) {
    EffectEstimate est;
    est.term_label = std::move(label);
    est.percent_effect = pct;
    est.p_value = p;
    est.significant = sig;
    return est;
}

RunRecord exhaustive_record(int combo, double energy_j) {
    RunRecord rec;
    rec.mode = "exhaustive";
    rec.row = combo;
    rec.status = "ok";
    rec.energy_j = energy_j;
    rec.time_s = 1.0;
    return rec;
}

// The published exhaustive case study: four options over the first
// optimisation level, energies in joules, all-enabled first.
const std::vector<double> kCaseStudyEnergies{
    5.780, 5.640, 5.680, 5.730, 5.650, 5.720, 5.610, 5.640,
    5.760, 5.720, 5.860, 5.960, 5.890, 5.870, 5.690, 5.880};

std::vector<RunRecord> case_study_records() {
    std::vector<RunRecord> records;
    for (std::size_t i = 0; i < kCaseStudyEnergies.size(); ++i)
        records.push_back(
            exhaustive_record(15 - static_cast<int>(i), kCaseStudyEnergies[i]));
    return records;
}

} // namespace

TEST_CASE("main effects table orders by |percent| and marks significance") {
    std::vector<EffectEstimate> energy{
        estimate("tree-ter", -2.0, 0.01, true),
        estimate("dce", 6.0, 0.001, true),
        estimate("ivopts", 0.5, 0.7, false),
    };
    std::vector<EffectEstimate> time{
        estimate("tree-ter", -1.5, 0.04, true),
        estimate("dce", 5.5, 0.002, true),
        estimate("ivopts", 0.1, 0.9, false),
    };
    MainEffectsReport report = render_main_effects(energy, time, 0.05);

    const auto dce = report.text.find("dce");
    const auto ter = report.text.find("tree-ter");
    const auto ivo = report.text.find("ivopts");
    REQUIRE(dce != std::string::npos);
    CHECK(dce < ter);
    CHECK(ter < ivo);

    // Significant rows carry the marker, insignificant rows do not.
    std::istringstream lines(report.text);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.find("ivopts") != std::string::npos)
            CHECK(line.find('*') == std::string::npos);
        if (line.find("dce") != std::string::npos)
            CHECK(line.find('*') != std::string::npos);
    }

    // Both metrics present for every row of the plot data.
    CHECK(report.plot_csv.find("energy_pct") != std::string::npos);
    CHECK(report.plot_csv.find("time_pct") != std::string::npos);
    CHECK(report.plot_csv.find("dce,") != std::string::npos);
}

TEST_CASE("main effects table renders with zero significant rows") {
    std::vector<EffectEstimate> energy{estimate("a", 0.3, 0.5, false)};
    MainEffectsReport report = render_main_effects(energy, {}, 0.05);
    std::istringstream lines(report.text);
    std::string line;
    std::getline(lines, line); // header explains the marker
    while (std::getline(lines, line)) CHECK(line.find('*') == std::string::npos);
}

TEST_CASE("exhaustive table reproduces the case-study arithmetic") {
    auto records = case_study_records();
    ExhaustiveReport report = render_exhaustive(
        records, 4, {"guess-branch-probability", "tree-dominator-opts", "tree-ch", "if-conversion"},
        15);
    REQUIRE(report.rows.size() == 16);
    CHECK(report.missing.empty());

    // Base row prints 0.00, and the 5640/5780 row prints the percentage
    // computed from unrounded stored values (-2.42), not the paper's -2.49
    // which came from its own unrounded raws.
    CHECK(report.rows[0].combo == 15);
    CHECK(report.text.find("5780") != std::string::npos);
    CHECK(report.text.find("0.00") != std::string::npos);
    CHECK(report.text.find("5640") != std::string::npos);
    CHECK(report.text.find("-2.42") != std::string::npos);
    CHECK(report.text.find("unrounded") != std::string::npos); // the caveat

    CHECK(verify_exhaustive_report(report, 15));
}

TEST_CASE("exhaustive table with equal responses is all zeros") {
    std::vector<RunRecord> records;
    for (int combo = 0; combo < 4; ++combo)
        records.push_back(exhaustive_record(combo, 2.0));
    ExhaustiveReport report = render_exhaustive(records, 2, {"a", "b"}, 3);
    for (const auto& row : report.rows)
        CHECK(row.mean_energy_j == doctest::Approx(2.0));
    std::size_t zero_rows = 0;
    std::istringstream lines(report.text);
    std::string line;
    while (std::getline(lines, line))
        if (line.find("0.00") != std::string::npos) ++zero_rows;
    CHECK(zero_rows >= 4);
}

TEST_CASE("exhaustive table lists missing combinations") {
    std::vector<RunRecord> records{exhaustive_record(3, 1.0), exhaustive_record(1, 1.1)};
    ExhaustiveReport report = render_exhaustive(records, 2, {"a", "b"}, 3);
    CHECK(report.missing == std::vector<int>{2, 0});
    CHECK(report.text.find("missing combinations: 2 0") != std::string::npos);
}

TEST_CASE("top-flags grid fills cells and legend counts add up") {
    std::vector<TopFlagsCell> cells{
        {"crc32", "m0", {"move-loop-invariants"}},
        {"crc32", "m3", {"move-loop-invariants"}},
        {"blowfish", "m0", {"omit-frame-pointer", "tree-forwprop", "guess-branch-probability"}},
        {"blowfish", "m3", {"tree-forwprop", "omit-frame-pointer", "tree-ter"}},
    };
    const std::string table = render_top_flags(cells);

    // Letters by frequency: omit-frame-pointer/move-loop-invariants and
    // tree-forwprop each appear twice; ties go alphabetically.
    CHECK(table.find("legend") != std::string::npos);
    CHECK(table.find("move-loop-invariants") != std::string::npos);

    // crc32 has a single winner, so its 2nd/3rd slots are dots.
    std::istringstream lines(table);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.rfind("crc32", 0) == 0)
            CHECK(std::count(line.begin(), line.end(), '.') == 4); // two cells x 2 dots
    }

    // Legend counts sum to the number of filled cells.
    int total = 0;
    bool in_legend = false;
    std::istringstream again(table);
    while (std::getline(again, line)) {
        if (line.find("legend") != std::string::npos) {
            in_legend = true;
            continue;
        }
        if (!in_legend || line.empty()) continue;
        std::istringstream fields(line);
        std::string letter;
        int count = 0;
        fields >> letter >> count;
        total += count;
    }
    CHECK(total == 8);
}

TEST_CASE("empty rankings render an all-dot grid") {
    std::vector<TopFlagsCell> cells{{"crc32", "m0", {}}, {"sha", "m0", {}}};
    const std::string table = render_top_flags(cells);
    std::istringstream lines(table);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.rfind("crc32", 0) == 0 || line.rfind("sha", 0) == 0)
            CHECK(std::count(line.begin(), line.end(), '.') == 3);
    }
}

TEST_CASE("rendering is deterministic") {
    auto records = case_study_records();
    const std::vector<std::string> names{"a", "b", "c", "d"};
    ExhaustiveReport one = render_exhaustive(records, 4, names, 15);
    ExhaustiveReport two = render_exhaustive(records, 4, names, 15);
    CHECK(one.text == two.text);

    std::vector<EffectEstimate> energy{estimate("x", 1.0, 0.01, true)};
    CHECK(render_main_effects(energy, {}, 0.05).text ==
          render_main_effects(energy, {}, 0.05).text);
}

TEST_CASE("sweep and oneshot renderers emit aligned tables") {
    std::vector<SweepRow> sweep(2);
    sweep[0].level = "O0";
    sweep[0].energy_ratio = 1.0;
    sweep[0].time_ratio = 1.0;
    sweep[0].power_ratio = 1.0;
    sweep[1].level = "O2";
    sweep[1].energy_ratio = 0.42;
    sweep[1].time_ratio = 0.40;
    sweep[1].power_ratio = 1.05;
    const std::string table = render_sweep(sweep);
    CHECK(table.find("O2") != std::string::npos);
    CHECK(table.find("0.4200") != std::string::npos);

    std::vector<OneShotRow> rows(1);
    rows[0].flag = "guess-branch-probability";
    rows[0].disable_energy_pct = -4.0;
    const std::string oneshot = render_oneshot(rows);
    CHECK(oneshot.find("guess-branch-probability") != std::string::npos);
    CHECK(oneshot.find("-4.00") != std::string::npos);
    CHECK(oneshot.find("n/a") != std::string::npos);
}
