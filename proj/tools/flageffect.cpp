// Command-line front end: exposes the experiment modes and analyses as
// subcommands over an experiment configuration file.
//
// Exit codes: 0 success, 1 user/configuration error, 2 campaign paused at a
// resumable checkpoint (device unreachable).

#include "flageffect/campaign.hpp"
#include "flageffect/design.hpp"
#include "flageffect/experiment.hpp"
#include "flageffect/kernels.hpp"
#include "flageffect/report.hpp"
#include "flageffect/stats.hpp"
#include "flageffect/version.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using namespace ffx;

constexpr int kExitOk = 0;
constexpr int kExitUserError = 1;
constexpr int kExitPaused = 2;

struct Invocation {
    std::string config_path;
    fs::path out_dir = "out";
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> metric;
    std::optional<double> alpha;
};

Experiment load(const Invocation& inv) {
    if (inv.config_path.empty()) throw ConfigError("--config is required");
    Experiment e = load_experiment(inv.config_path, inv.overrides);
    if (inv.seed) e.seed = *inv.seed;
    if (inv.alpha) {
        if (!(*inv.alpha > 0.0 && *inv.alpha < 1.0))
            throw ConfigError("--alpha must be in (0, 1)");
        e.alpha = *inv.alpha;
    }
    if (inv.metric) {
        auto m = parse_metric(*inv.metric);
        if (!m) throw ConfigError("unknown metric '" + *inv.metric + "'");
        e.metric = *m;
    }
    return e;
}

void write_manifest(const Invocation& inv, const Experiment& e,
                    const std::string& subcommand) {
    fs::create_directories(inv.out_dir);
    std::ifstream in(inv.config_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    nlohmann::json j;
    j["tool"] = "flageffect";
    j["version"] = kVersion;
    j["subcommand"] = subcommand;
    j["config"] = inv.config_path;
    j["config_digest"] = hex64(fnv1a(buffer.str()));
    j["overrides"] = inv.overrides;
    j["seed"] = e.seed;
    j["alpha"] = e.alpha;
    j["metric"] = to_string(e.metric);
    j["kernel"] = kernels::active_ops().name;
    j["timestamp"] = std::chrono::duration<double>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    std::ofstream out(inv.out_dir / ("manifest-" + subcommand + ".json"));
    out << j.dump(2) << "\n";
}

std::vector<std::string> design_names(const Experiment& e, int n_factors) {
    std::vector<std::string> names = e.factor_names();
    if (names.empty())
        for (int f = 0; f < n_factors; ++f) names.push_back(factor_label(f));
    return names;
}

DesignMatrix make_design(const Experiment& e) {
    int n = static_cast<int>(e.factors.size());
    if (n == 0) n = e.n_factors;
    if (n <= 0)
        throw ConfigError("no factors configured and campaign.n_factors not set");
    if (e.max_runs <= 0) throw ConfigError("campaign.max_runs must be set");
    return generate_fractional(n, e.resolution, e.max_runs);
}

void save_design(const Invocation& inv, const Experiment& e, const DesignMatrix& d) {
    fs::create_directories(inv.out_dir);
    std::ofstream csv(inv.out_dir / "design.csv");
    write_design_csv(csv, d, design_names(e, d.n_factors));
    std::ofstream alias(inv.out_dir / "alias.txt");
    alias << render_alias_report(alias_structure(d, 2), design_names(e, d.n_factors));
}

int cmd_design(const Invocation& inv) {
    Experiment e = load(inv);
    DesignMatrix d = make_design(e);
    save_design(inv, e, d);
    write_manifest(inv, e, "design");
    std::cout << "design: " << d.n_factors << " factors in " << d.n_runs
              << " runs, resolution " << to_string(d.achieved_resolution) << "\n"
              << "wrote " << (inv.out_dir / "design.csv").string() << " and alias.txt\n";
    return kExitOk;
}

int finish_campaign(const CampaignResult& result, const Invocation& inv) {
    std::cout << "campaign: " << result.executed << " new records, " << result.skipped
              << " already present\n";
    if (result.paused) {
        nlohmann::json j;
        j["paused"] = true;
        j["reason"] = result.pause_reason;
        std::ofstream out(inv.out_dir / "checkpoint.json");
        out << j.dump(2) << "\n";
        std::cerr << "campaign paused (resumable): " << result.pause_reason << "\n";
        return kExitPaused;
    }
    fs::remove(inv.out_dir / "checkpoint.json");
    return kExitOk;
}

int cmd_run(const Invocation& inv, const char* name, bool force_simulated) {
    Experiment e = load(inv);
    if (force_simulated && e.backend.type != BackendType::simulated)
        throw ConfigError("the simulate subcommand requires backend.type = simulated");
    if (e.factors.empty()) throw ConfigError("no factors configured");
    DesignMatrix d = make_design(e);
    save_design(inv, e, d);
    write_manifest(inv, e, name);

    ResultStore store(inv.out_dir / e.store_name);
    auto plan = plan_runs(e, d);
    CampaignResult result = execute_campaign(e, plan, store, inv.out_dir);
    return finish_campaign(result, inv);
}

int cmd_analyze(const Invocation& inv) {
    Experiment e = load(inv);
    write_manifest(inv, e, "analyze");

    std::ifstream design_in(inv.out_dir / "design.csv");
    if (!design_in)
        throw ConfigError("no design.csv in " + inv.out_dir.string() +
                          " (run the campaign first)");
    NamedDesign named = read_design_csv(design_in);

    ResultStore store(inv.out_dir / e.store_name);
    if (store.records().empty())
        throw ConfigError("result store is empty: " + (inv.out_dir / e.store_name).string());

    TestConfig cfg;
    cfg.alpha = e.alpha;
    ResponseSet responses =
        responses_from_store(store.records(), named.design.n_runs, e.metric);
    auto estimates = analyze_design(named.design, responses, cfg, named.names);

    const fs::path effects_path =
        inv.out_dir / ("effects_" + to_string(e.metric) + ".csv");
    std::ofstream csv(effects_path);
    write_effects_csv(csv, estimates, cfg, e.metric);

    auto top = rank_top_flags(estimates, static_cast<int>(estimates.size()));
    std::ofstream sig(inv.out_dir / ("significant_" + to_string(e.metric) + ".txt"));
    for (const auto& est : top)
        sig << est.term_label << " " << est.percent_effect << "%\n";

    std::sort(estimates.begin(), estimates.end(),
              [](const EffectEstimate& a, const EffectEstimate& b) {
                  return std::abs(a.percent_effect) > std::abs(b.percent_effect);
              });
    std::cout << "effects on " << to_string(e.metric) << " (alpha = " << cfg.alpha
              << "), top entries:\n";
    const std::size_t shown = std::min<std::size_t>(estimates.size(), 15);
    for (std::size_t i = 0; i < shown; ++i) {
        const auto& est = estimates[i];
        std::cout << "  " << est.term_label << ": " << est.percent_effect << "%"
                  << (est.significant ? " *" : "") << " (p=" << est.p_value << ")\n";
    }
    std::cout << "wrote " << effects_path.string() << "\n";
    return kExitOk;
}

int cmd_sweep(const Invocation& inv) {
    Experiment e = load(inv);
    if (e.levels.empty()) throw ConfigError("campaign.levels must list the sweep levels");
    write_manifest(inv, e, "sweep");
    ResultStore store(inv.out_dir / e.store_name);
    SweepOutcome outcome = level_sweep(e, store, inv.out_dir);
    const int code = finish_campaign(outcome.campaign, inv);
    if (code != kExitOk) return code;
    const std::string table = render_sweep(outcome.rows);
    std::ofstream out(inv.out_dir / "sweep.txt");
    out << table;
    std::ofstream csv(inv.out_dir / "sweep.csv");
    csv << sweep_csv(outcome.rows);
    std::cout << table;
    return kExitOk;
}

int cmd_oneshot(const Invocation& inv) {
    Experiment e = load(inv);
    if (e.factors.empty()) throw ConfigError("no factors configured");
    write_manifest(inv, e, "oneshot");
    ResultStore store(inv.out_dir / e.store_name);
    OneShotOutcome outcome = one_at_a_time(e, store, inv.out_dir);
    const int code = finish_campaign(outcome.campaign, inv);
    if (code != kExitOk) return code;
    const std::string table = render_oneshot(outcome.rows);
    std::ofstream out(inv.out_dir / "oneshot.txt");
    out << table;
    std::cout << table;
    return kExitOk;
}

int cmd_exhaustive(const Invocation& inv) {
    Experiment e = load(inv);
    write_manifest(inv, e, "exhaustive");
    ResultStore store(inv.out_dir / e.store_name);
    auto plan = exhaustive_plan(e);
    CampaignResult result = execute_campaign(e, plan, store, inv.out_dir);
    const int code = finish_campaign(result, inv);
    if (code != kExitOk) return code;

    const int base_combo = (1 << e.factors.size()) - 1; // everything enabled
    ExhaustiveReport report = render_exhaustive(store.records(), e.factors.size(),
                                                e.factor_names(), base_combo);
    std::ofstream out(inv.out_dir / "exhaustive.txt");
    out << report.text;
    std::cout << report.text;
    return kExitOk;
}

int cmd_report(const Invocation& inv, const std::vector<std::string>& top_flag_files,
               int top_k) {
    Experiment e = load(inv);
    write_manifest(inv, e, "report");

    if (!top_flag_files.empty()) {
        std::vector<TopFlagsCell> cells;
        for (const auto& file : top_flag_files) {
            std::ifstream in(file);
            if (!in) throw ConfigError("cannot open rankings file: " + file);
            auto estimates = read_effects_csv(in);
            auto top = rank_top_flags(estimates, top_k);
            TopFlagsCell cell;
            const std::string stem = fs::path(file).stem().string();
            const auto at = stem.find('@');
            cell.benchmark = at == std::string::npos ? stem : stem.substr(0, at);
            cell.configuration = at == std::string::npos ? "default" : stem.substr(at + 1);
            for (const auto& est : top) cell.ranked_flags.push_back(est.term_label);
            cells.push_back(std::move(cell));
        }
        const std::string table = render_top_flags(cells);
        std::ofstream out(inv.out_dir / "top_flags.txt");
        out << table;
        std::cout << table;
        return kExitOk;
    }

    ResultStore store(inv.out_dir / e.store_name);
    if (store.records().empty()) throw ConfigError("result store is empty");
    bool rendered = false;

    // Main-effects table over whatever design-mode records exist.
    std::ifstream design_in(inv.out_dir / "design.csv");
    bool have_ffd = false;
    for (const auto& rec : store.records())
        if (rec.mode == "ffd") have_ffd = true;
    if (design_in && have_ffd) {
        NamedDesign named = read_design_csv(design_in);
        TestConfig cfg;
        cfg.alpha = e.alpha;
        auto analyze_metric = [&](Metric metric) {
            ResponseSet rs =
                responses_from_store(store.records(), named.design.n_runs, metric);
            bool any = false;
            for (const auto& reps : rs.replicates)
                if (!reps.empty()) any = true;
            std::vector<EffectEstimate> out;
            if (any) out = analyze_design(named.design, rs, cfg, named.names);
            return out;
        };
        auto energy = analyze_metric(Metric::energy);
        auto time = analyze_metric(Metric::time);
        if (!energy.empty() || !time.empty()) {
            MainEffectsReport report = render_main_effects(energy, time, cfg.alpha);
            std::ofstream txt(inv.out_dir / "main_effects.txt");
            txt << report.text;
            std::ofstream csv(inv.out_dir / "main_effects.csv");
            csv << report.plot_csv;
            std::cout << report.text;
            rendered = true;
        }
    }

    bool have_exhaustive = false;
    for (const auto& rec : store.records())
        if (rec.mode == "exhaustive") have_exhaustive = true;
    if (have_exhaustive && !e.factors.empty()) {
        const int base_combo = (1 << e.factors.size()) - 1;
        ExhaustiveReport report = render_exhaustive(store.records(), e.factors.size(),
                                                    e.factor_names(), base_combo);
        std::ofstream out(inv.out_dir / "exhaustive.txt");
        out << report.text;
        std::cout << report.text;
        rendered = true;
    }

    if (!rendered)
        throw ConfigError("no renderable records found in the store");
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"compiler-flag effect analysis toolkit"};
    app.set_version_flag("--version", ffx::kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    Invocation inv;
    app.add_option("--config", inv.config_path, "experiment configuration file");
    app.add_option("--out", inv.out_dir, "output directory (default: out)");
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "seed override");
    app.add_option("--set", inv.overrides, "config override section.key=value")
        ->take_all();
    std::string metric_value;
    auto* metric_opt =
        app.add_option("--metric", metric_value, "energy|time|power");
    double alpha_value = 0.0;
    auto* alpha_opt = app.add_option("--alpha", alpha_value, "significance level");

    auto* design = app.add_subcommand("design", "emit design CSV and alias report");
    auto* run = app.add_subcommand("run", "execute the design campaign (resumable)");
    auto* analyze = app.add_subcommand("analyze", "effects + significance from a store");
    auto* sweep = app.add_subcommand("sweep", "optimisation-level sweep");
    auto* oneshot = app.add_subcommand("oneshot", "one-at-a-time flag toggles");
    auto* exhaustive = app.add_subcommand("exhaustive", "enumerate a small flag set");
    auto* simulate = app.add_subcommand("simulate", "design campaign on the simulated device");
    auto* report = app.add_subcommand("report", "render tables from a store");
    std::vector<std::string> top_flag_files;
    int top_k = 3;
    report->add_option("--top-flags", top_flag_files,
                       "effects CSVs (named benchmark@config.csv) for the top-flags table")
        ->take_all();
    report->add_option("--top", top_k, "entries per cell (default 3)");

    CLI11_PARSE(app, argc, argv);

    if (seed_opt->count()) inv.seed = seed_value;
    if (metric_opt->count()) inv.metric = metric_value;
    if (alpha_opt->count()) inv.alpha = alpha_value;

    try {
        if (design->parsed()) return cmd_design(inv);
        if (run->parsed()) return cmd_run(inv, "run", false);
        if (simulate->parsed()) return cmd_run(inv, "simulate", true);
        if (analyze->parsed()) return cmd_analyze(inv);
        if (sweep->parsed()) return cmd_sweep(inv);
        if (oneshot->parsed()) return cmd_oneshot(inv);
        if (exhaustive->parsed()) return cmd_exhaustive(inv);
        if (report->parsed()) return cmd_report(inv, top_flag_files, top_k);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUserError;
    }
    return kExitUserError;
}
