#include "flageffect/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ffx {

namespace {

std::string replace_all(std::string text, const std::string& what,
                        const std::string& with) {
    std::size_t pos = 0;
    while ((pos = text.find(what, pos)) != std::string::npos) {
        text.replace(pos, what.size(), with);
        pos += with.size();
    }
    return text;
}

std::string joined_sources(const Experiment& e) {
    std::string out;
    for (const auto& s : e.sources) {
        if (!out.empty()) out += ' ';
        out += s;
    }
    return out;
}

std::uint64_t source_digest(const Experiment& e) {
    std::uint64_t digest = fnv1a(std::string("sources"));
    for (const auto& src : e.sources) {
        digest = fnv1a(src, digest);
        std::ifstream in(src, std::ios::binary);
        if (in) {
            std::stringstream buffer;
            buffer << in.rdbuf();
            digest = fnv1a(buffer.str(), digest);
        }
    }
    return digest;
}

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::string build_flag_string(const Experiment& e,
                              std::span<const std::int8_t> levels) {
    std::string flags = expand_level(e.base_level, e.lto_flag);
    for (std::size_t f = 0; f < e.factors.size(); ++f) {
        if (levels[f] == 0) continue;
        flags += ' ';
        flags += levels[f] > 0 ? e.factors[f].enable : e.factors[f].disable;
    }
    return flags;
}

double sim_duration(const Experiment& e, const PlanEntry& entry) {
    double duration = e.sim.base_time_s;
    for (std::size_t f = 0; f < e.factors.size(); ++f) {
        auto it = e.sim.time_effect.find(e.factors[f].name);
        if (it != e.sim.time_effect.end())
            duration *= 1.0 + it->second * static_cast<double>(entry.levels[f]);
    }
    auto scale = e.sim.level_scale.find(entry.label);
    if (scale != e.sim.level_scale.end()) duration *= scale->second.time_mult;
    return duration;
}

MeasureRequest build_request(const Experiment& e, const PlanEntry& entry,
                             const std::filesystem::path& binary, int replicate) {
    MeasureRequest req;
    const std::string bin = binary.string();
    switch (e.backend.type) {
        case BackendType::external_command:
            req.run_command = replace_all(e.backend.command, "{bin}", bin);
            break;
        case BackendType::wall_clock:
        case BackendType::trace_file:
            req.run_command = replace_all(e.run_command, "{bin}", bin);
            break;
        case BackendType::simulated:
            break;
    }
    req.trace_path = replace_all(e.backend.trace_path, "{bin}", bin);
    req.levels = entry.levels;
    req.power_effects.resize(e.factors.size(), 0.0);
    for (std::size_t f = 0; f < e.factors.size(); ++f) {
        auto it = e.sim.power_effect.find(e.factors[f].name);
        if (it != e.sim.power_effect.end()) req.power_effects[f] = it->second;
    }
    req.sim_duration_s = sim_duration(e, entry);
    auto scale = e.sim.level_scale.find(entry.label);
    req.sim_power_scale =
        scale != e.sim.level_scale.end() ? scale->second.power_mult : 1.0;
    req.sim_seed = mix_seed(e.backend.sim_seed ^ e.seed, fnv1a(entry.run_id),
                            static_cast<std::uint64_t>(replicate));
    return req;
}

std::string first_lines(const std::string& text, std::size_t max_chars = 400) {
    if (text.size() <= max_chars) return text;
    return text.substr(0, max_chars) + "...";
}

} // namespace

std::string compute_run_id(const Experiment& e, const std::string& flags) {
    std::uint64_t digest = fnv1a(e.compiler_command);
    digest = fnv1a(flags, digest);
    digest = fnv1a(std::to_string(source_digest(e)), digest);
    digest = fnv1a(e.backend.id(), digest);
    return hex64(digest);
}

std::vector<PlanEntry> plan_runs(const Experiment& e, const DesignMatrix& d) {
    if (d.n_factors != static_cast<int>(e.factors.size()))
        throw std::invalid_argument("plan_runs: design has " + std::to_string(d.n_factors) +
                                    " factors, experiment has " +
                                    std::to_string(e.factors.size()));
    std::vector<PlanEntry> plan;
    plan.reserve(d.n_runs);
    for (int r = 0; r < d.n_runs; ++r) {
        PlanEntry entry;
        entry.mode = "ffd";
        entry.row = r;
        entry.levels = signs_for_run(d, r);
        entry.flags = build_flag_string(e, entry.levels);
        entry.run_id = compute_run_id(e, entry.flags);
        plan.push_back(std::move(entry));
    }
    return plan;
}

std::vector<PlanEntry> exhaustive_plan(const Experiment& e) {
    const std::size_t m = e.factors.size();
    if (m == 0) throw std::invalid_argument("exhaustive_plan: no factors configured");
    if (m > 12)
        throw std::invalid_argument("exhaustive_plan: " + std::to_string(m) +
                                    " factors exceed the limit of 12 (" +
                                    std::to_string(1u << std::min<std::size_t>(m, 20)) +
                                    " combinations)");
    std::vector<PlanEntry> plan;
    plan.reserve(std::size_t{1} << m);
    for (std::uint32_t combo = 0; combo < (1u << m); ++combo) {
        PlanEntry entry;
        entry.mode = "exhaustive";
        entry.row = static_cast<int>(combo);
        entry.levels.resize(m);
        for (std::size_t f = 0; f < m; ++f)
            entry.levels[f] = (combo >> f) & 1 ? 1 : -1;
        entry.flags = build_flag_string(e, entry.levels);
        entry.run_id = compute_run_id(e, entry.flags);
        plan.push_back(std::move(entry));
    }
    return plan;
}

std::vector<PlanEntry> oneshot_plan(const Experiment& e) {
    if (e.factors.empty()) throw std::invalid_argument("oneshot_plan: no factors configured");
    std::vector<PlanEntry> plan;
    plan.reserve(2 * e.factors.size() + 1);

    PlanEntry base;
    base.mode = "oneshot";
    base.label = "base";
    base.levels.assign(e.factors.size(), 0);
    base.flags = build_flag_string(e, base.levels);
    base.run_id = compute_run_id(e, base.flags);
    plan.push_back(std::move(base));

    for (std::size_t f = 0; f < e.factors.size(); ++f) {
        for (int sign : {+1, -1}) {
            PlanEntry entry;
            entry.mode = "oneshot";
            entry.label = (sign > 0 ? "+" : "-") + e.factors[f].name;
            entry.levels.assign(e.factors.size(), 0);
            entry.levels[f] = static_cast<std::int8_t>(sign);
            entry.flags = build_flag_string(e, entry.levels);
            entry.run_id = compute_run_id(e, entry.flags);
            plan.push_back(std::move(entry));
        }
    }
    return plan;
}

std::vector<PlanEntry> sweep_plan(const Experiment& e) {
    if (e.levels.empty())
        throw std::invalid_argument("sweep_plan: campaign.levels is empty");
    std::vector<PlanEntry> plan;
    plan.reserve(e.levels.size());
    for (const auto& level : e.levels) {
        PlanEntry entry;
        entry.mode = "sweep";
        entry.label = level;
        entry.levels.assign(e.factors.size(), 0);
        entry.flags = expand_level(level, e.lto_flag);
        entry.run_id = compute_run_id(e, entry.flags);
        plan.push_back(std::move(entry));
    }
    return plan;
}

std::vector<std::size_t> execution_order(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    SimRng rng(seed ^ 0x5eedc0ffee123456ULL);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next() % i);
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

CompileOutcome compile(const Experiment& e, const PlanEntry& entry,
                       const std::filesystem::path& workdir) {
    CompileOutcome outcome;
    if (e.compiler_command.empty()) {
        // No build step configured (e.g. pure simulation): trivially ok.
        outcome.ok = true;
        return outcome;
    }
    const auto cache_dir = workdir / "cache" / entry.run_id;
    outcome.binary = cache_dir / "a.out";
    if (std::filesystem::exists(outcome.binary)) {
        outcome.ok = true;
        outcome.cache_hit = true;
        return outcome;
    }
    std::filesystem::create_directories(cache_dir);

    std::string cmd = e.compiler_command;
    cmd = replace_all(cmd, "{flags}", entry.flags);
    cmd = replace_all(cmd, "{src}", joined_sources(e));
    cmd = replace_all(cmd, "{out}", outcome.binary.string());
    CommandResult r = run_command(cmd);

    std::ofstream log(cache_dir / "compile.log");
    log << "$ " << cmd << "\n" << r.output;
    log << "\nexit: " << r.exit_code << "\n";

    if (r.exit_code != 0) {
        outcome.diagnostics = "compiler exited " + std::to_string(r.exit_code) + ": " +
                              first_lines(r.output);
        std::filesystem::remove(outcome.binary);
        return outcome;
    }
    if (!std::filesystem::exists(outcome.binary)) {
        outcome.diagnostics = "compiler produced no output binary";
        return outcome;
    }
    outcome.ok = true;
    return outcome;
}

CampaignResult execute_campaign(const Experiment& e, std::span<const PlanEntry> plan,
                                ResultStore& store, const std::filesystem::path& workdir) {
    CampaignResult result;
    Device device(e.backend);

    std::vector<std::size_t> order;
    if (e.run_order == RunOrder::randomized)
        order = execution_order(plan.size(), e.seed);
    else {
        order.resize(plan.size());
        for (std::size_t i = 0; i < plan.size(); ++i) order[i] = i;
    }

    auto pending = [&](const PlanEntry& entry) {
        for (int rep = 0; rep < e.replicates; ++rep)
            if (!store.contains(entry.run_id, rep)) return true;
        return false;
    };

    // Optional parallel build phase; measurements stay serialized through
    // the device below.
    if (e.compile_jobs > 1 && !e.compiler_command.empty()) {
        std::vector<const PlanEntry*> todo;
        for (std::size_t idx : order)
            if (pending(plan[idx])) todo.push_back(&plan[idx]);
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= todo.size()) return;
                compile(e, *todo[i], workdir);
            }
        };
        std::vector<std::thread> threads;
        const int width = std::min<int>(e.compile_jobs, static_cast<int>(todo.size()));
        for (int i = 0; i < width; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    for (std::size_t idx : order) {
        const PlanEntry& entry = plan[idx];
        if (!pending(entry)) {
            result.skipped += static_cast<std::size_t>(e.replicates);
            continue;
        }
        const CompileOutcome built = compile(e, entry, workdir);

        for (int rep = 0; rep < e.replicates; ++rep) {
            if (store.contains(entry.run_id, rep)) {
                ++result.skipped;
                continue;
            }
            RunRecord record;
            record.run_id = entry.run_id;
            record.mode = entry.mode;
            record.row = entry.row;
            record.label = entry.label;
            record.flags = entry.flags;
            record.replicate = rep;
            record.t_start = now_s();

            if (!built.ok) {
                record.status = "unavailable";
                record.reason = built.diagnostics;
            } else {
                Measurement m;
                try {
                    m = device.measure(build_request(e, entry, built.binary, rep));
                } catch (const DeviceUnreachable& ex) {
                    result.paused = true;
                    result.pause_reason = ex.what();
                    return result;
                }
                if (m.status == MeasureStatus::ok) {
                    record.status = "ok";
                    record.energy_j = m.energy_j;
                    record.time_s = m.time_s;
                    record.avg_power_w = m.avg_power_w;
                } else {
                    record.status = "unavailable";
                    record.reason = m.reason;
                }
            }
            record.t_end = now_s();
            store.append(record);
            ++result.executed;
        }
    }
    return result;
}

ResponseSet responses_from_store(const std::vector<RunRecord>& records, int n_rows,
                                 Metric metric, const std::string& mode) {
    ResponseSet rs;
    rs.metric = metric;
    rs.replicates.resize(n_rows);
    for (const auto& rec : records) {
        if (rec.mode != mode || rec.status != "ok") continue;
        if (rec.row < 0 || rec.row >= n_rows)
            throw std::runtime_error("store record row " + std::to_string(rec.row) +
                                     " outside design with " + std::to_string(n_rows) +
                                     " rows");
        std::optional<double> value;
        switch (metric) {
            case Metric::energy: value = rec.energy_j; break;
            case Metric::time: value = rec.time_s; break;
            case Metric::power: value = rec.avg_power_w; break;
        }
        if (value) rs.replicates[rec.row].push_back(*value);
    }
    return rs;
}

namespace {

struct LabelStats {
    std::size_t count = 0;
    double energy = 0.0, time = 0.0, power = 0.0;
    std::size_t energy_n = 0, time_n = 0, power_n = 0;

    void add(const RunRecord& rec) {
        ++count;
        if (rec.energy_j) {
            energy += *rec.energy_j;
            ++energy_n;
        }
        if (rec.time_s) {
            time += *rec.time_s;
            ++time_n;
        }
        if (rec.avg_power_w) {
            power += *rec.avg_power_w;
            ++power_n;
        }
    }
    std::optional<double> mean_energy() const {
        return energy_n ? std::optional<double>(energy / energy_n) : std::nullopt;
    }
    std::optional<double> mean_time() const {
        return time_n ? std::optional<double>(time / time_n) : std::nullopt;
    }
    std::optional<double> mean_power() const {
        return power_n ? std::optional<double>(power / power_n) : std::nullopt;
    }
};

std::map<std::string, LabelStats> stats_by_label(const std::vector<RunRecord>& records,
                                                 const std::string& mode) {
    std::map<std::string, LabelStats> stats;
    for (const auto& rec : records)
        if (rec.mode == mode && rec.status == "ok") stats[rec.label].add(rec);
    return stats;
}

std::optional<double> ratio(std::optional<double> num, std::optional<double> den) {
    if (num && den && *den != 0.0) return *num / *den;
    return std::nullopt;
}

std::optional<double> pct_delta(std::optional<double> v, std::optional<double> base) {
    if (v && base && *base != 0.0) return 100.0 * (*v - *base) / *base;
    return std::nullopt;
}

} // namespace

SweepOutcome level_sweep(const Experiment& e, ResultStore& store,
                         const std::filesystem::path& workdir) {
    SweepOutcome outcome;
    auto plan = sweep_plan(e);
    outcome.campaign = execute_campaign(e, plan, store, workdir);
    if (outcome.campaign.paused) return outcome;

    auto stats = stats_by_label(store.records(), "sweep");
    const std::string& baseline = e.levels.front();
    auto base_it = stats.find(baseline);
    if (base_it == stats.end() || base_it->second.count == 0)
        throw std::runtime_error("level_sweep: baseline level '" + baseline +
                                 "' has no usable measurements; cannot form ratios");
    const LabelStats& base = base_it->second;

    for (const auto& level : e.levels) {
        SweepRow row;
        row.level = level;
        auto it = stats.find(level);
        if (it != stats.end()) {
            row.ok_records = it->second.count;
            row.energy_j = it->second.mean_energy();
            row.time_s = it->second.mean_time();
            row.power_w = it->second.mean_power();
            row.energy_ratio = ratio(row.energy_j, base.mean_energy());
            row.time_ratio = ratio(row.time_s, base.mean_time());
            row.power_ratio = ratio(row.power_w, base.mean_power());
        }
        outcome.rows.push_back(std::move(row));
    }
    return outcome;
}

OneShotOutcome one_at_a_time(const Experiment& e, ResultStore& store,
                             const std::filesystem::path& workdir) {
    OneShotOutcome outcome;
    auto plan = oneshot_plan(e);
    outcome.campaign = execute_campaign(e, plan, store, workdir);
    if (outcome.campaign.paused) return outcome;

    auto stats = stats_by_label(store.records(), "oneshot");
    auto base_it = stats.find("base");
    if (base_it == stats.end() || base_it->second.count == 0)
        throw std::runtime_error("one_at_a_time: base build has no usable measurements");
    const LabelStats& base = base_it->second;

    for (const auto& factor : e.factors) {
        OneShotRow row;
        row.flag = factor.name;
        auto en = stats.find("+" + factor.name);
        auto dis = stats.find("-" + factor.name);
        if (en != stats.end()) {
            row.enable_energy_pct = pct_delta(en->second.mean_energy(), base.mean_energy());
            row.enable_time_pct = pct_delta(en->second.mean_time(), base.mean_time());
        }
        if (dis != stats.end()) {
            row.disable_energy_pct = pct_delta(dis->second.mean_energy(), base.mean_energy());
            row.disable_time_pct = pct_delta(dis->second.mean_time(), base.mean_time());
        }
        outcome.rows.push_back(std::move(row));
    }
    return outcome;
}

} // namespace ffx
