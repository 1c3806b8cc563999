#include "flageffect/design.hpp"
#include "flageffect/stats.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>
#include <sys/wait.h>

#include <doctest.h>

namespace fs = std::filesystem;
using namespace ffx;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("ffx-cli-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static inline int counter = 0;
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(FLAGEFFECT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_config(const fs::path& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

} // namespace

TEST_CASE("design subcommand emits the half-fraction CSV") {
    TempDir dir;
    const fs::path cfg = dir.path / "exp.ini";
    write_config(cfg, "[campaign]\nn_factors = 3\nresolution = III\nmax_runs = 4\n");

    const int code = run_cli("--config " + cfg.string() + " --out " +
                             (dir.path / "out").string() + " design");
    CHECK(code == 0);

    std::ifstream csv(dir.path / "out" / "design.csv");
    REQUIRE(csv.good());
    NamedDesign named = read_design_csv(csv);
    CHECK(named.design.n_runs == 4);
    CHECK(named.names == std::vector<std::string>{"A", "B", "C"});
    CHECK(signs_for_run(named.design, 0) == std::vector<std::int8_t>{-1, -1, +1});

    const std::string alias = slurp(dir.path / "out" / "alias.txt");
    CHECK(alias.find("A: B*C") != std::string::npos);

    CHECK(fs::exists(dir.path / "out" / "manifest-design.json"));
}

TEST_CASE("malformed configs exit 1 naming the offender") {
    TempDir dir;
    const fs::path cfg = dir.path / "exp.ini";
    write_config(cfg, "[campaign]\nwibble = 3\n");
    CHECK(run_cli("--config " + cfg.string() + " design") == 1);
    CHECK(run_cli("--config " + (dir.path / "nope.ini").string() + " design") == 1);
}

TEST_CASE("simulate then analyze recovers planted factors end to end") {
    TempDir dir;
    const fs::path cfg = dir.path / "exp.ini";
    write_config(cfg, R"([factors]
alpha =
beta =
gamma =
delta =

[backend]
type = simulated
base_power = 1.0
base_time = 0.02
noise = 0.002
seed = 21
effect.beta = 0.03

[campaign]
replicates = 4
seed = 9
resolution = IV
max_runs = 16
metric = energy
)");
    const std::string out = (dir.path / "out").string();

    CHECK(run_cli("--config " + cfg.string() + " --out " + out + " simulate") == 0);
    CHECK(fs::exists(dir.path / "out" / "store.jsonl"));

    // Re-running a completed campaign performs zero new executions.
    const std::string store_before = slurp(dir.path / "out" / "store.jsonl");
    CHECK(run_cli("--config " + cfg.string() + " --out " + out + " simulate") == 0);
    CHECK(slurp(dir.path / "out" / "store.jsonl") == store_before);

    CHECK(run_cli("--config " + cfg.string() + " --out " + out + " analyze") == 0);
    const std::string significant = slurp(dir.path / "out" / "significant_energy.txt");
    CHECK(significant.find("beta") != std::string::npos);
    CHECK(significant.find("alpha") == std::string::npos);
    CHECK(significant.find("gamma") == std::string::npos);

    CHECK(run_cli("--config " + cfg.string() + " --out " + out + " report") == 0);
    CHECK(fs::exists(dir.path / "out" / "main_effects.txt"));
    CHECK(fs::exists(dir.path / "out" / "main_effects.csv"));
}

TEST_CASE("the simulate subcommand refuses non-simulated backends") {
    TempDir dir;
    const fs::path cfg = dir.path / "exp.ini";
    write_config(cfg, "[factors]\na =\n[backend]\ntype = wall-clock\n"
                      "[campaign]\nmax_runs = 4\nresolution = III\n");
    CHECK(run_cli("--config " + cfg.string() + " simulate") == 1);
}

TEST_CASE("set overrides reach the experiment") {
    TempDir dir;
    const fs::path cfg = dir.path / "exp.ini";
    write_config(cfg, "[campaign]\nn_factors = 3\nresolution = III\nmax_runs = 4\n");
    const std::string out = (dir.path / "out").string();
    const int code = run_cli("--config " + cfg.string() + " --out " + out +
                             " --set campaign.max_runs=8 --set campaign.resolution=FULL design");
    CHECK(code == 0);
    std::ifstream csv(dir.path / "out" / "design.csv");
    NamedDesign named = read_design_csv(csv);
    CHECK(named.design.n_runs == 8);
}

TEST_CASE("report assembles the top-flags grid from effects files") {
    TempDir dir;
    const fs::path cfg = dir.path / "exp.ini";
    write_config(cfg, "[campaign]\nn_factors = 1\n");

    auto write_effects = [&](const fs::path& path,
                             const std::vector<std::tuple<std::string, double, bool>>& rows) {
        std::vector<EffectEstimate> estimates;
        for (const auto& [label, pct, sig] : rows) {
            EffectEstimate est;
            est.term_label = label;
            est.percent_effect = pct;
            est.p_value = sig ? 0.01 : 0.5;
            est.significant = sig;
            estimates.push_back(est);
        }
        std::ofstream out(path);
        write_effects_csv(out, estimates, {}, Metric::energy);
    };
    write_effects(dir.path / "blowfish@m0.csv",
                  {{"omit-frame-pointer", -3.0, true}, {"tree-forwprop", 2.0, true}});
    write_effects(dir.path / "crc32@m0.csv", {{"move-loop-invariants", -1.5, true},
                                              {"dce", 0.2, false}});

    const std::string out = (dir.path / "out").string();
    const int code = run_cli("--config " + cfg.string() + " --out " + out +
                             " report --top-flags " + (dir.path / "blowfish@m0.csv").string() +
                             " " + (dir.path / "crc32@m0.csv").string());
    CHECK(code == 0);
    const std::string table = slurp(dir.path / "out" / "top_flags.txt");
    CHECK(table.find("blowfish") != std::string::npos);
    CHECK(table.find("crc32") != std::string::npos);
    CHECK(table.find("move-loop-invariants") != std::string::npos);
    CHECK(table.find("dce") == std::string::npos); // not significant
}

TEST_CASE("exhaustive subcommand renders the combination table") {
    TempDir dir;
    const fs::path cfg = dir.path / "exp.ini";
    write_config(cfg, R"([factors]
a =
b =

[backend]
type = simulated
base_time = 0.02
effect.a = 0.02

[campaign]
replicates = 2
)");
    const std::string out = (dir.path / "out").string();
    CHECK(run_cli("--config " + cfg.string() + " --out " + out + " exhaustive") == 0);
    const std::string table = slurp(dir.path / "out" / "exhaustive.txt");
    CHECK(table.find("(mJ)") != std::string::npos);
    CHECK(table.find("0.00") != std::string::npos);
}
