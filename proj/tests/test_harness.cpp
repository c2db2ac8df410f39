#include <catch2/catch_amalgamated.hpp>

#include "gainbudget/experiment.hpp"

#include <filesystem>
#include <fstream>

using namespace gainbudget;
namespace fs = std::filesystem;

namespace {

ExperimentConfig scalar_config(RunMode mode, const std::string& out_dir) {
    ExperimentConfig cfg;
    cfg.scenario = Scenario::load(std::string(GB_SOURCE_DIR) + "/scenarios/scalar_sanity.json");
    cfg.mode = mode;
    cfg.t_opt = 5;
    cfg.online.H = 10;
    cfg.online.S = 2;
    cfg.online.epochs = 10;
    cfg.online.lr = 5e-3;
    cfg.offline.epochs = 40;
    cfg.offline.S = 2;
    cfg.gamma_bar = 1.5;
    cfg.hidden_dim = 6;
    cfg.budget.rho = 8.0;
    cfg.seeds = {1, 2, 3};
    cfg.out_dir = out_dir;
    return cfg;
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("scalar experiment end to end") {
    const fs::path out = fs::temp_directory_path() / "gb_harness_test";
    fs::remove_all(out);
    ExperimentConfig cfg = scalar_config(RunMode::OnlineAlg1, (out / "a").string());
    const ExperimentReport report = run_experiment(cfg);

    CHECK(report.summaries.size() == 3);
    CHECK(report.all_bounds_ok);
    for (const auto& s : report.summaries) {
        CHECK(s.bounds_ok);
        CHECK(std::isfinite(s.total_cost));
    }
    // quartiles are ordered
    CHECK(report.q1_cost <= report.median_cost);
    CHECK(report.median_cost <= report.q3_cost);

    SECTION("outputs land in one directory per seed") {
        const fs::path root = fs::path(cfg.out_dir) / "scalar_sanity_online_alg1";
        for (auto seed : cfg.seeds) {
            const fs::path dir = root / ("seed_" + std::to_string(seed));
            CHECK(fs::exists(dir / "trace.csv"));
            CHECK(fs::exists(dir / "switchlog.csv"));
            CHECK(fs::exists(dir / "switchlog.json"));
            CHECK(fs::exists(dir / "summary.json"));
        }
        CHECK(fs::exists(root / "report.json"));
        CHECK(fs::exists(root / "budget.json"));
    }

    SECTION("summary total cost is recomputable from the stored trace") {
        const fs::path dir = fs::path(cfg.out_dir) / "scalar_sanity_online_alg1" / "seed_1";
        const ClosedLoopTrace tr = ClosedLoopTrace::load_csv((dir / "trace.csv").string());
        nlohmann::json sj;
        std::ifstream f(dir / "summary.json");
        f >> sj;
        CHECK(tr.total_cost() == sj.at("total_cost").get<double>());
    }
}

TEST_CASE("determinism: identical config and seed give byte-identical files") {
    const fs::path out = fs::temp_directory_path() / "gb_determinism_test";
    fs::remove_all(out);
    ExperimentConfig a = scalar_config(RunMode::OnlineAlg1, (out / "r1").string());
    ExperimentConfig b = scalar_config(RunMode::OnlineAlg1, (out / "r2").string());
    a.seeds = {5};
    b.seeds = {5};
    run_experiment(a);
    run_experiment(b);
    const fs::path d1 = fs::path(a.out_dir) / "scalar_sanity_online_alg1" / "seed_5";
    const fs::path d2 = fs::path(b.out_dir) / "scalar_sanity_online_alg1" / "seed_5";
    CHECK(read_file(d1 / "trace.csv") == read_file(d2 / "trace.csv"));
    CHECK(read_file(d1 / "switchlog.csv") == read_file(d2 / "switchlog.csv"));
}

TEST_CASE("zero-noise static scalar run has zero cost") {
    ExperimentConfig cfg = scalar_config(RunMode::StaticOffline, "");
    cfg.scenario.disturbance.sigma0 = 0.0;
    cfg.scenario.initial_error = Eigen::VectorXd::Zero(1);
    cfg.seeds = {1};
    const ExperimentReport report = run_experiment(cfg, /*write_outputs=*/false);
    CHECK(report.summaries[0].total_cost <= 1e-12);
    CHECK(report.all_bounds_ok);
}

TEST_CASE("mode comparison") {
    auto runs = [](std::initializer_list<double> costs, std::uint64_t seed0 = 1) {
        std::vector<RunSummary> v;
        std::uint64_t s = seed0;
        for (double c : costs) {
            RunSummary r;
            r.seed = s++;
            r.total_cost = c;
            v.push_back(r);
        }
        return v;
    };

    SECTION("identical summaries compare to zero reduction") {
        const auto a = runs({2.0, 3.0, 4.0});
        const ModeComparison c = compare_modes(a, a);
        CHECK(c.pct_reduction == 0.0);
        CHECK(c.mean_diff == 0.0);
        CHECK(c.seeds_won == 0);
    }
    SECTION("35 percent reduction example") {
        const ModeComparison c = compare_modes(runs({2.0, 2.0}), runs({1.3, 1.3}));
        CHECK(c.pct_reduction == Catch::Approx(0.35).epsilon(1e-12));
        CHECK(c.seeds_won == 2);
    }
    SECTION("antisymmetry under swapping baseline and ours") {
        const auto a = runs({2.0, 5.0, 1.0});
        const auto b = runs({1.5, 6.0, 0.5});
        const ModeComparison ab = compare_modes(a, b);
        const ModeComparison ba = compare_modes(b, a);
        CHECK(ab.mean_diff == Catch::Approx(-ba.mean_diff).margin(1e-15));
        CHECK(ab.seeds_won + ba.seeds_won == 3);  // no ties in this data
    }
    SECTION("mismatched seed sets are rejected") {
        CHECK_THROWS_AS(compare_modes(runs({1.0, 2.0}), runs({1.0, 2.0}, /*seed0=*/7)),
                        std::invalid_argument);
        CHECK_THROWS_AS(compare_modes(runs({1.0}), runs({1.0, 2.0})), std::invalid_argument);
    }
}

TEST_CASE("experiment config json parsing is strict") {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["scenario_file"] = std::string(GB_SOURCE_DIR) + "/scenarios/scalar_sanity.json";
    j["mode"] = "static_offline";
    j["seeds"] = {1, 2};
    CHECK_NOTHROW(ExperimentConfig::from_json(j));

    nlohmann::json bad = j;
    bad["unknown_knob"] = 1;
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad), std::invalid_argument);

    nlohmann::json bad2 = j;
    bad2["schema_version"] = 2;
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad2), std::invalid_argument);
}

TEST_CASE("plot data bundles") {
    const fs::path out = fs::temp_directory_path() / "gb_plots_test";
    fs::remove_all(out);

    Scenario sc = Scenario::load(std::string(GB_SOURCE_DIR) + "/scenarios/dynamic_obstacles.json");
    sc.horizon = 30;
    auto dyn = sc.make_dynamics();
    PlantModel plant = certify_plant(dyn);

    RunContext ctx = instantiate_run(sc, 3);
    RunSetup s;
    s.dyn = dyn.get();
    s.plant = &plant;
    s.loss = ctx.loss;
    s.dm = sc.disturbance;
    s.w = ctx.w;
    s.e0 = ctx.e0;
    Rng rng = make_rng(71, "harness");
    s.initial_policy = GainBoundedPolicy::random_init(4, 6, 2, 1.5, rng);
    s.budget.gamma_F_hat = plant.gamma_hat();
    s.budget.gamma_bar = 1.5;
    s.T = sc.horizon;
    s.mode = RunMode::StaticOffline;
    const RunResult res = run_closed_loop(s);

    emit_plot_data(res.trace, sc, ctx.tracks, out.string(), &res.log, /*tau=*/10, /*pred_len=*/5);
    CHECK(fs::exists(out / "executed.csv"));
    CHECK(fs::exists(out / "reference.csv"));
    CHECK(fs::exists(out / "obstacles.csv"));
    CHECK(fs::exists(out / "predicted_t10.csv"));

    SECTION("obstacle rows re-evaluate the sinusoid track") {
        std::ifstream f(out / "obstacles.csv");
        std::string line;
        std::getline(f, line);  // header
        REQUIRE(std::getline(f, line));
        // first row is t=0, obstacle 0
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 5);
        CHECK(parse_double(cells[3]) == Catch::Approx(ctx.tracks[0].y_at(0)).epsilon(1e-15));
    }
}
