#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "gainbudget/budget.hpp"
#include "gainbudget/scenario.hpp"
#include "gainbudget/switching.hpp"

namespace gainbudget {

struct OfflineConfig {
    int epochs = 300;
    int S = 4;
    double lr = 1e-3;
};

struct BudgetSpec {
    std::string kind = "profile";  // "profile" or "iss"
    double rho = 300.0;
    double tail_ratio = 0.9;
    // iss schedule r^(i) = d_ratio^i D |x0| + g ||w||_inf
    double g = 10.0;
    double d_ratio = 0.5;
    int d_len = 40;
};

struct ExperimentConfig {
    std::string scenario_file;
    Scenario scenario;
    RunMode mode = RunMode::StaticOffline;
    int t_opt = 2;
    double gamma_level = 2.0;
    TrainConfig online;  // per-update solve budget; gain_cap is set per update
    RhoConfig rho;
    OfflineConfig offline;
    double gamma_bar = 4.0;
    int hidden_dim = 16;
    double s_rec = 0.8;  // recurrence cap: the per-step gain at reset is gamma_bar (1 - s_rec)
    PNorm pn = PNorm::l2();
    BudgetSpec budget;
    std::vector<std::uint64_t> seeds;
    std::string out_dir = "out";

    static ExperimentConfig from_json(const nlohmann::json& j, const std::string& base_dir = "");
    static ExperimentConfig load(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw std::invalid_argument("ExperimentConfig: cannot open " + path);
        nlohmann::json j;
        f >> j;
        return from_json(j, std::filesystem::path(path).parent_path().string());
    }
};

struct RunSummary {
    std::uint64_t seed = 0;
    double total_cost = 0.0;
    bool bounds_ok = true;
    bool iss_ok = true;
    double acceptance_rate = 1.0;
    double wall_time_s = 0.0;
    std::vector<ObstacleTrack> tracks;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["seed"] = seed;
        j["total_cost"] = total_cost;
        j["bounds_ok"] = bounds_ok;
        j["iss_ok"] = iss_ok;
        j["acceptance_rate"] = acceptance_rate;
        j["wall_time_s"] = wall_time_s;
        j["obstacle_tracks"] = nlohmann::json::array();
        for (const auto& tr : tracks)
            j["obstacle_tracks"].push_back({{"amplitude", tr.amplitude}, {"psi", tr.psi}, {"eta", tr.eta},
                                            {"phi", tr.phi}, {"y0", tr.y0}, {"x", tr.x}, {"radius", tr.radius}});
        return j;
    }
    static RunSummary from_json(const nlohmann::json& j) {
        RunSummary s;
        s.seed = j.at("seed").get<std::uint64_t>();
        s.total_cost = j.at("total_cost").get<double>();
        s.bounds_ok = j.at("bounds_ok").get<bool>();
        s.iss_ok = j.value("iss_ok", true);
        s.acceptance_rate = j.at("acceptance_rate").get<double>();
        s.wall_time_s = j.at("wall_time_s").get<double>();
        if (j.contains("obstacle_tracks")) {
            for (const auto& tj : j.at("obstacle_tracks")) {
                ObstacleTrack tr;
                tr.amplitude = tj.at("amplitude").get<double>();
                tr.psi = tj.at("psi").get<double>();
                tr.eta = tj.at("eta").get<double>();
                tr.phi = tj.at("phi").get<double>();
                tr.y0 = tj.at("y0").get<double>();
                tr.x = tj.at("x").get<double>();
                tr.radius = tj.at("radius").get<double>();
                s.tracks.push_back(tr);
            }
        }
        return s;
    }
};

struct ExperimentReport {
    std::string scenario_name;
    RunMode mode = RunMode::StaticOffline;
    std::vector<RunSummary> summaries;
    double mean_cost = 0.0, median_cost = 0.0, q1_cost = 0.0, q3_cost = 0.0;
    bool all_bounds_ok = true;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["scenario"] = scenario_name;
        j["mode"] = to_string(mode);
        j["mean_cost"] = mean_cost;
        j["median_cost"] = median_cost;
        j["q1_cost"] = q1_cost;
        j["q3_cost"] = q3_cost;
        j["all_bounds_ok"] = all_bounds_ok;
        j["runs"] = nlohmann::json::array();
        for (const auto& s : summaries) j["runs"].push_back(s.to_json());
        return j;
    }
};

namespace detail {

inline double percentile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * (static_cast<double>(v.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + (v[hi] - v[lo]) * frac;
}

inline int worker_count(std::size_t jobs) {
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GAINBUDGET_WORKERS")) workers = std::max(1, std::atoi(env));
    return std::max(1, std::min<int>(workers, static_cast<int>(jobs)));
}

}  // namespace detail

/// Offline policy for a scenario: trained once on the nominal disturbance
/// distribution (and nominal obstacle tracks), independent of evaluation
/// seeds and of the run mode, so paired comparisons share the same M^(0).
inline GainBoundedPolicy train_offline_policy(const ExperimentConfig& cfg,
                                              const std::shared_ptr<const ErrorDynamics>& dyn,
                                              std::ostream* log = nullptr) {
    const Scenario& sc = cfg.scenario;
    Rng rng = make_rng(hash_tag(sc.name), "offline-train");
    GainBoundedPolicy init = GainBoundedPolicy::random_init(dyn->state_dim(), cfg.hidden_dim,
                                                            dyn->input_dim(), cfg.gamma_bar, rng,
                                                            cfg.s_rec);
    TrainConfig tc;
    tc.H = sc.horizon;
    tc.S = cfg.offline.S;
    tc.epochs = cfg.offline.epochs;
    tc.lr = cfg.offline.lr;
    tc.gain_cap = cfg.gamma_bar;
    const LossSpec nominal_loss = sc.make_loss(sc.obstacle_tracks);
    return solve_update_problem(*dyn, init, tc, sc.initial_error_vec(), nominal_loss, 0, sc.disturbance,
                                rng, log);
}

/// Budget assembly. Profile budgets follow the nominal-rollout design (a
/// static closed-loop under a representative disturbance); ISS budgets use
/// the geometric schedule.
inline UpdateBudget make_budget(const ExperimentConfig& cfg, const PlantModel& plant,
                                const GainBoundedPolicy& M0, double gamma_F_hat) {
    const Scenario& sc = cfg.scenario;
    UpdateBudget b;
    b.pn = cfg.pn;
    b.gamma_F_hat = gamma_F_hat;
    b.gamma_bar = cfg.gamma_bar;
    if (cfg.budget.kind == "profile") {
        b.kind = UpdateBudget::Kind::Profile;
        Rng wrng = make_rng(hash_tag(sc.name), "budget-nominal");
        RunSetup nominal;
        nominal.dyn = plant.dynamics.get();
        nominal.plant = &plant;
        nominal.loss = sc.make_loss(sc.obstacle_tracks);
        nominal.dm = sc.disturbance;
        nominal.w = sample_disturbance(sc.disturbance, sc.horizon, sc.state_dim(), wrng);
        nominal.e0 = sc.initial_error_vec();
        nominal.initial_policy = M0;
        nominal.budget.gamma_F_hat = gamma_F_hat;
        nominal.budget.gamma_bar = cfg.gamma_bar;
        nominal.T = sc.horizon;
        nominal.mode = RunMode::StaticOffline;
        const RunResult res = run_closed_loop(nominal);
        b.profile = design_budget_from_nominal(res.trace.states(), cfg.budget.rho, cfg.budget.tail_ratio,
                                               PNorm(2.0, cfg.pn.vector_norm));
    } else if (cfg.budget.kind == "iss") {
        b.kind = UpdateBudget::Kind::Iss;
        if (sc.disturbance.kind != DisturbanceKind::BoundedPersistent)
            throw std::invalid_argument("iss budget requires a bounded disturbance model");
        b.t_opt = cfg.t_opt;
        b.iss_g = cfg.budget.g;
        b.iss_w_inf = sc.disturbance.amplitude * std::sqrt(static_cast<double>(sc.state_dim()));
        b.iss_x0_norm = cfg.pn.vec(sc.initial_error_vec());
        b.iss_gamma_M0 = M0.certified_gain();
        b.d_schedule.clear();
        double d = 1.0;
        for (int i = 0; i <= cfg.budget.d_len; ++i, d *= cfg.budget.d_ratio) b.d_schedule.push_back(d);
    } else {
        throw std::invalid_argument("ExperimentConfig: unknown budget kind '" + cfg.budget.kind + "'");
    }
    return b;
}

struct SeedRunOutput {
    RunSummary summary;
    RunResult result;
};

/// One seed of the configured experiment. Bound verification runs for every
/// certified mode; the RHO baseline carries no certificate, so only its cost
/// is recorded.
inline SeedRunOutput run_one_seed(const ExperimentConfig& cfg, const PlantModel& plant,
                                  const GainBoundedPolicy& M0, const UpdateBudget& budget,
                                  std::uint64_t seed) {
    const auto t_start = std::chrono::steady_clock::now();
    const Scenario& sc = cfg.scenario;
    RunContext ctx = instantiate_run(sc, seed);

    RunSetup setup;
    setup.dyn = plant.dynamics.get();
    setup.plant = &plant;
    setup.loss = ctx.loss;
    setup.dm = sc.disturbance;
    setup.w = ctx.w;
    setup.e0 = ctx.e0;
    setup.initial_policy = M0;
    setup.budget = budget;
    setup.T = sc.horizon;
    setup.mode = cfg.mode;
    setup.t_opt = cfg.t_opt;
    setup.gamma_level = cfg.gamma_level;
    setup.train = cfg.online;
    setup.rho = cfg.rho;
    setup.train_rng = make_rng(seed, "training");

    SeedRunOutput out;
    out.result = run_closed_loop(setup);
    out.summary.seed = seed;
    out.summary.total_cost = out.result.trace.total_cost();
    out.summary.tracks = ctx.tracks;

    int attempts = 0, accepted = 0;
    for (const auto& r : out.result.log.records) {
        ++attempts;
        if (r.accepted) ++accepted;
    }
    out.summary.acceptance_rate = attempts > 0 ? static_cast<double>(accepted) / attempts : 1.0;

    if (cfg.mode != RunMode::RhoBaseline) {
        const auto report = verify_window_bounds(out.result.trace, out.result.log, budget, cfg.pn);
        out.summary.bounds_ok = report.passed && replay_certificates(out.result.log);
        if (budget.kind == UpdateBudget::Kind::Iss)
            out.summary.iss_ok = iss_envelope_check(out.result.trace, out.result.log, budget).passed;
    }
    out.summary.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

/// Multi-seed driver: runs every seed (in parallel up to GAINBUDGET_WORKERS),
/// writes one directory per seed plus a top-level report, and never lets a
/// bound violation pass silently.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg, bool write_outputs = true) {
    const Scenario& sc = cfg.scenario;
    if (cfg.seeds.empty()) throw std::invalid_argument("run_experiment: seeds must be nonempty");

    auto dyn = sc.make_dynamics();
    PlantModel plant = certify_plant(dyn);
    const double gamma_F = cfg.pn.is_inf() ? sc.supplied_gamma_inf() : plant.gamma_hat();

    // The RHO baseline has no policy; a zero operator stands in wherever a
    // policy-shaped object is needed (budget profile rollout).
    GainBoundedPolicy M0(dyn->state_dim(), 1, dyn->input_dim(), 1.0);
    if (cfg.mode != RunMode::RhoBaseline) M0 = train_offline_policy(cfg, dyn);
    const UpdateBudget budget = make_budget(cfg, plant, M0, gamma_F);

    std::vector<SeedRunOutput> outputs(cfg.seeds.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int workers = detail::worker_count(cfg.seeds.size());
    std::vector<std::string> errors(cfg.seeds.size());
    for (int wkr = 0; wkr < workers; ++wkr) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t k = next.fetch_add(1);
                if (k >= cfg.seeds.size()) return;
                try {
                    outputs[k] = run_one_seed(cfg, plant, M0, budget, cfg.seeds[k]);
                } catch (const std::exception& ex) {
                    errors[k] = ex.what();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (std::size_t k = 0; k < errors.size(); ++k)
        if (!errors[k].empty())
            throw std::runtime_error("seed " + std::to_string(cfg.seeds[k]) + ": " + errors[k]);

    ExperimentReport report;
    report.scenario_name = sc.name;
    report.mode = cfg.mode;
    std::vector<double> costs;
    for (auto& o : outputs) {
        report.summaries.push_back(o.summary);
        costs.push_back(o.summary.total_cost);
        report.all_bounds_ok = report.all_bounds_ok && o.summary.bounds_ok && o.summary.iss_ok;
    }
    report.mean_cost = std::accumulate(costs.begin(), costs.end(), 0.0) / static_cast<double>(costs.size());
    report.median_cost = detail::percentile(costs, 0.5);
    report.q1_cost = detail::percentile(costs, 0.25);
    report.q3_cost = detail::percentile(costs, 0.75);

    if (write_outputs) {
        namespace fs = std::filesystem;
        const fs::path root = fs::path(cfg.out_dir) / (sc.name + "_" + to_string(cfg.mode));
        fs::create_directories(root);
        for (std::size_t k = 0; k < outputs.size(); ++k) {
            const fs::path dir = root / ("seed_" + std::to_string(cfg.seeds[k]));
            fs::create_directories(dir);
            outputs[k].result.trace.save_csv((dir / "trace.csv").string());
            outputs[k].result.log.save_csv((dir / "switchlog.csv").string());
            std::ofstream lj(dir / "switchlog.json");
            lj << outputs[k].result.log.to_json().dump(2) << "\n";
            std::ofstream sj(dir / "summary.json");
            sj << outputs[k].summary.to_json().dump(2) << "\n";
        }
        std::ofstream bj(root / "budget.json");
        bj << budget.to_json().dump(2) << "\n";
        std::ofstream rj(root / "report.json");
        rj << report.to_json().dump(2) << "\n";
    }
    return report;
}

struct ModeComparison {
    double baseline_mean = 0.0, ours_mean = 0.0;
    double baseline_median = 0.0, ours_median = 0.0;
    double mean_diff = 0.0;      // baseline - ours (antisymmetric under swap)
    double pct_reduction = 0.0;  // (baseline - ours) / baseline
    int seeds_won = 0;           // seeds where ours is strictly cheaper
    int n_seeds = 0;

    nlohmann::json to_json() const {
        return {{"baseline_mean", baseline_mean}, {"ours_mean", ours_mean},
                {"baseline_median", baseline_median}, {"ours_median", ours_median},
                {"mean_diff", mean_diff},       {"pct_reduction", pct_reduction},
                {"seeds_won", seeds_won},       {"n_seeds", n_seeds}};
    }
};

/// Paired per-seed comparison of two mode runs over the same seed set.
inline ModeComparison compare_modes(const std::vector<RunSummary>& baseline,
                                    const std::vector<RunSummary>& ours) {
    if (baseline.size() != ours.size())
        throw std::invalid_argument("compare_modes: summaries must cover the same seeds");
    auto sorted = [](std::vector<RunSummary> v) {
        std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.seed < b.seed; });
        return v;
    };
    const auto bs = sorted(baseline);
    const auto os = sorted(ours);
    ModeComparison c;
    c.n_seeds = static_cast<int>(bs.size());
    std::vector<double> bcost, ocost;
    for (int k = 0; k < c.n_seeds; ++k) {
        if (bs[k].seed != os[k].seed) throw std::invalid_argument("compare_modes: seed sets differ");
        bcost.push_back(bs[k].total_cost);
        ocost.push_back(os[k].total_cost);
        if (os[k].total_cost < bs[k].total_cost) ++c.seeds_won;
    }
    c.baseline_mean = std::accumulate(bcost.begin(), bcost.end(), 0.0) / c.n_seeds;
    c.ours_mean = std::accumulate(ocost.begin(), ocost.end(), 0.0) / c.n_seeds;
    c.baseline_median = detail::percentile(bcost, 0.5);
    c.ours_median = detail::percentile(ocost, 0.5);
    c.mean_diff = c.baseline_mean - c.ours_mean;
    c.pct_reduction = c.baseline_mean != 0.0 ? c.mean_diff / c.baseline_mean : 0.0;
    return c;
}

/// Plot-data bundles: executed trajectories, reference path, obstacle
/// positions, and (when a policy checkpoint is supplied) the zero-noise
/// predicted rollout from time tau.
inline void emit_plot_data(const ClosedLoopTrace& trace, const Scenario& sc,
                           const std::vector<ObstacleTrack>& tracks, const std::string& out_dir,
                           const SwitchLog* log = nullptr, int tau = -1, int pred_len = 0) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const int n_agents = sc.kind == ScenarioKind::Mountains ? static_cast<int>(sc.agents.size())
                         : sc.kind == ScenarioKind::DynamicObstacles ? 1
                                                                     : 0;
    {
        std::ofstream f(fs::path(out_dir) / "executed.csv");
        if (n_agents > 0) {
            f << "t,agent,x,y,radius\n";
            LossSpec ls = sc.make_loss(tracks);
            for (int t = 0; t < trace.length(); ++t)
                for (int j = 0; j < n_agents; ++j) {
                    const Eigen::Vector2d p = ls.agent_position(trace[t].x, j, t);
                    f << t << "," << j << "," << format_double(p.x()) << "," << format_double(p.y())
                      << "," << format_double(ls.agent_radius) << "\n";
                }
        } else {
            f << "t,x_0\n";
            for (int t = 0; t < trace.length(); ++t)
                f << t << "," << format_double(trace[t].x(0)) << "\n";
        }
    }
    if (sc.kind == ScenarioKind::DynamicObstacles) {
        std::ofstream f(fs::path(out_dir) / "reference.csv");
        f << "t,x,y\n";
        CircularReference ref = sc.reference;
        ref.pm = sc.pm;
        for (int t = 0; t < trace.length(); ++t) {
            const Eigen::Vector2d p = ref.position(t);
            f << t << "," << format_double(p.x()) << "," << format_double(p.y()) << "\n";
        }
    }
    if (!tracks.empty()) {
        std::ofstream f(fs::path(out_dir) / "obstacles.csv");
        f << "t,obstacle,x,y,radius\n";
        for (int t = 0; t < trace.length(); ++t)
            for (std::size_t j = 0; j < tracks.size(); ++j) {
                const Eigen::Vector2d p = tracks[j].position(t);
                f << t << "," << j << "," << format_double(p.x()) << "," << format_double(p.y()) << ","
                  << format_double(tracks[j].radius) << "\n";
            }
    } else if (!sc.static_obstacles.empty()) {
        std::ofstream f(fs::path(out_dir) / "obstacles.csv");
        f << "obstacle,x,y,radius\n";
        for (std::size_t j = 0; j < sc.static_obstacles.size(); ++j)
            f << j << "," << format_double(sc.static_obstacles[j].center.x()) << ","
              << format_double(sc.static_obstacles[j].center.y()) << ","
              << format_double(sc.static_obstacles[j].radius) << "\n";
    }
    if (log && tau >= 0 && tau < trace.length() && pred_len > 0) {
        // latest deployed policy at or before tau, replayed zero-noise
        const PolicyCheckpoint* best = nullptr;
        for (const auto& c : log->checkpoints)
            if (c.t <= tau && (!best || c.t > best->t)) best = &c;
        if (best) {
            GainBoundedPolicy pol = GainBoundedPolicy::from_json(best->policy);
            pol.reset();
            auto dyn = sc.make_dynamics();
            Eigen::VectorXd e = trace[tau].x;
            std::ofstream f(fs::path(out_dir) / ("predicted_t" + std::to_string(tau) + ".csv"));
            f << "t";
            for (int j = 0; j < dyn->state_dim(); ++j) f << ",x_" << j;
            f << "\n";
            for (int k = 0; k <= pred_len; ++k) {
                f << tau + k;
                for (int j = 0; j < dyn->state_dim(); ++j) f << "," << format_double(e(j));
                f << "\n";
                const Eigen::VectorXd z = (k == 0) ? e : Eigen::VectorXd::Zero(dyn->state_dim());
                e = dyn->step(tau + k, e, pol.step(z));
            }
        }
    }
}

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j, const std::string& base_dir) {
    require_keys(j, {"schema_version", "scenario_file", "mode", "t_opt", "gamma_level", "online", "rho",
                     "offline", "gamma_bar", "hidden_dim", "s_rec", "p", "budget", "seeds", "out_dir"},
                 "ExperimentConfig");
    if (j.at("schema_version").get<int>() != 1)
        throw std::invalid_argument("ExperimentConfig: unsupported schema_version");
    ExperimentConfig cfg;
    cfg.scenario_file = j.at("scenario_file").get<std::string>();
    std::filesystem::path sp(cfg.scenario_file);
    if (sp.is_relative() && !base_dir.empty() && !std::filesystem::exists(sp))
        sp = std::filesystem::path(base_dir) / sp;
    cfg.scenario = Scenario::load(sp.string());
    cfg.mode = run_mode_from_string(j.at("mode").get<std::string>());
    cfg.t_opt = j.value("t_opt", 2);
    cfg.gamma_level = j.value("gamma_level", 2.0);
    if (j.contains("online")) {
        const auto& oj = j.at("online");
        require_keys(oj, {"H", "S", "epochs", "lr"}, "ExperimentConfig.online");
        cfg.online.H = oj.at("H").get<int>();
        cfg.online.S = oj.at("S").get<int>();
        cfg.online.epochs = oj.at("epochs").get<int>();
        cfg.online.lr = oj.value("lr", 5e-3);
    }
    if (j.contains("rho")) {
        const auto& rj = j.at("rho");
        require_keys(rj, {"H", "S", "epochs", "lr"}, "ExperimentConfig.rho");
        cfg.rho.H = rj.at("H").get<int>();
        cfg.rho.S = rj.at("S").get<int>();
        cfg.rho.epochs = rj.at("epochs").get<int>();
        cfg.rho.lr = rj.value("lr", 0.05);
    }
    if (j.contains("offline")) {
        const auto& fj = j.at("offline");
        require_keys(fj, {"epochs", "S", "lr"}, "ExperimentConfig.offline");
        cfg.offline.epochs = fj.at("epochs").get<int>();
        cfg.offline.S = fj.at("S").get<int>();
        cfg.offline.lr = fj.value("lr", 1e-3);
    }
    cfg.gamma_bar = j.value("gamma_bar", 4.0);
    cfg.hidden_dim = j.value("hidden_dim", 16);
    cfg.s_rec = j.value("s_rec", 0.8);
    if (j.contains("p")) {
        const auto& pj = j.at("p");
        cfg.pn = pj.is_string() ? PNorm::linf() : PNorm(pj.get<double>());
    }
    if (j.contains("budget")) {
        const auto& bj = j.at("budget");
        require_keys(bj, {"kind", "rho", "tail_ratio", "g", "d_ratio", "d_len"}, "ExperimentConfig.budget");
        cfg.budget.kind = bj.value("kind", "profile");
        cfg.budget.rho = bj.value("rho", 300.0);
        cfg.budget.tail_ratio = bj.value("tail_ratio", 0.9);
        cfg.budget.g = bj.value("g", 10.0);
        cfg.budget.d_ratio = bj.value("d_ratio", 0.5);
        cfg.budget.d_len = bj.value("d_len", 40);
    }
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.out_dir = j.value("out_dir", "out");
    return cfg;
}

}  // namespace gainbudget
