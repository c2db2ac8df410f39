// Command-line driver: gain certification, offline training, benchmark
// runs, trace verification, mode comparison, and plot-data export.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "gainbudget/experiment.hpp"

namespace fs = std::filesystem;
using namespace gainbudget;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBoundViolation = 2;
constexpr int kExitConfigError = 3;

int cmd_gain_bound(const std::string& scenario_path) {
    const Scenario sc = Scenario::load(scenario_path);
    auto dyn = sc.make_dynamics();
    const PlantModel plant = certify_plant(dyn);
    const auto& c = plant.certificate;
    nlohmann::json j;
    j["gamma_hat"] = c.gamma_hat;
    j["eta"] = c.eta;
    j["rho"] = c.rho;
    j["lambda_max_P"] = max_eigenvalue_sym(c.P);
    j["block_residual"] = c.block_residual;
    j["channels"] = nlohmann::json::array();
    for (const auto& ch : c.channels)
        j["channels"].push_back({{"name", ch.name}, {"gamma", ch.gamma}, {"rho", ch.rho},
                                 {"block_residual", ch.block_residual}});
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_train_offline(const std::string& cfg_path) {
    const ExperimentConfig cfg = ExperimentConfig::load(cfg_path);
    auto dyn = cfg.scenario.make_dynamics();
    fs::create_directories(cfg.out_dir);
    std::ofstream log(fs::path(cfg.out_dir) / "offline_train_log.csv");
    log << "epoch,batch_loss,certified_gain,grad_norm,wall_time_s\n";
    const GainBoundedPolicy pol = train_offline_policy(cfg, dyn, &log);
    const fs::path out = fs::path(cfg.out_dir) / "offline_policy.json";
    std::ofstream f(out);
    f << pol.to_json().dump(2) << "\n";
    std::cout << "wrote " << out.string() << " (certified gain " << format_double(pol.certified_gain())
              << ")\n";
    return kExitOk;
}

int cmd_run(const std::string& cfg_path) {
    const ExperimentConfig cfg = ExperimentConfig::load(cfg_path);
    const ExperimentReport report = run_experiment(cfg);
    std::cout << report.to_json().dump(2) << "\n";
    if (!report.all_bounds_ok) {
        std::cerr << "FAILED: window-bound verification failed on at least one seed\n";
        return kExitBoundViolation;
    }
    return kExitOk;
}

int cmd_verify(const std::string& trace_path, const std::string& log_path, const std::string& budget_path) {
    const ClosedLoopTrace trace = ClosedLoopTrace::load_csv(trace_path);
    nlohmann::json lj, bj;
    {
        std::ifstream f(log_path);
        if (!f) throw std::invalid_argument("cannot open " + log_path);
        f >> lj;
    }
    {
        std::ifstream f(budget_path);
        if (!f) throw std::invalid_argument("cannot open " + budget_path);
        f >> bj;
    }
    const SwitchLog log = SwitchLog::from_json(lj);
    const UpdateBudget budget = UpdateBudget::from_json(bj);
    const auto report = verify_window_bounds(trace, log, budget, budget.pn);
    const bool replay_ok = replay_certificates(log);
    std::cout << report.summary();
    std::cout << "certificate replay: " << (replay_ok ? "ok" : "VIOLATED") << "\n";
    bool iss_ok = true;
    if (budget.kind == UpdateBudget::Kind::Iss) {
        const auto iss = iss_envelope_check(trace, log, budget);
        iss_ok = iss.passed;
        std::cout << "iss envelope: worst ratio " << format_double(iss.worst_ratio) << " at t="
                  << iss.worst_t << (iss.passed ? " ok" : " VIOLATED") << "\n";
    }
    return (report.passed && replay_ok && iss_ok) ? kExitOk : kExitBoundViolation;
}

int cmd_compare(const std::vector<std::string>& report_paths) {
    if (report_paths.size() < 2) throw std::invalid_argument("compare: need a baseline and at least one report");
    auto load_runs = [](const std::string& path) {
        std::ifstream f(path);
        if (!f) throw std::invalid_argument("cannot open " + path);
        nlohmann::json j;
        f >> j;
        std::vector<RunSummary> runs;
        for (const auto& rj : j.at("runs")) runs.push_back(RunSummary::from_json(rj));
        return std::pair<std::string, std::vector<RunSummary>>(
            j.value("scenario", "?") + "/" + j.value("mode", "?"), runs);
    };
    const auto baseline = load_runs(report_paths.front());
    nlohmann::json out;
    out["baseline"] = baseline.first;
    out["comparisons"] = nlohmann::json::array();
    for (std::size_t k = 1; k < report_paths.size(); ++k) {
        const auto ours = load_runs(report_paths[k]);
        ModeComparison c = compare_modes(baseline.second, ours.second);
        nlohmann::json cj = c.to_json();
        cj["ours"] = ours.first;
        out["comparisons"].push_back(cj);
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_emit_plots(const std::string& trace_path, const std::string& scenario_path,
                   const std::string& summary_path, const std::string& switchlog_path,
                   const std::string& out_dir, int tau, int pred_len) {
    const ClosedLoopTrace trace = ClosedLoopTrace::load_csv(trace_path);
    const Scenario sc = Scenario::load(scenario_path);
    std::vector<ObstacleTrack> tracks = sc.obstacle_tracks;
    if (!summary_path.empty()) {
        std::ifstream f(summary_path);
        if (!f) throw std::invalid_argument("cannot open " + summary_path);
        nlohmann::json j;
        f >> j;
        tracks = RunSummary::from_json(j).tracks;
    }
    SwitchLog log;
    bool have_log = false;
    if (!switchlog_path.empty()) {
        std::ifstream f(switchlog_path);
        if (!f) throw std::invalid_argument("cannot open " + switchlog_path);
        nlohmann::json j;
        f >> j;
        log = SwitchLog::from_json(j);
        have_log = true;
    }
    emit_plot_data(trace, sc, tracks, out_dir, have_log ? &log : nullptr, tau, pred_len);
    std::cout << "wrote plot data to " << out_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gain-budgeted online controller updates: certification, benchmarks, verification"};
    app.require_subcommand(1);

    std::string scenario_path, cfg_path, trace_path, log_path, budget_path;
    std::vector<std::string> report_paths;
    std::string plots_scenario, plots_summary, plots_switchlog, plots_out = "plots";
    int tau = -1, pred_len = 0;

    auto* gain = app.add_subcommand("gain-bound", "certify the plant gain for a scenario");
    gain->add_option("scenario", scenario_path, "scenario json")->required();

    auto* offline = app.add_subcommand("train-offline", "train the offline policy for a config");
    offline->add_option("config", cfg_path, "experiment config json")->required();

    auto* run = app.add_subcommand("run", "run a benchmark experiment over its seed list");
    run->add_option("config", cfg_path, "experiment config json")->required();

    auto* verify = app.add_subcommand("verify", "replay a trace against its switch log and budget");
    verify->add_option("trace", trace_path, "trace.csv")->required();
    verify->add_option("switchlog", log_path, "switchlog.json")->required();
    verify->add_option("budget", budget_path, "budget.json")->required();

    auto* compare = app.add_subcommand("compare", "paired comparison of run reports (first = baseline)");
    compare->add_option("reports", report_paths, "report.json files")->required()->expected(-2);

    auto* plots = app.add_subcommand("emit-plots", "export plot-ready csv bundles from a trace");
    plots->add_option("trace", trace_path, "trace.csv")->required();
    plots->add_option("--scenario", plots_scenario, "scenario json")->required();
    plots->add_option("--summary", plots_summary, "summary.json (sampled obstacle tracks)");
    plots->add_option("--switchlog", plots_switchlog, "switchlog.json (policy checkpoints)");
    plots->add_option("--out", plots_out, "output directory");
    plots->add_option("--tau", tau, "prediction start step");
    plots->add_option("--pred-len", pred_len, "prediction length");

    try {
        app.parse(argc, argv);
        if (gain->parsed()) return cmd_gain_bound(scenario_path);
        if (offline->parsed()) return cmd_train_offline(cfg_path);
        if (run->parsed()) return cmd_run(cfg_path);
        if (verify->parsed()) return cmd_verify(trace_path, log_path, budget_path);
        if (compare->parsed()) return cmd_compare(report_paths);
        if (plots->parsed())
            return cmd_emit_plots(trace_path, plots_scenario, plots_summary, plots_switchlog, plots_out,
                                  tau, pred_len);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
