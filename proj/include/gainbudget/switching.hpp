#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gainbudget/budget.hpp"
#include "gainbudget/disturbance.hpp"
#include "gainbudget/dynamics.hpp"
#include "gainbudget/loss.hpp"
#include "gainbudget/policy.hpp"
#include "gainbudget/rho.hpp"
#include "gainbudget/trace.hpp"
#include "gainbudget/training.hpp"

namespace gainbudget {

/// One update attempt, logged with the exact values the decision used so the
/// certificate can be replayed bit by bit.
struct SwitchRecord {
    int attempt = 0;       // running attempt counter, 1-based
    int t = 0;             // attempt time
    int update_index = 0;  // budget index the attempt would consume (consumed only if accepted)
    double state_norm = 0.0;
    double eps = 0.0;
    double r = 0.0;
    double gamma_cap = 0.0;       // gain allowance granted to the solver
    double gamma_deployed = 0.0;  // certified gain of the deployed policy (0 if rejected)
    bool accepted = false;
    std::string reason;
};

struct PolicyCheckpoint {
    int t = 0;
    int segment = 0;
    nlohmann::json policy;
};

struct SwitchLog {
    double gamma_M0 = 0.0;     // certified gain of the initial policy
    double gamma_F_hat = 0.0;
    double gamma_bar = 0.0;
    std::vector<SwitchRecord> records;
    std::vector<PolicyCheckpoint> checkpoints;  // deployed policies, including the initial one

    std::vector<int> accepted_times() const {
        std::vector<int> ts;
        for (const auto& r : records)
            if (r.accepted) ts.push_back(r.t);
        return ts;
    }
    std::vector<const SwitchRecord*> accepted_records() const {
        std::vector<const SwitchRecord*> rs;
        for (const auto& r : records)
            if (r.accepted) rs.push_back(&r);
        return rs;
    }

    void write_csv(std::ostream& os) const {
        os << "attempt,t,update_index,state_norm,eps,r,gamma_cap,gamma_deployed,accepted,reason\n";
        for (const auto& r : records) {
            os << r.attempt << "," << r.t << "," << r.update_index << "," << format_double(r.state_norm)
               << "," << format_double(r.eps) << "," << format_double(r.r) << ","
               << format_double(r.gamma_cap) << "," << format_double(r.gamma_deployed) << ","
               << (r.accepted ? 1 : 0) << "," << r.reason << "\n";
        }
    }
    void save_csv(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw std::runtime_error("SwitchLog: cannot open " + path);
        write_csv(f);
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["schema_version"] = 1;
        j["gamma_M0"] = gamma_M0;
        j["gamma_F_hat"] = gamma_F_hat;
        j["gamma_bar"] = gamma_bar;
        j["records"] = nlohmann::json::array();
        for (const auto& r : records) {
            j["records"].push_back({{"attempt", r.attempt},
                                    {"t", r.t},
                                    {"update_index", r.update_index},
                                    {"state_norm", r.state_norm},
                                    {"eps", r.eps},
                                    {"r", r.r},
                                    {"gamma_cap", r.gamma_cap},
                                    {"gamma_deployed", r.gamma_deployed},
                                    {"accepted", r.accepted},
                                    {"reason", r.reason}});
        }
        j["checkpoints"] = nlohmann::json::array();
        for (const auto& c : checkpoints)
            j["checkpoints"].push_back({{"t", c.t}, {"segment", c.segment}, {"policy", c.policy}});
        return j;
    }

    static SwitchLog from_json(const nlohmann::json& j) {
        SwitchLog log;
        log.gamma_M0 = j.at("gamma_M0").get<double>();
        log.gamma_F_hat = j.at("gamma_F_hat").get<double>();
        log.gamma_bar = j.at("gamma_bar").get<double>();
        for (const auto& rj : j.at("records")) {
            SwitchRecord r;
            r.attempt = rj.at("attempt").get<int>();
            r.t = rj.at("t").get<int>();
            r.update_index = rj.at("update_index").get<int>();
            r.state_norm = rj.at("state_norm").get<double>();
            r.eps = rj.at("eps").get<double>();
            r.r = rj.at("r").get<double>();
            r.gamma_cap = rj.at("gamma_cap").get<double>();
            r.gamma_deployed = rj.at("gamma_deployed").get<double>();
            r.accepted = rj.at("accepted").get<bool>();
            r.reason = rj.at("reason").get<std::string>();
            log.records.push_back(std::move(r));
        }
        if (j.contains("checkpoints")) {
            for (const auto& cj : j.at("checkpoints")) {
                PolicyCheckpoint c;
                c.t = cj.at("t").get<int>();
                c.segment = cj.at("segment").get<int>();
                c.policy = cj.at("policy");
                log.checkpoints.push_back(std::move(c));
            }
        }
        return log;
    }
};

struct AdmissibilityResult {
    bool admissible = false;
    std::string reason;  // "ok", "trigger", "budget", or "gain-cap"
};

/// Core admissibility predicate of the update theorem:
///   |x_{t_i}| <= eps,  gamma_F (gamma_new + 1) eps <= r,  gamma_new <= gamma_bar.
inline AdmissibilityResult check_update_admissible(double gamma_F_hat, double gamma_bar, double eps,
                                                   double r, double state_norm, double gamma_new) {
    if (!(state_norm <= eps)) return {false, "trigger"};
    if (!(gamma_F_hat * (gamma_new + 1.0) * eps <= r)) return {false, "budget"};
    if (!(gamma_new <= gamma_bar)) return {false, "gain-cap"};
    return {true, "ok"};
}

/// Index-budget overload (profile budgets are time-indexed and are checked
/// at the attempt time by the runner instead).
inline AdmissibilityResult check_update_admissible(const UpdateBudget& b, int i,
                                                   const Eigen::VectorXd& x_ti, double gamma_new) {
    if (b.kind != UpdateBudget::Kind::Index)
        throw std::invalid_argument("check_update_admissible: index-budget overload requires Kind::Index");
    return check_update_admissible(b.gamma_F_hat, b.gamma_bar, b.eps_for_index(i),
                                   b.r_for_attempt(/*t=*/0, i), b.pn.vec(x_ti), gamma_new);
}

/// Algorithm-1 gain allowance: with eps := |x_{t_i}|, the largest admissible
/// new gain is r / (gamma_F eps) - 1, capped by gamma_bar. A numerically
/// zero state admits any gain up to gamma_bar (division guard).
inline double algorithm1_gain_cap(double gamma_F_hat, double gamma_bar, double r, double state_norm) {
    if (state_norm < 1e-12) return gamma_bar;
    double cap = std::min(gamma_bar, r / (gamma_F_hat * state_norm) - 1.0);
    // keep the certified product under r in floating point as well
    while (cap > 0.0 && gamma_F_hat * (cap + 1.0) * state_norm > r) cap *= 1.0 - 1e-12;
    return cap;
}

struct Algorithm1Decision {
    double eps = 0.0;        // threshold, set to the measured state norm
    double gamma_cap = 0.0;  // allowance granted to the solver
    std::optional<GainBoundedPolicy> deployed;  // empty when the incumbent is kept
};

/// One scheduled Algorithm-1 attempt: measure the state, derive the gain
/// allowance, and hand the solver the cap when one exists. Infeasibility is
/// a normal outcome; the caller keeps the previous controller.
inline Algorithm1Decision algorithm1_step(const UpdateBudget& b, double r_i, const Eigen::VectorXd& x_ti,
                                          const std::function<GainBoundedPolicy(double)>& trainer) {
    Algorithm1Decision d;
    d.eps = b.pn.vec(x_ti);
    d.gamma_cap = algorithm1_gain_cap(b.gamma_F_hat, b.gamma_bar, r_i, d.eps);
    if (d.gamma_cap > 0.0) d.deployed = trainer(d.gamma_cap);
    return d;
}

/// Algorithm-2 state threshold for the i-th update at the given gain level.
inline double algorithm2_threshold(const UpdateBudget& b, double r_i, double gamma_level) {
    return r_i / (b.gamma_F_hat * (gamma_level + 1.0));
}

enum class RunMode { StaticOffline, OnlineAlg1, OnlineAlg2, RhoBaseline };

inline std::string to_string(RunMode m) {
    switch (m) {
        case RunMode::StaticOffline: return "static_offline";
        case RunMode::OnlineAlg1: return "online_alg1";
        case RunMode::OnlineAlg2: return "online_alg2";
        case RunMode::RhoBaseline: return "rho_baseline";
    }
    return "?";
}

inline RunMode run_mode_from_string(const std::string& s) {
    if (s == "static_offline") return RunMode::StaticOffline;
    if (s == "online_alg1") return RunMode::OnlineAlg1;
    if (s == "online_alg2") return RunMode::OnlineAlg2;
    if (s == "rho_baseline") return RunMode::RhoBaseline;
    throw std::invalid_argument("unknown run mode '" + s + "'");
}

struct RunSetup {
    const ErrorDynamics* dyn = nullptr;
    const PlantModel* plant = nullptr;  // for IMC reconstruction
    LossSpec loss;
    DisturbanceModel dm;       // distribution the update solves sample from
    Signal w;                  // realized disturbance, w[0] ignored (w_0 = x_0)
    Eigen::VectorXd e0;
    GainBoundedPolicy initial_policy;
    UpdateBudget budget;
    int T = 100;
    RunMode mode = RunMode::StaticOffline;
    int t_opt = 2;              // Algorithm 1 schedule
    double gamma_level = 2.0;   // Algorithm 2 gain level
    TrainConfig train;          // per-update solve budget (gain_cap overwritten per update)
    RhoConfig rho;
    Rng train_rng;              // consumed only by accepted update solves / RHO
    std::ostream* train_log = nullptr;
};

struct RunResult {
    ClosedLoopTrace trace;
    SwitchLog log;
};

/// Execute the concatenated controller for T+1 steps. Updates take effect at
/// their attempt time with a zero-state policy reset; rejected attempts keep
/// the incumbent running without touching its internal state.
inline RunResult run_closed_loop(RunSetup& s) {
    const ErrorDynamics& dyn = *s.dyn;
    const int n = dyn.state_dim();
    if (s.w.length() < s.T + 1) throw std::invalid_argument("run_closed_loop: disturbance shorter than horizon");
    if (s.e0.size() != n) throw std::invalid_argument("run_closed_loop: initial state dimension mismatch");

    RunResult out;
    out.trace = ClosedLoopTrace(n, dyn.input_dim());
    out.log.gamma_M0 = (s.mode == RunMode::RhoBaseline) ? 0.0 : s.initial_policy.certified_gain();
    out.log.gamma_F_hat = s.budget.gamma_F_hat;
    out.log.gamma_bar = s.budget.gamma_bar;

    GainBoundedPolicy policy = s.initial_policy;
    policy.reset();
    if (s.mode != RunMode::RhoBaseline)
        out.log.checkpoints.push_back({0, 0, policy.to_json()});

    Eigen::VectorXd x = s.e0;
    Eigen::VectorXd x_prev, u_prev;
    int segment = 0, segment_start = 0, accepted = 0, attempt = 0;

    // Algorithm 2 arms a fixed threshold per pending update index.
    double alg2_r = 0.0, alg2_eps = 0.0;
    int alg2_armed_at = 0;
    auto arm_alg2 = [&](int t_arm) {
        alg2_armed_at = t_arm;
        alg2_r = s.budget.r_for_attempt(t_arm, accepted + 1);
        alg2_eps = algorithm2_threshold(s.budget, alg2_r, s.gamma_level);
    };
    if (s.mode == RunMode::OnlineAlg2) arm_alg2(1);

    for (int t = 0; t <= s.T; ++t) {
        if (!x.allFinite()) throw DivergenceError("run_closed_loop: non-finite state", t);
        const Eigen::VectorXd w_hat =
            (t == 0) ? x : reconstruct_disturbance(*s.plant, t, x, x_prev, u_prev);

        if (s.mode == RunMode::OnlineAlg1 && t > 0 && t % s.t_opt == 0) {
            ++attempt;
            const int i_next = accepted + 1;
            const double r = s.budget.r_for_attempt(t, i_next);
            auto trainer = [&](double gamma_cap) {
                TrainConfig tc = s.train;
                tc.gain_cap = gamma_cap;
                return solve_update_problem(dyn, policy, tc, x, s.loss, t, s.dm, s.train_rng, s.train_log);
            };
            Algorithm1Decision dec = algorithm1_step(s.budget, r, x, trainer);
            SwitchRecord rec{attempt, t, i_next, dec.eps, dec.eps, r, dec.gamma_cap, 0.0, false, "budget"};
            if (dec.deployed) {
                rec.gamma_deployed = dec.deployed->certified_gain();
                rec.accepted = true;
                rec.reason = "ok";
                policy = std::move(*dec.deployed);
                policy.reset();
                ++segment;
                segment_start = t;
                ++accepted;
                out.log.checkpoints.push_back({t, segment, policy.to_json()});
            }
            out.log.records.push_back(std::move(rec));
        } else if (s.mode == RunMode::OnlineAlg2 && t >= alg2_armed_at) {
            const double xnorm = s.budget.pn.vec(x);
            if (xnorm <= alg2_eps) {
                ++attempt;
                const int i_next = accepted + 1;
                TrainConfig tc = s.train;
                tc.gain_cap = s.gamma_level;
                GainBoundedPolicy fresh = solve_update_problem(dyn, policy, tc, x, s.loss, t, s.dm,
                                                               s.train_rng, s.train_log);
                SwitchRecord rec{attempt, t,    i_next, xnorm, alg2_eps, alg2_r, s.gamma_level,
                                 fresh.certified_gain(), true, "ok"};
                policy = std::move(fresh);
                policy.reset();
                ++segment;
                segment_start = t;
                ++accepted;
                out.log.checkpoints.push_back({t, segment, policy.to_json()});
                out.log.records.push_back(std::move(rec));
                arm_alg2(t + 1);
            }
        }

        Eigen::VectorXd u;
        if (s.mode == RunMode::RhoBaseline) {
            u = solve_rho_step(dyn, x, s.loss, s.rho, t, s.dm, s.train_rng);
        } else {
            const Eigen::VectorXd z = (t == segment_start) ? x : w_hat;
            u = policy.step(z);
        }

        TraceStep step;
        step.t = t;
        step.x = x;
        step.u = u;
        step.w = (t == 0) ? x : s.w[t];
        step.w_hat = w_hat;
        step.segment = segment;
        step.stage_cost = stage_cost(s.loss, x, u, t);
        out.trace.push_back(std::move(step));

        if (t < s.T) {
            x_prev = x;
            u_prev = u;
            x = dyn.step(t, x, u) + s.w[t + 1];
        }
    }
    return out;
}

struct WindowBoundRow {
    int window = 0;    // 0 is the pre-update window
    int t_begin = 0, t_end = 0;
    double lhs = 0.0;  // ||x-bar_i||_p
    double rhs = 0.0;  // C0 ||w-bar_0||_p or r^(i) + C ||w-bar_i||_p
    bool passed = false;
};

struct WindowBoundReport {
    bool passed = true;
    std::vector<WindowBoundRow> rows;
    std::optional<WindowBoundRow> aggregate;  // p = inf total bound

    std::string summary() const {
        std::ostringstream os;
        for (const auto& r : rows)
            os << "window " << r.window << " [" << r.t_begin << "," << r.t_end << "] lhs="
               << format_double(r.lhs) << " rhs=" << format_double(r.rhs)
               << (r.passed ? " ok" : " VIOLATED") << "\n";
        if (aggregate)
            os << "aggregate linf lhs=" << format_double(aggregate->lhs)
               << " rhs=" << format_double(aggregate->rhs) << (aggregate->passed ? " ok" : " VIOLATED")
               << "\n";
        return os.str();
    }
};

/// Verify the per-window bounds of the stability proof on an executed trace:
///   window 0:      ||x-bar_0||_p <= C0 ||w-bar_0||_p,      C0 = gamma_F (gamma_M0 + 1)
///   window i >= 1: ||x-bar_i||_p <= r^(i) + C ||w-bar_i||_p, C = gamma_F (gamma_bar + 1)
/// and for p = inf the aggregate sup bound. This is the primary correctness
/// alarm for the whole scheme.
inline WindowBoundReport verify_window_bounds(const ClosedLoopTrace& trace, const SwitchLog& log,
                                              const UpdateBudget& budget, const PNorm& pn,
                                              double rel_tol = 1e-9) {
    WindowBoundReport report;
    const Signal x = trace.states();
    const Signal w = trace.disturbances();
    const double C0 = budget.gamma_F_hat * (log.gamma_M0 + 1.0);
    const double C = budget.gamma_F_hat * (budget.gamma_bar + 1.0);

    const auto accepted = log.accepted_records();
    std::vector<int> bounds{0};
    for (const auto* r : accepted) bounds.push_back(r->t);
    bounds.push_back(trace.length());

    double sup_w_tail = 0.0, r_max = 0.0;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
        const int a = bounds[i];
        const int b = bounds[i + 1] - 1;
        if (b < a) continue;  // update at the final step leaves an empty window
        WindowBoundRow row;
        row.window = static_cast<int>(i);
        row.t_begin = a;
        row.t_end = b;
        row.lhs = norm(x.window(a, b), pn);
        const double wn = norm(w.window(a, b), pn);
        if (i == 0) {
            row.rhs = C0 * wn;
        } else {
            row.rhs = accepted[i - 1]->r + C * wn;
            sup_w_tail = std::max(sup_w_tail, wn);
            r_max = std::max(r_max, accepted[i - 1]->r);
        }
        row.passed = row.lhs <= row.rhs * (1.0 + rel_tol) + 1e-12;
        report.passed = report.passed && row.passed;
        report.rows.push_back(row);
    }

    if (pn.is_inf() && !report.rows.empty()) {
        WindowBoundRow agg;
        agg.window = -1;
        agg.t_begin = 0;
        agg.t_end = trace.length() - 1;
        agg.lhs = norm(x, pn);
        const double w0n = report.rows.front().window == 0
                               ? norm(w.window(0, bounds[1] - 1), pn)
                               : 0.0;
        agg.rhs = std::max(C0 * w0n, r_max + C * sup_w_tail);
        agg.passed = agg.lhs <= agg.rhs * (1.0 + rel_tol) + 1e-12;
        report.passed = report.passed && agg.passed;
        report.aggregate = agg;
    }
    return report;
}

/// Bitwise replay of the logged accept decisions: every accepted record must
/// satisfy the admissibility inequalities exactly as logged.
inline bool replay_certificates(const SwitchLog& log) {
    for (const auto& r : log.records) {
        if (!r.accepted) continue;
        const auto chk = check_update_admissible(log.gamma_F_hat, log.gamma_bar, r.eps, r.r,
                                                 r.state_norm, r.gamma_deployed);
        if (!chk.admissible) return false;
    }
    return true;
}

struct IssEnvelopeReport {
    bool passed = true;
    double worst_ratio = 0.0;  // max over t of |x_t| / envelope(t)
    int worst_t = 0;
};

/// Piecewise-linear interpolation d-bar of the ISS schedule on the scheduled
/// update grid, and the pointwise envelope check
///   |x_t| <= D d-bar(t) |x_0| + (g + G) ||w||_inf.
inline IssEnvelopeReport iss_envelope_check(const ClosedLoopTrace& trace, const SwitchLog& log,
                                            const UpdateBudget& budget) {
    if (budget.kind != UpdateBudget::Kind::Iss)
        throw std::invalid_argument("iss_envelope_check: budget is not an ISS schedule");
    const auto& d = budget.d_schedule;
    const int t_opt = budget.t_opt;
    const double D = budget.gamma_F_hat * (log.gamma_M0 + 1.0);
    const double G = budget.gamma_F_hat * (budget.gamma_bar + 1.0);
    const double x0 = budget.pn.vec(trace[0].x);

    double w_inf = 0.0;
    for (int t = 1; t < trace.length(); ++t) w_inf = std::max(w_inf, budget.pn.vec(trace[t].w));

    auto dbar = [&](int t) {
        if (t <= t_opt) return d.front();
        const int i = t / t_opt;                    // t in [t_i, t_{i+1})
        const std::size_t lo = std::min<std::size_t>(static_cast<std::size_t>(i) - 1, d.size() - 1);
        const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(i), d.size() - 1);
        const double frac = static_cast<double>(t - i * t_opt) / static_cast<double>(t_opt);
        return d[lo] + (d[hi] - d[lo]) * frac;
    };

    IssEnvelopeReport rep;
    for (int t = 0; t < trace.length(); ++t) {
        const double env = D * dbar(t) * x0 + (budget.iss_g + G) * w_inf;
        const double ratio = env > 0.0 ? budget.pn.vec(trace[t].x) / env : 0.0;
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.worst_t = t;
        }
    }
    rep.passed = rep.worst_ratio <= 1.0 + 1e-9;
    return rep;
}

}  // namespace gainbudget
