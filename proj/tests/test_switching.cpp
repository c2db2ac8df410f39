#include <catch2/catch_amalgamated.hpp>

#include "gainbudget/budget.hpp"
#include "gainbudget/scenario.hpp"
#include "gainbudget/switching.hpp"

using namespace gainbudget;

namespace {

struct ScalarRig {
    Scenario sc;
    std::shared_ptr<const ErrorDynamics> dyn;
    PlantModel plant;
    GainBoundedPolicy M0;

    ScalarRig()
        : sc(Scenario::load(std::string(GB_SOURCE_DIR) + "/scenarios/scalar_sanity.json")),
          dyn(sc.make_dynamics()),
          plant(certify_plant(dyn)) {
        Rng rng = make_rng(61, "switching");
        M0 = GainBoundedPolicy::random_init(1, 6, 1, 1.5, rng);
        M0.project(1.5);
    }

    RunSetup setup(RunMode mode, UpdateBudget budget, std::uint64_t seed) const {
        RunSetup s;
        s.dyn = dyn.get();
        s.plant = &plant;
        s.loss = sc.make_loss({});
        s.dm = sc.disturbance;
        Rng wrng = make_rng(seed, "disturbance");
        s.w = sample_disturbance(sc.disturbance, sc.horizon, 1, wrng);
        s.e0 = sc.initial_error_vec();
        s.initial_policy = M0;
        s.budget = std::move(budget);
        s.T = sc.horizon;
        s.mode = mode;
        s.t_opt = 5;
        s.train.H = 10;
        s.train.S = 2;
        s.train.epochs = 10;
        s.train.lr = 5e-3;
        s.train_rng = make_rng(seed, "training");
        return s;
    }

    UpdateBudget profile_budget(double rho) const {
        UpdateBudget b;
        b.gamma_F_hat = plant.gamma_hat();
        b.gamma_bar = 1.5;
        b.kind = UpdateBudget::Kind::Profile;
        // nominal decay profile for the scalar plant
        BudgetProfile p;
        p.tail_ratio = 0.8;
        double v = rho;
        for (int t = 0; t <= sc.horizon; ++t, v *= 0.95) p.values.push_back(v);
        b.profile = p;
        return b;
    }
};

}  // namespace

TEST_CASE("admissibility predicate instances") {
    // gamma_F = 2, gamma_new = 3: 2 * 4 * 0.1 = 0.8 <= 1
    auto ok = check_update_admissible(2.0, 10.0, 0.1, 1.0, 0.05, 3.0);
    CHECK(ok.admissible);
    CHECK(ok.reason == "ok");

    auto trig = check_update_admissible(2.0, 10.0, 0.1, 1.0, 0.2, 3.0);
    CHECK_FALSE(trig.admissible);
    CHECK(trig.reason == "trigger");

    auto budget = check_update_admissible(2.0, 10.0, 0.1, 0.5, 0.05, 3.0);
    CHECK_FALSE(budget.admissible);
    CHECK(budget.reason == "budget");

    auto cap = check_update_admissible(2.0, 2.5, 0.1, 10.0, 0.05, 3.0);
    CHECK_FALSE(cap.admissible);
    CHECK(cap.reason == "gain-cap");
}

TEST_CASE("admissibility is monotone in the budget") {
    Rng rng = make_rng(62, "switching");
    std::uniform_real_distribution<double> unif(0.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double gF = 0.5 + unif(rng), gbar = 0.5 + unif(rng), eps = unif(rng);
        const double xn = unif(rng), gnew = unif(rng);
        const double r_small = unif(rng);
        const double r_large = r_small + unif(rng);
        if (check_update_admissible(gF, gbar, eps, r_small, xn, gnew).admissible)
            CHECK(check_update_admissible(gF, gbar, eps, r_large, xn, gnew).admissible);
    }
}

TEST_CASE("algorithm 1 gain allowance") {
    // r = 1, gamma_F = 2, |x| = 0.1 -> 1/0.2 - 1 = 4
    CHECK(algorithm1_gain_cap(2.0, 10.0, 1.0, 0.1) == Catch::Approx(4.0).epsilon(1e-9));
    // capped by gamma_bar
    CHECK(algorithm1_gain_cap(2.0, 2.5, 1.0, 0.1) == Catch::Approx(2.5).epsilon(1e-12));
    // large state: infeasible
    CHECK(algorithm1_gain_cap(2.0, 10.0, 1.0, 10.0) <= 0.0);
    // numerically zero state: division guard grants gamma_bar
    CHECK(algorithm1_gain_cap(2.0, 10.0, 1.0, 0.0) == 10.0);
    // granted allowance always keeps the certified product within budget
    Rng rng = make_rng(63, "switching");
    std::uniform_real_distribution<double> unif(1e-6, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double gF = unif(rng), r = unif(rng), xn = unif(rng);
        const double cap = algorithm1_gain_cap(gF, 5.0, r, xn);
        if (cap > 0.0 && xn >= 1e-12) CHECK(gF * (cap + 1.0) * xn <= r);
    }
}

TEST_CASE("algorithm 1 step: trainer only runs on feasible attempts") {
    UpdateBudget b;
    b.gamma_F_hat = 2.0;
    b.gamma_bar = 5.0;
    Eigen::VectorXd x(1);
    x << 10.0;  // far too large for r = 1
    bool called = false;
    auto trainer = [&](double) -> GainBoundedPolicy {
        called = true;
        return GainBoundedPolicy(1, 2, 1, 1.0);
    };
    const auto d = algorithm1_step(b, 1.0, x, trainer);
    CHECK_FALSE(d.deployed.has_value());
    CHECK_FALSE(called);
    CHECK(d.gamma_cap <= 0.0);

    x << 0.1;
    const auto d2 = algorithm1_step(b, 1.0, x, trainer);
    CHECK(d2.deployed.has_value());
    CHECK(called);
}

TEST_CASE("algorithm 2 threshold formula") {
    UpdateBudget b;
    b.gamma_F_hat = 2.0;
    b.gamma_bar = 10.0;
    CHECK(algorithm2_threshold(b, 0.5, 4.0) == Catch::Approx(0.05).epsilon(1e-12));
    // gamma -> 0 loosens the trigger towards r / gamma_F
    CHECK(algorithm2_threshold(b, 0.5, 1e-12) == Catch::Approx(0.25).epsilon(1e-9));
    // zero budget never triggers
    CHECK(algorithm2_threshold(b, 0.0, 4.0) == 0.0);
}

TEST_CASE("budget design from a nominal trajectory") {
    std::vector<Eigen::VectorXd> vals;
    for (double v : {1.0, 0.5, 0.25}) {
        Eigen::VectorXd x(1);
        x << v;
        vals.push_back(x);
    }
    const BudgetProfile p = design_budget_from_nominal(Signal(vals), 0.2, 0.5);
    CHECK(p.at(0) == Catch::Approx(0.2).epsilon(1e-12));
    CHECK(p.at(1) == Catch::Approx(0.1).epsilon(1e-12));
    CHECK(p.at(2) == Catch::Approx(0.05).epsilon(1e-12));
    CHECK(p.at(3) == Catch::Approx(0.025).epsilon(1e-12));
    CHECK(p.at(4) == Catch::Approx(0.0125).epsilon(1e-12));

    SECTION("zero scale is a dead budget") {
        const BudgetProfile z = design_budget_from_nominal(Signal(vals), 0.0, 0.5);
        for (int t = 0; t < 10; ++t) CHECK(z.at(t) == 0.0);
    }
    SECTION("geometric tail sums match the closed form") {
        const double eta = 0.5;
        // sum_{t>=2} r_t^2 = r_2^2 / (1 - eta^2), matched by partial sums
        const double closed = 0.05 * 0.05 / (1.0 - eta * eta);
        double partial = 0.0;
        for (int t = 2; t < 200; ++t) partial += p.at(t) * p.at(t);
        CHECK(partial == Catch::Approx(closed).epsilon(1e-12));
    }
}

TEST_CASE("iss budget schedule") {
    // d = 2^-i, D = 4, g = 1, ||w|| = 0.1 -> r = (2.1, 1.1, 0.6, 0.35, ...)
    std::vector<double> d;
    for (int i = 0; i <= 6; ++i) d.push_back(std::pow(2.0, -i));
    const auto r = iss_budget_schedule(1.0, 2.0, 1.0, d, 1.0, 0.1);
    CHECK(r[1] == Catch::Approx(2.1).epsilon(1e-12));
    CHECK(r[2] == Catch::Approx(1.1).epsilon(1e-12));
    CHECK(r[3] == Catch::Approx(0.6).epsilon(1e-12));
    CHECK(r[4] == Catch::Approx(0.35).epsilon(1e-12));

    CHECK_THROWS_AS(iss_budget_schedule(1.0, 2.0, 1.0, {0.5, 0.25}, 1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(iss_budget_schedule(1.0, 2.0, 1.0, {1.0, 1.0}, 1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(iss_budget_schedule(1.0, 2.0, 1.0, {1.0, 0.5}, 0.0, 0.1), std::invalid_argument);
}

TEST_CASE("closed-loop runner on the scalar plant") {
    ScalarRig rig;

    SECTION("static run verifies its window bound") {
        RunSetup s = rig.setup(RunMode::StaticOffline, rig.profile_budget(5.0), 7);
        const RunResult res = run_closed_loop(s);
        REQUIRE(res.trace.length() == rig.sc.horizon + 1);
        const auto report = verify_window_bounds(res.trace, res.log, s.budget, PNorm::l2());
        CHECK(report.passed);
        REQUIRE(report.rows.size() == 1);
        CHECK(report.rows[0].window == 0);
    }

    SECTION("zero-gain policy is bounded by the plant response alone") {
        RunSetup s = rig.setup(RunMode::StaticOffline, rig.profile_budget(5.0), 8);
        s.initial_policy.project(0.0);
        const RunResult res = run_closed_loop(s);
        const auto report = verify_window_bounds(res.trace, res.log, s.budget, PNorm::l2());
        REQUIRE(report.passed);
        // C0 = gamma_F (0 + 1): the bound reduces to the plant gain
        const Signal w = res.trace.disturbances();
        CHECK(report.rows[0].rhs ==
              Catch::Approx(s.budget.gamma_F_hat * norm(w, PNorm::l2())).epsilon(1e-12));
    }

    SECTION("online updates are accepted, logged, and certified") {
        RunSetup s = rig.setup(RunMode::OnlineAlg1, rig.profile_budget(8.0), 9);
        const RunResult res = run_closed_loop(s);
        int accepted = 0;
        for (const auto& r : res.log.records) accepted += r.accepted ? 1 : 0;
        REQUIRE(accepted > 0);
        CHECK(replay_certificates(res.log));
        CHECK(verify_window_bounds(res.trace, res.log, s.budget, PNorm::l2()).passed);
        // checkpoints cover the initial policy plus every accepted update
        CHECK(res.log.checkpoints.size() == static_cast<std::size_t>(accepted) + 1);
    }

    SECTION("a doctored trace is flagged in every window") {
        RunSetup s = rig.setup(RunMode::OnlineAlg1, rig.profile_budget(8.0), 10);
        const RunResult res = run_closed_loop(s);
        // scale far enough past the loosest margin that the violation is by
        // construction, then check every window trips the alarm
        const auto before = verify_window_bounds(res.trace, res.log, s.budget, PNorm::l2());
        double factor = 10.0;
        for (const auto& row : before.rows) factor = std::max(factor, 2.0 * row.rhs / row.lhs);
        ClosedLoopTrace bad(res.trace.state_dim(), res.trace.input_dim());
        for (const auto& st : res.trace.steps()) {
            TraceStep scaled = st;
            scaled.x *= factor;
            bad.push_back(scaled);
        }
        const auto report = verify_window_bounds(bad, res.log, s.budget, PNorm::l2());
        CHECK_FALSE(report.passed);
        for (const auto& row : report.rows) CHECK_FALSE(row.passed);
    }

    SECTION("all-rejected run equals the static closed loop exactly") {
        UpdateBudget dead = rig.profile_budget(0.0);  // r = 0 everywhere
        RunSetup s_online = rig.setup(RunMode::OnlineAlg1, dead, 11);
        RunSetup s_static = rig.setup(RunMode::StaticOffline, rig.profile_budget(5.0), 11);
        const RunResult online = run_closed_loop(s_online);
        const RunResult fixed = run_closed_loop(s_static);

        for (const auto& r : online.log.records) CHECK_FALSE(r.accepted);
        REQUIRE(online.trace.length() == fixed.trace.length());
        for (int t = 0; t < online.trace.length(); ++t) {
            CHECK(online.trace[t].x == fixed.trace[t].x);
            CHECK(online.trace[t].u == fixed.trace[t].u);
            CHECK(online.trace[t].stage_cost == fixed.trace[t].stage_cost);
            CHECK(online.trace[t].segment == 0);
        }
    }

    SECTION("algorithm 2 triggers when the state is small enough") {
        UpdateBudget b;
        b.gamma_F_hat = rig.plant.gamma_hat();
        b.gamma_bar = 1.5;
        b.kind = UpdateBudget::Kind::Index;
        b.index_values = {0.0};
        for (int i = 1; i <= 40; ++i) b.index_values.push_back(2.0 * std::pow(0.9, i));
        RunSetup s = rig.setup(RunMode::OnlineAlg2, b, 12);
        s.gamma_level = 1.0;
        const RunResult res = run_closed_loop(s);
        int accepted = 0;
        for (const auto& r : res.log.records) {
            CHECK(r.accepted);  // algorithm 2 logs only fired triggers
            CHECK(r.state_norm <= r.eps);
            ++accepted;
        }
        REQUIRE(accepted > 0);
        CHECK(verify_window_bounds(res.trace, res.log, s.budget, PNorm::l2()).passed);
        CHECK(replay_certificates(res.log));
    }
}

TEST_CASE("switch log serialization") {
    ScalarRig rig;
    RunSetup s = rig.setup(RunMode::OnlineAlg1, rig.profile_budget(8.0), 13);
    const RunResult res = run_closed_loop(s);

    const SwitchLog back = SwitchLog::from_json(res.log.to_json());
    REQUIRE(back.records.size() == res.log.records.size());
    for (std::size_t k = 0; k < back.records.size(); ++k) {
        CHECK(back.records[k].t == res.log.records[k].t);
        CHECK(back.records[k].r == res.log.records[k].r);
        CHECK(back.records[k].accepted == res.log.records[k].accepted);
    }
    CHECK(replay_certificates(back));

    std::stringstream csv;
    res.log.write_csv(csv);
    CHECK(csv.str().find("attempt,t,update_index") == 0);
}
