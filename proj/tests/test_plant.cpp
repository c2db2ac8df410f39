#include <catch2/catch_amalgamated.hpp>

#include "gainbudget/disturbance.hpp"
#include "gainbudget/dynamics.hpp"
#include "gainbudget/obstacle.hpp"
#include "gainbudget/point_mass.hpp"
#include "gainbudget/scenario.hpp"

using namespace gainbudget;

TEST_CASE("point-mass step: hand-evaluated Euler update") {
    PointMassParams p;  // m=1, Ts=0.05, b1=1, b2=0.5
    const Eigen::Vector2d q(0.0, 0.0), v(1.0, 0.0), F(0.0, 0.0);
    const Eigen::Vector4d w = Eigen::Vector4d::Zero();
    auto [qn, vn] = step_point_mass(p, q, v, F, w);
    CHECK(qn.x() == Catch::Approx(0.05).margin(1e-15));
    CHECK(qn.y() == 0.0);
    // v' = 1 + 0.05 (-1 + 0.5 tanh 1), tanh 1 = 0.7615941559...
    CHECK(vn.x() == Catch::Approx(0.96903985389889).epsilon(1e-12));
    CHECK(vn.y() == 0.0);
}

TEST_CASE("point-mass step: equilibrium and impulse channel") {
    PointMassParams p;
    const Eigen::Vector2d zero2 = Eigen::Vector2d::Zero();
    auto [q0, v0] = step_point_mass(p, zero2, zero2, zero2, Eigen::Vector4d::Zero());
    CHECK(q0.isZero(0.0));
    CHECK(v0.isZero(0.0));

    for (int k = 0; k < 4; ++k) {
        Eigen::Vector4d w = Eigen::Vector4d::Zero();
        w(k) = 1.0;
        auto [q, v] = step_point_mass(p, zero2, zero2, zero2, w);
        Eigen::Vector4d next;
        next << q, v;
        CHECK(next == w);
    }
}

TEST_CASE("error dynamics: equilibrium preserved and linearization Schur") {
    PointMassParams p;
    MountainsDynamics dyn(p, 1.0, 1.0, 2);
    const Eigen::VectorXd e0 = Eigen::VectorXd::Zero(8);
    const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(4);
    CHECK(dyn.step(0, e0, u0).isZero(0.0));

    // worst-case linearization is Schur for the default gains
    CHECK(spectral_radius(dyn.worst_case_state_matrix()) < 1.0);

    // small-state contraction towards the origin under the pre-stabilizer
    Eigen::VectorXd e = Eigen::VectorXd::Zero(8);
    e(0) = 0.01;
    e(2) = 0.01;
    for (int t = 0; t < 400; ++t) e = dyn.step(t, e, u0);
    CHECK(e.norm() < 0.01);
}

TEST_CASE("mountains error dynamics equal absolute point-mass dynamics") {
    // change-of-coordinates oracle: reconstruct absolute state, step with
    // step_point_mass, subtract the target
    PointMassParams p;
    MountainsDynamics dyn(p, 1.0, 1.0, 2);
    std::vector<Eigen::Vector2d> targets{{2.0, 2.0}, {-2.0, 2.0}};

    Rng rng = make_rng(3, "plant");
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd e = gaussian_vector(rng, 8);
        Eigen::VectorXd u = gaussian_vector(rng, 4);
        const Eigen::VectorXd enext = dyn.step(0, e, u);
        for (int j = 0; j < 2; ++j) {
            const Eigen::Vector2d q = e.segment<2>(4 * j) + targets[static_cast<std::size_t>(j)];
            const Eigen::Vector2d v = e.segment<2>(4 * j + 2);
            const Eigen::Vector2d F =
                Eigen::Vector2d(1.0 * (targets[static_cast<std::size_t>(j)].x() - q.x()),
                                1.0 * (targets[static_cast<std::size_t>(j)].y() - q.y())) +
                u.segment<2>(2 * j);
            auto [qn, vn] = step_point_mass(p, q, v, F, Eigen::Vector4d::Zero());
            CHECK((enext.segment<2>(4 * j) - (qn - targets[static_cast<std::size_t>(j)])).norm() < 1e-12);
            CHECK((enext.segment<2>(4 * j + 2) - vn).norm() < 1e-12);
        }
    }
}

TEST_CASE("tracking error dynamics consistent with absolute dynamics") {
    PointMassParams p;
    CircularReference ref;
    ref.pm = p;
    TrackingDynamics dyn(p, 1.0, 1.0, ref);

    Rng rng = make_rng(4, "plant");
    for (int trial = 0; trial < 10; ++trial) {
        const int t = trial * 7;
        Eigen::VectorXd e = gaussian_vector(rng, 4);
        Eigen::VectorXd u = gaussian_vector(rng, 2);
        const Eigen::VectorXd enext = dyn.step(t, e, u);

        // absolute rollout: x+ = f(x, F_ref + K'(q_ref - q) + u)
        const Eigen::Vector2d q = e.head<2>() + ref.position(t);
        const Eigen::Vector2d v = e.tail<2>() + ref.velocity(t);
        const Eigen::Vector2d F = ref.feedforward(t) +
                                  Eigen::Vector2d(1.0 * (ref.position(t).x() - q.x()),
                                                  1.0 * (ref.position(t).y() - q.y())) +
                                  u;
        auto [qn, vn] = step_point_mass(p, q, v, F, Eigen::Vector4d::Zero());
        CHECK((enext.head<2>() - (qn - ref.position(t + 1))).norm() < 1e-12);
        CHECK((enext.tail<2>() - (vn - ref.velocity(t + 1))).norm() < 1e-12);
    }

    // exact feedforward: zero error stays zero along the reference
    Eigen::VectorXd e = Eigen::VectorXd::Zero(4);
    for (int t = 0; t < 50; ++t) e = dyn.step(t, e, Eigen::Vector2d::Zero());
    CHECK(e.norm() < 1e-12);
}

TEST_CASE("disturbance reconstruction is exact under the true model") {
    auto dyn = std::make_shared<MountainsDynamics>(PointMassParams{}, 1.0, 1.0, 2);
    PlantModel pm = certify_plant(dyn);

    DisturbanceModel dm;
    Rng rng = make_rng(5, "plant");
    const Signal w = sample_disturbance(dm, 40, 8, rng);

    Eigen::VectorXd x = gaussian_vector(rng, 8);
    std::vector<Eigen::VectorXd> xs{x}, us;
    for (int t = 0; t < 40; ++t) {
        const Eigen::VectorXd u = 0.1 * gaussian_vector(rng, 4);
        us.push_back(u);
        x = dyn->step(t, x, u) + w[t + 1];
        xs.push_back(x);
    }
    double worst = 0.0;
    for (int t = 1; t <= 40; ++t) {
        const Eigen::VectorXd w_hat = reconstruct_disturbance(pm, t, xs[t], xs[t - 1], us[t - 1]);
        worst = std::max(worst, (w_hat - w[t]).norm());
    }
    CHECK(worst <= 1e-10);

    // t = 0 convention and noiseless rollouts
    CHECK(reconstruct_disturbance(pm, 0, xs[0], xs[0], us[0]) == xs[0]);
    Eigen::VectorXd y = xs[0];
    for (int t = 0; t < 5; ++t) {
        const Eigen::VectorXd ynext = dyn->step(t, y, us[static_cast<std::size_t>(t)]);
        CHECK(reconstruct_disturbance(pm, t + 1, ynext, y, us[static_cast<std::size_t>(t)]).norm() <= 1e-12);
        y = ynext;
    }
}

TEST_CASE("disturbance sampling") {
    SECTION("impulses only") {
        DisturbanceModel dm;
        dm.kind = DisturbanceKind::ImpulseOverlay;
        dm.impulses = {{1, 0.3, {0}}, {8, 0.3, {0}}};
        Rng rng = make_rng(6, "plant");
        const Signal w = sample_disturbance(dm, 12, 1, rng);
        for (int t = 0; t <= 12; ++t) {
            if (t == 1 || t == 8)
                CHECK(w[t](0) == Catch::Approx(0.3).margin(1e-15));
            else
                CHECK(w[t](0) == 0.0);
        }
    }
    SECTION("degenerate variance") {
        DisturbanceModel dm;
        dm.sigma0 = 0.0;
        Rng rng = make_rng(7, "plant");
        const Signal w = sample_disturbance(dm, 10, 3, rng);
        CHECK(norm(w, PNorm::l2()) == 0.0);
    }
    SECTION("same seed, same signal") {
        DisturbanceModel dm;
        Rng r1 = make_rng(8, "plant");
        Rng r2 = make_rng(8, "plant");
        const Signal a = sample_disturbance(dm, 20, 4, r1);
        const Signal b = sample_disturbance(dm, 20, 4, r2);
        for (int t = 0; t <= 20; ++t) CHECK(a[t] == b[t]);
    }
    SECTION("l2 norm concentrates near sigma0 sqrt(n / (1 - decay^2))") {
        DisturbanceModel dm;  // sigma0 = 0.2, decay = 0.95
        const int n = 4, T = 400;
        const double expected = dm.sigma0 * std::sqrt(n / (1.0 - dm.decay * dm.decay));
        std::vector<double> norms;
        for (int seed = 0; seed < 100; ++seed) {
            Rng rng = make_rng(static_cast<std::uint64_t>(seed), "plant-conc");
            norms.push_back(norm(sample_disturbance(dm, T, n, rng), PNorm::l2()));
        }
        double mean = 0.0;
        for (double x : norms) mean += x;
        mean /= norms.size();
        double var = 0.0;
        for (double x : norms) var += (x - mean) * (x - mean);
        const double sem = std::sqrt(var / (norms.size() - 1)) / std::sqrt(static_cast<double>(norms.size()));
        CHECK(std::abs(mean - expected) <= 3.0 * sem + 0.01 * expected);
    }
}

TEST_CASE("obstacle motion follows the perturbed sinusoid") {
    ObstacleTrack tr;
    tr.amplitude = 1.0;
    tr.psi = 0.05;
    tr.eta = 0.0;
    tr.phi = 0.0;
    tr.y0 = 0.0;
    CHECK(tr.y_at(0) == 0.0);

    // argument = pi/2 at t such that (2 pi psi) t = pi/2, i.e. via phase
    ObstacleTrack peak = tr;
    peak.phi = M_PI / 2.0;
    peak.y0 = 1.5;
    CHECK(peak.y_at(0) == Catch::Approx(1.0 + 1.5).epsilon(1e-14));

    // eta resampled per run changes the trajectory
    ObstacleTrack a = tr, b = tr;
    Rng r1 = make_rng(1, "obstacles");
    Rng r2 = make_rng(2, "obstacles");
    sample_track_randomness(a, r1);
    sample_track_randomness(b, r2);
    bool differ = false;
    for (int t = 0; t < 20 && !differ; ++t) differ = std::abs(a.y_at(t) - b.y_at(t)) > 1e-9;
    CHECK(differ);
}

TEST_CASE("scenario json round trip and strict keys") {
    const Scenario sc = Scenario::load(std::string(GB_SOURCE_DIR) + "/scenarios/mountains.json");
    CHECK(sc.kind == ScenarioKind::Mountains);
    CHECK(sc.horizon == 100);
    CHECK(sc.agents.size() == 2);
    CHECK(sc.state_dim() == 8);

    const nlohmann::json echo = sc.to_json();
    const Scenario back = Scenario::from_json(echo);
    CHECK(back.initial_error_vec() == sc.initial_error_vec());

    nlohmann::json bad = echo;
    bad["unexpected"] = 1;
    CHECK_THROWS_AS(Scenario::from_json(bad), std::invalid_argument);
}
