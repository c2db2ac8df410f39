#pragma once

#include <Eigen/Core>
#include <fstream>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gainbudget/disturbance.hpp"
#include "gainbudget/dynamics.hpp"
#include "gainbudget/loss.hpp"
#include "gainbudget/obstacle.hpp"
#include "gainbudget/rng.hpp"

namespace gainbudget {

inline void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument(where + ": unknown key '" + it.key() + "'");
}

struct AgentSpec {
    Eigen::Vector2d start = Eigen::Vector2d::Zero();
    Eigen::Vector2d target = Eigen::Vector2d::Zero();
    double radius = 0.25;
};

enum class ScenarioKind { Mountains, DynamicObstacles, ScalarSanity };

/// Benchmark description: plant parameters, pre-stabilizer, geometry,
/// disturbance model, loss weights, and simulation horizon.
struct Scenario {
    std::string name;
    ScenarioKind kind = ScenarioKind::Mountains;
    int horizon = 100;

    PointMassParams pm;
    double k1 = 1.0, k2 = 1.0;

    // mountains
    std::vector<AgentSpec> agents;
    std::vector<Disk> static_obstacles;

    // dynamic obstacles
    CircularReference reference;
    Eigen::VectorXd initial_error;  // tracking / scalar initial condition
    std::vector<ObstacleTrack> obstacle_tracks;
    double agent_radius = 0.25;

    // scalar sanity
    double scalar_a = 0.5;

    DisturbanceModel disturbance;

    // loss weights
    double beta = 50.0, margin = 0.05;
    double q_pos = 1.0, q_vel = 0.1, q_u = 0.01;

    int state_dim() const {
        switch (kind) {
            case ScenarioKind::Mountains: return 4 * static_cast<int>(agents.size());
            case ScenarioKind::DynamicObstacles: return 4;
            case ScenarioKind::ScalarSanity: return 1;
        }
        return 0;
    }
    int input_dim() const {
        switch (kind) {
            case ScenarioKind::Mountains: return 2 * static_cast<int>(agents.size());
            case ScenarioKind::DynamicObstacles: return 2;
            case ScenarioKind::ScalarSanity: return 1;
        }
        return 0;
    }

    std::shared_ptr<const ErrorDynamics> make_dynamics() const {
        switch (kind) {
            case ScenarioKind::Mountains:
                return std::make_shared<MountainsDynamics>(pm, k1, k2, static_cast<int>(agents.size()));
            case ScenarioKind::DynamicObstacles: {
                CircularReference ref = reference;
                ref.pm = pm;
                return std::make_shared<TrackingDynamics>(pm, k1, k2, ref);
            }
            case ScenarioKind::ScalarSanity: {
                Eigen::MatrixXd A(1, 1), B(1, 1);
                A << scalar_a;
                B << 1.0;
                return std::make_shared<LinearDynamics>(A, B);
            }
        }
        throw std::logic_error("Scenario: bad kind");
    }

    Eigen::VectorXd initial_error_vec() const {
        if (kind == ScenarioKind::Mountains) {
            Eigen::VectorXd e0 = Eigen::VectorXd::Zero(state_dim());
            for (std::size_t j = 0; j < agents.size(); ++j)
                e0.segment<2>(4 * static_cast<int>(j)) = agents[j].start - agents[j].target;
            return e0;
        }
        return initial_error;
    }

    /// Per-run loss (the sampled obstacle tracks differ per run).
    LossSpec make_loss(const std::vector<ObstacleTrack>& sampled_tracks) const {
        LossSpec ls;
        ls.beta = beta;
        ls.margin = margin;
        switch (kind) {
            case ScenarioKind::Mountains: {
                ls.n_agents = static_cast<int>(agents.size());
                ls.agent_radius = agents.empty() ? 0.25 : agents.front().radius;
                for (const auto& a : agents) ls.targets.push_back(a.target);
                ls.static_obstacles = static_obstacles;
                break;
            }
            case ScenarioKind::DynamicObstacles: {
                ls.n_agents = 1;
                ls.agent_radius = agent_radius;
                CircularReference ref = reference;
                ref.pm = pm;
                ls.reference = ref;
                ls.moving_obstacles = sampled_tracks;
                break;
            }
            case ScenarioKind::ScalarSanity:
                ls.n_agents = 0;
                break;
        }
        const int n = state_dim();
        const int m = input_dim();
        Eigen::VectorXd diag(n + m);
        if (kind == ScenarioKind::ScalarSanity) {
            diag(0) = q_pos;
        } else {
            for (int j = 0; j * 4 < n; ++j) diag.segment<4>(4 * j) << q_pos, q_pos, q_vel, q_vel;
        }
        diag.tail(m).setConstant(q_u);
        ls.Q = diag.asDiagonal();
        return ls;
    }

    /// Analytic linf input-to-state gain, available for the scalar plant
    /// (geometric series); p != 2 runs require a user-supplied bound.
    double supplied_gamma_inf() const {
        if (kind != ScenarioKind::ScalarSanity)
            throw std::invalid_argument("supplied_gamma_inf: only the scalar plant carries an analytic linf gain");
        return 1.0 / (1.0 - scalar_a);
    }

    nlohmann::json to_json() const;
    static Scenario from_json(const nlohmann::json& j);
    static Scenario load(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw std::invalid_argument("Scenario: cannot open " + path);
        nlohmann::json j;
        f >> j;
        return from_json(j);
    }
};

/// Everything one run needs, instantiated deterministically from the seed.
struct RunContext {
    std::shared_ptr<const ErrorDynamics> dyn;
    LossSpec loss;
    std::vector<ObstacleTrack> tracks;
    Signal w;  // realized disturbance over the horizon
    Eigen::VectorXd e0;
};

inline RunContext instantiate_run(const Scenario& sc, std::uint64_t seed) {
    RunContext ctx;
    ctx.dyn = sc.make_dynamics();
    ctx.e0 = sc.initial_error_vec();
    ctx.tracks = sc.obstacle_tracks;
    if (sc.kind == ScenarioKind::DynamicObstacles) {
        Rng orng = make_rng(seed, "obstacles");
        for (auto& tr : ctx.tracks) sample_track_randomness(tr, orng);
    }
    ctx.loss = sc.make_loss(ctx.tracks);
    Rng wrng = make_rng(seed, "disturbance");
    ctx.w = sample_disturbance(sc.disturbance, sc.horizon, sc.state_dim(), wrng);
    return ctx;
}

// --- JSON ---

inline nlohmann::json Scenario::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["name"] = name;
    j["horizon"] = horizon;
    j["plant"] = {{"m", pm.m}, {"Ts", pm.Ts}, {"b1", pm.b1}, {"b2", pm.b2}};
    j["prestabilizer"] = {{"k1", k1}, {"k2", k2}};
    nlohmann::json dj;
    switch (disturbance.kind) {
        case DisturbanceKind::GaussianDecay:
            dj["kind"] = "gaussian_decay";
            dj["sigma0"] = disturbance.sigma0;
            dj["decay"] = disturbance.decay;
            break;
        case DisturbanceKind::BoundedPersistent:
            dj["kind"] = "bounded_persistent";
            dj["amplitude"] = disturbance.amplitude;
            break;
        case DisturbanceKind::ImpulseOverlay:
            dj["kind"] = "impulse_overlay";
            break;
    }
    dj["impulses"] = nlohmann::json::array();
    for (const auto& imp : disturbance.impulses)
        dj["impulses"].push_back({{"t", imp.t}, {"magnitude", imp.magnitude}, {"coords", imp.coords}});
    j["disturbance"] = dj;
    j["loss"] = {{"beta", beta}, {"margin", margin}, {"q_pos", q_pos}, {"q_vel", q_vel}, {"q_u", q_u}};
    switch (kind) {
        case ScenarioKind::Mountains: {
            j["kind"] = "mountains";
            j["agents"] = nlohmann::json::array();
            for (const auto& a : agents)
                j["agents"].push_back({{"start", {a.start.x(), a.start.y()}},
                                       {"target", {a.target.x(), a.target.y()}},
                                       {"radius", a.radius}});
            j["static_obstacles"] = nlohmann::json::array();
            for (const auto& o : static_obstacles)
                j["static_obstacles"].push_back({{"center", {o.center.x(), o.center.y()}}, {"radius", o.radius}});
            break;
        }
        case ScenarioKind::DynamicObstacles: {
            j["kind"] = "dynamic_obstacles";
            j["agent_radius"] = agent_radius;
            j["reference"] = {{"center", {reference.center.x(), reference.center.y()}},
                              {"radius", reference.radius},
                              {"omega", reference.omega},
                              {"theta0", reference.theta0}};
            j["initial_error"] = std::vector<double>(initial_error.data(), initial_error.data() + initial_error.size());
            j["obstacle_tracks"] = nlohmann::json::array();
            for (const auto& tr : obstacle_tracks)
                j["obstacle_tracks"].push_back({{"amplitude", tr.amplitude}, {"psi", tr.psi},
                                                {"y0", tr.y0}, {"x", tr.x}, {"radius", tr.radius}});
            break;
        }
        case ScenarioKind::ScalarSanity: {
            j["kind"] = "scalar_sanity";
            j["a"] = scalar_a;
            j["initial_error"] = std::vector<double>(initial_error.data(), initial_error.data() + initial_error.size());
            break;
        }
    }
    return j;
}

inline Scenario Scenario::from_json(const nlohmann::json& j) {
    require_keys(j, {"schema_version", "name", "kind", "horizon", "plant", "prestabilizer", "agents",
                     "static_obstacles", "agent_radius", "reference", "initial_error", "obstacle_tracks",
                     "a", "disturbance", "loss"},
                 "Scenario");
    if (j.at("schema_version").get<int>() != 1) throw std::invalid_argument("Scenario: unsupported schema_version");
    Scenario sc;
    sc.name = j.at("name").get<std::string>();
    sc.horizon = j.at("horizon").get<int>();
    const std::string kind = j.at("kind").get<std::string>();
    if (j.contains("plant")) {
        const auto& pj = j.at("plant");
        require_keys(pj, {"m", "Ts", "b1", "b2"}, "Scenario.plant");
        sc.pm.m = pj.at("m").get<double>();
        sc.pm.Ts = pj.at("Ts").get<double>();
        sc.pm.b1 = pj.at("b1").get<double>();
        sc.pm.b2 = pj.at("b2").get<double>();
    }
    if (j.contains("prestabilizer")) {
        const auto& kj = j.at("prestabilizer");
        require_keys(kj, {"k1", "k2"}, "Scenario.prestabilizer");
        sc.k1 = kj.at("k1").get<double>();
        sc.k2 = kj.at("k2").get<double>();
    }
    if (j.contains("loss")) {
        const auto& lj = j.at("loss");
        require_keys(lj, {"beta", "margin", "q_pos", "q_vel", "q_u"}, "Scenario.loss");
        sc.beta = lj.value("beta", sc.beta);
        sc.margin = lj.value("margin", sc.margin);
        sc.q_pos = lj.value("q_pos", sc.q_pos);
        sc.q_vel = lj.value("q_vel", sc.q_vel);
        sc.q_u = lj.value("q_u", sc.q_u);
    }
    {
        const auto& dj = j.at("disturbance");
        require_keys(dj, {"kind", "sigma0", "decay", "amplitude", "impulses"}, "Scenario.disturbance");
        const std::string dk = dj.at("kind").get<std::string>();
        if (dk == "gaussian_decay") {
            sc.disturbance.kind = DisturbanceKind::GaussianDecay;
            sc.disturbance.sigma0 = dj.at("sigma0").get<double>();
            sc.disturbance.decay = dj.at("decay").get<double>();
        } else if (dk == "bounded_persistent") {
            sc.disturbance.kind = DisturbanceKind::BoundedPersistent;
            sc.disturbance.amplitude = dj.at("amplitude").get<double>();
        } else if (dk == "impulse_overlay") {
            sc.disturbance.kind = DisturbanceKind::ImpulseOverlay;
        } else {
            throw std::invalid_argument("Scenario: unknown disturbance kind '" + dk + "'");
        }
        if (dj.contains("impulses")) {
            for (const auto& ij : dj.at("impulses")) {
                require_keys(ij, {"t", "magnitude", "coords"}, "Scenario.impulse");
                Impulse imp;
                imp.t = ij.at("t").get<int>();
                imp.magnitude = ij.at("magnitude").get<double>();
                imp.coords = ij.at("coords").get<std::vector<int>>();
                sc.disturbance.impulses.push_back(std::move(imp));
            }
        }
    }
    auto vec2 = [](const nlohmann::json& a) { return Eigen::Vector2d(a.at(0).get<double>(), a.at(1).get<double>()); };
    if (kind == "mountains") {
        sc.kind = ScenarioKind::Mountains;
        for (const auto& aj : j.at("agents")) {
            require_keys(aj, {"start", "target", "radius"}, "Scenario.agent");
            AgentSpec a;
            a.start = vec2(aj.at("start"));
            a.target = vec2(aj.at("target"));
            a.radius = aj.at("radius").get<double>();
            sc.agents.push_back(a);
        }
        if (j.contains("static_obstacles")) {
            for (const auto& oj : j.at("static_obstacles")) {
                require_keys(oj, {"center", "radius"}, "Scenario.obstacle");
                sc.static_obstacles.push_back({vec2(oj.at("center")), oj.at("radius").get<double>()});
            }
        }
    } else if (kind == "dynamic_obstacles") {
        sc.kind = ScenarioKind::DynamicObstacles;
        sc.agent_radius = j.at("agent_radius").get<double>();
        const auto& rj = j.at("reference");
        require_keys(rj, {"center", "radius", "omega", "theta0"}, "Scenario.reference");
        sc.reference.center = vec2(rj.at("center"));
        sc.reference.radius = rj.at("radius").get<double>();
        sc.reference.omega = rj.at("omega").get<double>();
        sc.reference.theta0 = rj.value("theta0", 0.0);
        sc.reference.pm = sc.pm;
        const auto e0 = j.at("initial_error").get<std::vector<double>>();
        sc.initial_error = Eigen::Map<const Eigen::VectorXd>(e0.data(), static_cast<int>(e0.size()));
        for (const auto& tj : j.at("obstacle_tracks")) {
            require_keys(tj, {"amplitude", "psi", "y0", "x", "radius"}, "Scenario.track");
            ObstacleTrack tr;
            tr.amplitude = tj.at("amplitude").get<double>();
            tr.psi = tj.at("psi").get<double>();
            tr.y0 = tj.at("y0").get<double>();
            tr.x = tj.at("x").get<double>();
            tr.radius = tj.at("radius").get<double>();
            sc.obstacle_tracks.push_back(tr);
        }
    } else if (kind == "scalar_sanity") {
        sc.kind = ScenarioKind::ScalarSanity;
        sc.scalar_a = j.at("a").get<double>();
        const auto e0 = j.at("initial_error").get<std::vector<double>>();
        sc.initial_error = Eigen::Map<const Eigen::VectorXd>(e0.data(), static_cast<int>(e0.size()));
    } else {
        throw std::invalid_argument("Scenario: unknown kind '" + kind + "'");
    }
    return sc;
}

}  // namespace gainbudget
