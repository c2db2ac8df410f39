#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gainbudget/dynamics.hpp"
#include "gainbudget/obstacle.hpp"

namespace gainbudget {

struct Disk {
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    double radius = 0.0;
};

inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
inline double sigmoid(double x) { return x > 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

/// Stage cost: quadratic penalty [e;u]' Q [e;u] plus squared softplus-hinge
/// barriers on pairwise distances,
///   B(d) = (softplus(beta (d_safe - d)) / beta)^2,
/// smooth, nonnegative, and ~ (d_safe - d)^2 once violated.
struct LossSpec {
    Eigen::MatrixXd Q;  // psd weight on the stacked [e; u]
    double beta = 50.0;
    double margin = 0.05;
    double agent_radius = 0.25;
    int n_agents = 0;  // 0 disables all geometric terms

    // Anchors mapping error blocks to absolute positions: regulation uses
    // per-agent targets, tracking uses the reference at time t.
    std::vector<Eigen::Vector2d> targets;
    std::optional<CircularReference> reference;

    std::vector<Disk> static_obstacles;
    std::vector<ObstacleTrack> moving_obstacles;

    Eigen::Vector2d anchor(int j, int t) const {
        if (reference) return reference->position(t);
        return targets.at(static_cast<std::size_t>(j));
    }
    Eigen::Vector2d agent_position(const Eigen::VectorXd& e, int j, int t) const {
        return e.segment<2>(4 * j) + anchor(j, t);
    }
};

inline LossSpec default_loss(int n_agents, int input_dim) {
    LossSpec ls;
    ls.n_agents = n_agents;
    const int n = n_agents > 0 ? 4 * n_agents : 1;
    Eigen::VectorXd diag(n + input_dim);
    if (n_agents > 0) {
        for (int j = 0; j < n_agents; ++j) diag.segment<4>(4 * j) << 1.0, 1.0, 0.1, 0.1;
    } else {
        diag(0) = 1.0;
    }
    diag.tail(input_dim).setConstant(0.01);
    ls.Q = diag.asDiagonal();
    return ls;
}

namespace detail {

// Adds B(|pa - pb|) and its gradient with respect to pa (and pb when gb is
// non-null) for safety distance ds.
inline double barrier_pair(const LossSpec& ls, const Eigen::Vector2d& pa, const Eigen::Vector2d& pb,
                           double ds, Eigen::Vector2d* ga, Eigen::Vector2d* gb) {
    Eigen::Vector2d diff = pa - pb;
    double d = diff.norm();
    if (d < 1e-12) {
        d = 1e-12;
        diff = Eigen::Vector2d(1e-12, 0.0);  // arbitrary but fixed descent direction at overlap
    }
    const double s = ls.beta * (ds - d);
    const double sp = softplus(s) / ls.beta;
    const double val = sp * sp;
    if (ga) {
        const double dval_dd = -2.0 * sp * sigmoid(s);
        const Eigen::Vector2d g = dval_dd * diff / d;
        *ga += g;
        if (gb) *gb -= g;
    }
    return val;
}

}  // namespace detail

/// Stage cost with optional gradients (pass nullptr to skip them).
inline double stage_cost_grad(const LossSpec& ls, const Eigen::VectorXd& e, const Eigen::VectorXd& u,
                              int t, Eigen::VectorXd* de, Eigen::VectorXd* du) {
    const int n = static_cast<int>(e.size());
    const int m = static_cast<int>(u.size());
    if (ls.Q.rows() != n + m) throw std::invalid_argument("stage_cost: Q size does not match [e;u]");
    Eigen::VectorXd eu(n + m);
    eu << e, u;
    const Eigen::VectorXd Qeu = ls.Q * eu;
    double cost = eu.dot(Qeu);
    if (de) *de = 2.0 * Qeu.head(n);
    if (du) *du = 2.0 * Qeu.tail(m);

    if (ls.n_agents > 0) {
        std::vector<Eigen::Vector2d> pos(static_cast<std::size_t>(ls.n_agents));
        std::vector<Eigen::Vector2d> grad(static_cast<std::size_t>(ls.n_agents), Eigen::Vector2d::Zero());
        for (int j = 0; j < ls.n_agents; ++j) pos[static_cast<std::size_t>(j)] = ls.agent_position(e, j, t);

        for (int i = 0; i < ls.n_agents; ++i) {
            for (int j = i + 1; j < ls.n_agents; ++j)
                cost += detail::barrier_pair(ls, pos[i], pos[j], 2.0 * ls.agent_radius + ls.margin,
                                             de ? &grad[i] : nullptr, de ? &grad[j] : nullptr);
            for (const auto& ob : ls.static_obstacles)
                cost += detail::barrier_pair(ls, pos[i], ob.center, ls.agent_radius + ob.radius + ls.margin,
                                             de ? &grad[i] : nullptr, nullptr);
            for (const auto& tr : ls.moving_obstacles)
                cost += detail::barrier_pair(ls, pos[i], tr.position(t), ls.agent_radius + tr.radius + ls.margin,
                                             de ? &grad[i] : nullptr, nullptr);
        }
        if (de)
            for (int j = 0; j < ls.n_agents; ++j) de->segment<2>(4 * j) += grad[static_cast<std::size_t>(j)];
    }
    return cost;
}

inline double stage_cost(const LossSpec& ls, const Eigen::VectorXd& e, const Eigen::VectorXd& u, int t) {
    return stage_cost_grad(ls, e, u, t, nullptr, nullptr);
}

}  // namespace gainbudget
