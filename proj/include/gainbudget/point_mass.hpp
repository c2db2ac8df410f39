#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace gainbudget {

/// Planar point mass with nonlinear friction G(v) = -b1 v + b2 tanh(v).
struct PointMassParams {
    double m = 1.0;   // mass [kg]
    double Ts = 0.05; // sampling time [s]
    double b1 = 1.0;  // linear friction coefficient
    double b2 = 0.5;  // tanh friction coefficient, 0 < b2 < b1

    void validate() const {
        if (!(m > 0.0)) throw std::invalid_argument("PointMassParams: m must be positive");
        if (!(Ts > 0.0)) throw std::invalid_argument("PointMassParams: Ts must be positive");
        if (!(0.0 < b2 && b2 < b1)) throw std::invalid_argument("PointMassParams: requires 0 < b2 < b1");
    }
};

inline Eigen::Vector2d friction_force(const PointMassParams& p, const Eigen::Vector2d& v) {
    return -p.b1 * v + p.b2 * v.array().tanh().matrix();
}

/// Elementwise slope of the friction term, in [-b1, -(b1-b2)].
inline Eigen::Vector2d friction_slope(const PointMassParams& p, const Eigen::Vector2d& v) {
    Eigen::Array2d t = v.array().tanh();
    return (-p.b1 + p.b2 * (1.0 - t * t)).matrix();
}

/// One Euler step of the point mass:
///   q' = q + Ts v + w_q,   v' = v + Ts/m (F + G(v)) + w_v.
inline std::pair<Eigen::Vector2d, Eigen::Vector2d> step_point_mass(const PointMassParams& p,
                                                                   const Eigen::Vector2d& q,
                                                                   const Eigen::Vector2d& v,
                                                                   const Eigen::Vector2d& F,
                                                                   const Eigen::Vector4d& w) {
    const Eigen::Vector2d qn = q + p.Ts * v + w.head<2>();
    const Eigen::Vector2d vn = v + (p.Ts / p.m) * (F + friction_force(p, v)) + w.tail<2>();
    return {qn, vn};
}

}  // namespace gainbudget
