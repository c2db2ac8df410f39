#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "gainbudget/rng.hpp"

namespace gainbudget {

/// Vertical perturbed-sinusoid obstacle motion
///   y_t = A sin((2 pi psi + eta) t + phi) + y0
/// at fixed horizontal position x. eta and phi are resampled per run.
struct ObstacleTrack {
    double amplitude = 1.0;
    double psi = 0.05;   // nominal frequency
    double eta = 0.0;    // per-run frequency perturbation, N(0, 0.01)
    double phi = 0.0;    // per-run phase
    double y0 = 1.5;
    double x = 0.0;
    double radius = 0.4;

    double y_at(int t) const {
        return amplitude * std::sin((2.0 * M_PI * psi + eta) * t + phi) + y0;
    }
    Eigen::Vector2d position(int t) const { return {x, y_at(t)}; }
};

inline void sample_track_randomness(ObstacleTrack& track, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 0.1);  // variance 0.01
    std::uniform_real_distribution<double> uniform(0.0, 2.0 * M_PI);
    track.eta = normal(rng);
    track.phi = uniform(rng);
}

inline Eigen::Vector2d obstacle_position(const std::vector<ObstacleTrack>& tracks, int j, int t) {
    return tracks.at(static_cast<std::size_t>(j)).position(t);
}

}  // namespace gainbudget
