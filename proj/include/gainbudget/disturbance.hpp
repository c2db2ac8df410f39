#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gainbudget/rng.hpp"
#include "gainbudget/signal.hpp"

namespace gainbudget {

enum class DisturbanceKind { GaussianDecay, BoundedPersistent, ImpulseOverlay };

/// Additive spike at one time step: `magnitude` is added to each listed
/// coordinate.
struct Impulse {
    int t = 0;
    double magnitude = 0.0;
    std::vector<int> coords;
};

/// Process-noise generator. GaussianDecay draws w_t ~ N(0, (sigma0 decay^t)^2 I);
/// BoundedPersistent draws uniform per-coordinate amplitude-bounded noise
/// (interpreted as an l2 element by zero extension past the horizon);
/// ImpulseOverlay has a zero base. Impulses, when listed, are overlaid on
/// any base.
struct DisturbanceModel {
    DisturbanceKind kind = DisturbanceKind::GaussianDecay;
    double sigma0 = 0.2;
    double decay = 0.95;
    double amplitude = 0.05;
    std::vector<Impulse> impulses;

    void validate() const {
        if (sigma0 < 0.0) throw std::invalid_argument("DisturbanceModel: sigma0 must be nonnegative");
        if (!(decay > 0.0 && decay <= 1.0)) throw std::invalid_argument("DisturbanceModel: decay must be in (0,1]");
        if (amplitude < 0.0) throw std::invalid_argument("DisturbanceModel: amplitude must be nonnegative");
    }
};

/// Sample w_{t_begin}, ..., w_{t_begin+len-1} of the nominal process (base
/// noise only when include_impulses is false; update solves train against
/// the nominal model, so unscheduled impulses stay unseen).
inline Signal sample_disturbance_window(const DisturbanceModel& dm, int t_begin, int len, int dim,
                                        Rng& rng, bool include_impulses = true) {
    dm.validate();
    if (len < 1) throw std::invalid_argument("sample_disturbance_window: len must be >= 1");
    Signal w(dim, len);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    for (int k = 0; k < len; ++k) {
        const int t = t_begin + k;
        Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
        switch (dm.kind) {
            case DisturbanceKind::GaussianDecay: {
                const double sd = dm.sigma0 * std::pow(dm.decay, t);
                for (int i = 0; i < dim; ++i) v(i) = sd * normal(rng);
                break;
            }
            case DisturbanceKind::BoundedPersistent:
                for (int i = 0; i < dim; ++i) v(i) = dm.amplitude * uniform(rng);
                break;
            case DisturbanceKind::ImpulseOverlay:
                break;
        }
        w.set(k, v);
    }
    if (include_impulses) {
        for (const auto& imp : dm.impulses) {
            const int k = imp.t - t_begin;
            if (k < 0 || k >= len) continue;
            Eigen::VectorXd v = w[k];
            for (int c : imp.coords) {
                if (c < 0 || c >= dim) throw std::invalid_argument("DisturbanceModel: impulse coordinate out of range");
                v(c) += imp.magnitude;
            }
            w.set(k, v);
        }
    }
    return w;
}

/// Full-horizon sample w_0, ..., w_T.
inline Signal sample_disturbance(const DisturbanceModel& dm, int horizon_T, int dim, Rng& rng) {
    return sample_disturbance_window(dm, 0, horizon_T + 1, dim, rng, true);
}

}  // namespace gainbudget
