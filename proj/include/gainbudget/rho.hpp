#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

#include "gainbudget/disturbance.hpp"
#include "gainbudget/dynamics.hpp"
#include "gainbudget/loss.hpp"
#include "gainbudget/training.hpp"

namespace gainbudget {

struct RhoConfig {
    int H = 10;
    int S = 3;
    int epochs = 60;
    double lr = 0.05;
};

/// Receding-horizon open-loop step: optimizes one input sequence u_0..u_{H-1}
/// shared across S sampled disturbance rollouts (u_H = 0 for the terminal
/// stage), then returns the first input. The caller applies it, advances the
/// state, and re-solves at the next step.
inline Eigen::VectorXd solve_rho_step(const ErrorDynamics& dyn, const Eigen::VectorXd& e_t,
                                      const LossSpec& ls, const RhoConfig& rc, int t_offset,
                                      const DisturbanceModel& dm, Rng& sample_rng) {
    if (rc.H < 1) throw std::invalid_argument("solve_rho_step: H must be >= 1");
    const int n = dyn.state_dim();
    const int m = dyn.input_dim();

    std::vector<Signal> samples;
    samples.reserve(static_cast<std::size_t>(rc.S));
    for (int s = 0; s < rc.S; ++s)
        samples.push_back(sample_disturbance_window(dm, t_offset, rc.H + 1, n, sample_rng,
                                                    /*include_impulses=*/false));

    Eigen::VectorXd U = Eigen::VectorXd::Zero(m * rc.H);
    Adam adam;
    const Eigen::VectorXd u_terminal = Eigen::VectorXd::Zero(m);

    std::vector<Eigen::VectorXd> e(rc.H + 1), ce(rc.H + 1), cu(rc.H + 1);
    std::vector<Eigen::MatrixXd> Je(rc.H), Ju(rc.H);

    for (int epoch = 0; epoch < rc.epochs; ++epoch) {
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(m * rc.H);
        for (const Signal& w : samples) {
            Eigen::VectorXd ec = e_t;
            for (int k = 0; k <= rc.H; ++k) {
                const Eigen::VectorXd u = (k < rc.H) ? U.segment(m * k, m) : u_terminal;
                e[k] = ec;
                ce[k].resize(n);
                cu[k].resize(m);
                stage_cost_grad(ls, e[k], u, t_offset + k, &ce[k], &cu[k]);
                if (k < rc.H) {
                    dyn.jacobians(t_offset + k, e[k], u, Je[k], Ju[k]);
                    ec = dyn.step(t_offset + k, e[k], u) + w[k + 1];
                }
            }
            Eigen::VectorXd lam_e = ce[rc.H];
            for (int k = rc.H - 1; k >= 0; --k) {
                grad.segment(m * k, m) += cu[k] + Ju[k].transpose() * lam_e;
                lam_e = ce[k] + Je[k].transpose() * lam_e;
            }
        }
        grad /= static_cast<double>(samples.size());
        adam.step(U, grad, rc.lr);
    }
    return U.head(m);
}

}  // namespace gainbudget
