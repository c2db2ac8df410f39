#pragma once

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "gainbudget/disturbance.hpp"
#include "gainbudget/dynamics.hpp"
#include "gainbudget/loss.hpp"
#include "gainbudget/policy.hpp"
#include "gainbudget/signal.hpp"
#include "gainbudget/util.hpp"

namespace gainbudget {

struct TrainConfig {
    int H = 25;        // truncation horizon
    int S = 3;         // disturbance samples per update
    int epochs = 100;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    bool warm_start = true;
    double gain_cap = 1.0;  // certified-gain bound enforced by projection

    void validate() const {
        if (H < 1 || S < 1 || epochs < 0) throw std::invalid_argument("TrainConfig: H >= 1, S >= 1, epochs >= 0");
        if (!(gain_cap >= 0.0)) throw std::invalid_argument("TrainConfig: gain_cap must be >= 0");
    }
};

struct Adam {
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    Eigen::VectorXd m, v;
    int t = 0;

    void step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, double lr) {
        if (m.size() != theta.size()) {
            m = Eigen::VectorXd::Zero(theta.size());
            v = Eigen::VectorXd::Zero(theta.size());
            t = 0;
        }
        ++t;
        m = beta1 * m + (1.0 - beta1) * grad;
        v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
        const double bc1 = 1.0 - std::pow(beta1, t);
        const double bc2 = 1.0 - std::pow(beta2, t);
        theta -= (lr * (m / bc1).array() / ((v / bc2).array().sqrt() + eps)).matrix();
    }
};

struct RolloutResult {
    Signal e;  // e_0..e_H
    Signal u;  // u_0..u_H
    double loss = 0.0;
};

/// Closed-loop window rollout with the IMC convention: the policy is reset,
/// its first input is the window's initial state, and afterwards it sees the
/// reconstructed disturbance (== w, the model being exact in simulation).
/// `w` must have length H+1; w[0] is unused (the initial state stands in for
/// it). Stage costs are evaluated at absolute times t_offset + k.
inline RolloutResult rollout_and_loss(const ErrorDynamics& dyn, GainBoundedPolicy pol,
                                      const Eigen::VectorXd& e0, const Signal& w, const LossSpec& ls,
                                      int H, int t_offset) {
    if (w.length() < H + 1) throw std::invalid_argument("rollout_and_loss: disturbance window too short");
    pol.reset();
    RolloutResult out;
    out.e = Signal(dyn.state_dim(), 0);
    out.u = Signal(dyn.input_dim(), 0);
    Eigen::VectorXd e = e0;
    for (int k = 0; k <= H; ++k) {
        const Eigen::VectorXd z = (k == 0) ? e0 : w[k];
        const Eigen::VectorXd u = pol.step(z);
        out.e.push_back(e);
        out.u.push_back(u);
        out.loss += stage_cost(ls, e, u, t_offset + k);
        if (!std::isfinite(out.loss)) throw DivergenceError("rollout_and_loss: non-finite loss", k);
        if (k < H) e = dyn.step(t_offset + k, e, u) + w[k + 1];
    }
    return out;
}

/// Exact reverse-mode gradient of the S-sample average window loss with
/// respect to the policy parameters, backpropagating through both the
/// policy recurrence and the plant dynamics.
inline Eigen::VectorXd bptt_gradient(const ErrorDynamics& dyn, const GainBoundedPolicy& pol,
                                     const Eigen::VectorXd& e0, const std::vector<Signal>& w_samples,
                                     const LossSpec& ls, int H, int t_offset, double* avg_loss = nullptr) {
    const int n = dyn.state_dim();
    const int mu = dyn.input_dim();
    const int h = pol.hidden_dim();
    const Eigen::MatrixXd& Win = pol.W_in();
    const Eigen::MatrixXd& Wrec = pol.W_rec();
    const Eigen::MatrixXd& Wout = pol.W_out();

    Eigen::MatrixXd gWin = Eigen::MatrixXd::Zero(Win.rows(), Win.cols());
    Eigen::MatrixXd gWrec = Eigen::MatrixXd::Zero(Wrec.rows(), Wrec.cols());
    Eigen::MatrixXd gWout = Eigen::MatrixXd::Zero(Wout.rows(), Wout.cols());
    double total_loss = 0.0;

    std::vector<Eigen::VectorXd> z(H + 1), xi(H + 1), xi_prev(H + 1), u(H + 1), e(H + 1);
    std::vector<Eigen::VectorXd> ce(H + 1), cu(H + 1);
    std::vector<Eigen::MatrixXd> Je(H), Ju(H);

    for (const Signal& w : w_samples) {
        if (w.length() < H + 1) throw std::invalid_argument("bptt_gradient: disturbance window too short");
        // forward
        Eigen::VectorXd state = Eigen::VectorXd::Zero(h);
        Eigen::VectorXd ec = e0;
        for (int k = 0; k <= H; ++k) {
            z[k] = (k == 0) ? e0 : w[k];
            xi_prev[k] = state;
            state = (Wrec * state + Win * z[k]).array().tanh();
            xi[k] = state;
            u[k] = Wout * state;
            e[k] = ec;
            ce[k].resize(n);
            cu[k].resize(mu);
            total_loss += stage_cost_grad(ls, e[k], u[k], t_offset + k, &ce[k], &cu[k]);
            if (k < H) {
                dyn.jacobians(t_offset + k, e[k], u[k], Je[k], Ju[k]);
                ec = dyn.step(t_offset + k, e[k], u[k]) + w[k + 1];
            }
        }
        // backward
        Eigen::VectorXd lam_e_next, delta_next;
        for (int k = H; k >= 0; --k) {
            Eigen::VectorXd gu = cu[k];
            Eigen::VectorXd lam_e = ce[k];
            if (k < H) {
                gu += Ju[k].transpose() * lam_e_next;
                lam_e += Je[k].transpose() * lam_e_next;
            }
            Eigen::VectorXd lam_xi = Wout.transpose() * gu;
            if (k < H) lam_xi += Wrec.transpose() * delta_next;
            const Eigen::VectorXd delta =
                (lam_xi.array() * (1.0 - xi[k].array().square())).matrix();
            gWout += gu * xi[k].transpose();
            gWrec += delta * xi_prev[k].transpose();
            gWin += delta * z[k].transpose();
            lam_e_next = lam_e;
            delta_next = delta;
        }
    }

    const double S = static_cast<double>(w_samples.size());
    if (avg_loss) *avg_loss = total_loss / S;
    Eigen::VectorXd grad(pol.param_count());
    int idx = 0;
    auto put = [&](const Eigen::MatrixXd& M) {
        for (int i = 0; i < M.rows(); ++i)
            for (int j = 0; j < M.cols(); ++j) grad(idx++) = M(i, j) / S;
    };
    put(gWin);
    put(gWrec);
    put(gWout);
    return grad;
}

inline double batch_loss(const ErrorDynamics& dyn, const GainBoundedPolicy& pol, const Eigen::VectorXd& e0,
                         const std::vector<Signal>& w_samples, const LossSpec& ls, int H, int t_offset) {
    double acc = 0.0;
    for (const Signal& w : w_samples) acc += rollout_and_loss(dyn, pol, e0, w, ls, H, t_offset).loss;
    return acc / static_cast<double>(w_samples.size());
}

/// Budgeted solve of the truncated window problem: Adam steps on the
/// S-sample average loss, projecting to the gain cap after every step, and
/// returning the best projected iterate seen (including the warm start, so
/// the result never regresses on the training batch). Any iterate is safe to
/// deploy; optimality is not required for stability.
inline GainBoundedPolicy solve_update_problem(const ErrorDynamics& dyn, const GainBoundedPolicy& pol_init,
                                              const TrainConfig& tc, const Eigen::VectorXd& e0,
                                              const LossSpec& ls, int t_offset, const DisturbanceModel& dm,
                                              Rng& sample_rng, std::ostream* log = nullptr) {
    tc.validate();
    std::vector<Signal> samples;
    samples.reserve(static_cast<std::size_t>(tc.S));
    for (int s = 0; s < tc.S; ++s)
        samples.push_back(sample_disturbance_window(dm, t_offset, tc.H + 1, dyn.state_dim(), sample_rng,
                                                    /*include_impulses=*/false));

    GainBoundedPolicy pol = pol_init.with_fresh_caps();
    pol.project(tc.gain_cap);
    GainBoundedPolicy best = pol;
    double best_loss = batch_loss(dyn, pol, e0, samples, ls, tc.H, t_offset);

    const auto t_start = std::chrono::steady_clock::now();
    Adam adam;
    Eigen::VectorXd theta = pol.theta();
    for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
        double loss = 0.0;
        const Eigen::VectorXd grad = bptt_gradient(dyn, pol, e0, samples, ls, tc.H, t_offset, &loss);
        adam.step(theta, grad, tc.lr);
        pol.set_theta(theta);
        pol.project(tc.gain_cap);
        theta = pol.theta();  // keep the optimizer aligned with the projected point
        if (pol.certified_gain() > tc.gain_cap * (1.0 + 1e-12))
            throw std::logic_error("solve_update_problem: projection failed to enforce the gain cap");
        const double projected_loss = batch_loss(dyn, pol, e0, samples, ls, tc.H, t_offset);
        if (projected_loss < best_loss) {
            best_loss = projected_loss;
            best = pol;
        }
        if (log) {
            const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
            (*log) << epoch << "," << format_double(projected_loss) << ","
                   << format_double(pol.certified_gain()) << "," << format_double(grad.norm()) << ","
                   << format_double(wall) << "\n";
        }
    }
    return best;
}

}  // namespace gainbudget
