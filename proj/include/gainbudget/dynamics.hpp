#pragma once

#include <Eigen/Core>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

#include "gainbudget/gaincert.hpp"
#include "gainbudget/point_mass.hpp"

namespace gainbudget {

/// Pre-stabilized error dynamics e_{t+1} = f_t(e_t, u_t) + w_{t+1} with
/// f_t(0, 0) = 0. `step` returns the noiseless transition; process noise is
/// added by the caller.
class ErrorDynamics {
  public:
    virtual ~ErrorDynamics() = default;
    virtual int state_dim() const = 0;
    virtual int input_dim() const = 0;
    virtual Eigen::VectorXd step(int t, const Eigen::VectorXd& e, const Eigen::VectorXd& u) const = 0;
    virtual void jacobians(int t, const Eigen::VectorXd& e, const Eigen::VectorXd& u,
                           Eigen::MatrixXd& Je, Eigen::MatrixXd& Ju) const = 0;
    /// State matrix with the friction slope frozen at its least-damped value.
    virtual Eigen::MatrixXd worst_case_state_matrix() const = 0;
    virtual Eigen::MatrixXd input_matrix() const = 0;

    void check_dims(const Eigen::VectorXd& e, const Eigen::VectorXd& u) const {
        if (e.size() != state_dim() || u.size() != input_dim())
            throw std::invalid_argument("ErrorDynamics: dimension mismatch");
    }
};

/// Regulation error dynamics for `agents` pre-stabilized point masses with
/// zero target velocity. Per-agent state block is (eq_x, eq_y, ev_x, ev_y).
class MountainsDynamics final : public ErrorDynamics {
  public:
    MountainsDynamics(PointMassParams pm, double k1, double k2, int agents = 2)
        : pm_(pm), k1_(k1), k2_(k2), agents_(agents) {
        pm_.validate();
        if (agents_ < 1) throw std::invalid_argument("MountainsDynamics: agents must be >= 1");
    }

    int state_dim() const override { return 4 * agents_; }
    int input_dim() const override { return 2 * agents_; }
    int agents() const { return agents_; }
    const PointMassParams& params() const { return pm_; }
    double k1() const { return k1_; }
    double k2() const { return k2_; }

    Eigen::VectorXd step(int, const Eigen::VectorXd& e, const Eigen::VectorXd& u) const override {
        check_dims(e, u);
        Eigen::VectorXd out(state_dim());
        for (int j = 0; j < agents_; ++j) {
            const Eigen::Vector2d eq = e.segment<2>(4 * j);
            const Eigen::Vector2d ev = e.segment<2>(4 * j + 2);
            const Eigen::Vector2d uj = u.segment<2>(2 * j);
            const Eigen::Vector2d F = Eigen::Vector2d(-k1_ * eq(0), -k2_ * eq(1)) + uj;
            out.segment<2>(4 * j) = eq + pm_.Ts * ev;
            out.segment<2>(4 * j + 2) = ev + (pm_.Ts / pm_.m) * (F + friction_force(pm_, ev));
        }
        return out;
    }

    void jacobians(int, const Eigen::VectorXd& e, const Eigen::VectorXd& u,
                   Eigen::MatrixXd& Je, Eigen::MatrixXd& Ju) const override {
        check_dims(e, u);
        Je = Eigen::MatrixXd::Zero(state_dim(), state_dim());
        Ju = Eigen::MatrixXd::Zero(state_dim(), input_dim());
        for (int j = 0; j < agents_; ++j) {
            const Eigen::Vector2d ev = e.segment<2>(4 * j + 2);
            const Eigen::Vector2d s = friction_slope(pm_, ev);
            auto B = Je.block<4, 4>(4 * j, 4 * j);
            B.setZero();
            B.topLeftCorner<2, 2>().setIdentity();
            B.topRightCorner<2, 2>() = pm_.Ts * Eigen::Matrix2d::Identity();
            B(2, 0) = -pm_.Ts * k1_ / pm_.m;
            B(3, 1) = -pm_.Ts * k2_ / pm_.m;
            B(2, 2) = 1.0 + pm_.Ts * s(0) / pm_.m;
            B(3, 3) = 1.0 + pm_.Ts * s(1) / pm_.m;
            Ju.block<2, 2>(4 * j + 2, 2 * j) = (pm_.Ts / pm_.m) * Eigen::Matrix2d::Identity();
        }
    }

    Eigen::MatrixXd worst_case_state_matrix() const override {
        return block_diag(worst_case_linearization(pm_, k1_, k2_).first, agents_);
    }
    Eigen::MatrixXd input_matrix() const override {
        return block_diag(worst_case_linearization(pm_, k1_, k2_).second, agents_);
    }

  private:
    PointMassParams pm_;
    double k1_, k2_;
    int agents_;
};

/// Circular reference with forward-difference-consistent velocity and the
/// exact inverse-dynamics feedforward, so the reference is an exact
/// trajectory of the noiseless plant.
struct CircularReference {
    PointMassParams pm;
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    double radius = 2.0;
    double omega = 2.0 * M_PI / 300.0;  // rad per step
    double theta0 = 0.0;

    Eigen::Vector2d position(int t) const {
        const double th = theta0 + omega * t;
        return center + radius * Eigen::Vector2d(std::cos(th), std::sin(th));
    }
    Eigen::Vector2d velocity(int t) const { return (position(t + 1) - position(t)) / pm.Ts; }
    Eigen::Vector2d feedforward(int t) const {
        return pm.m * (velocity(t + 1) - velocity(t)) / pm.Ts - friction_force(pm, velocity(t));
    }
};

/// Tracking error dynamics for one point mass following a reference, with
/// feedforward cancelling the nominal motion. Time-varying through the
/// reference velocity entering the friction slope.
class TrackingDynamics final : public ErrorDynamics {
  public:
    TrackingDynamics(PointMassParams pm, double k1, double k2, CircularReference ref)
        : pm_(pm), k1_(k1), k2_(k2), ref_(std::move(ref)) {
        pm_.validate();
    }

    int state_dim() const override { return 4; }
    int input_dim() const override { return 2; }
    const CircularReference& reference() const { return ref_; }
    const PointMassParams& params() const { return pm_; }

    Eigen::VectorXd step(int t, const Eigen::VectorXd& e, const Eigen::VectorXd& u) const override {
        check_dims(e, u);
        const Eigen::Vector2d eq = e.head<2>();
        const Eigen::Vector2d ev = e.tail<2>();
        const Eigen::Vector2d vr = ref_.velocity(t);
        const Eigen::Vector2d F = Eigen::Vector2d(-k1_ * eq(0), -k2_ * eq(1)) + u.head<2>();
        Eigen::VectorXd out(4);
        out.head<2>() = eq + pm_.Ts * ev;
        out.tail<2>() = ev + (pm_.Ts / pm_.m) *
                                 (F + friction_force(pm_, vr + ev) - friction_force(pm_, vr));
        return out;
    }

    void jacobians(int t, const Eigen::VectorXd& e, const Eigen::VectorXd& u,
                   Eigen::MatrixXd& Je, Eigen::MatrixXd& Ju) const override {
        check_dims(e, u);
        const Eigen::Vector2d ev = e.tail<2>();
        const Eigen::Vector2d s = friction_slope(pm_, ref_.velocity(t) + ev);
        Je = Eigen::MatrixXd::Zero(4, 4);
        Je.topLeftCorner<2, 2>().setIdentity();
        Je.topRightCorner<2, 2>() = pm_.Ts * Eigen::Matrix2d::Identity();
        Je(2, 0) = -pm_.Ts * k1_ / pm_.m;
        Je(3, 1) = -pm_.Ts * k2_ / pm_.m;
        Je(2, 2) = 1.0 + pm_.Ts * s(0) / pm_.m;
        Je(3, 3) = 1.0 + pm_.Ts * s(1) / pm_.m;
        Ju = Eigen::MatrixXd::Zero(4, 2);
        Ju.block<2, 2>(2, 0) = (pm_.Ts / pm_.m) * Eigen::Matrix2d::Identity();
    }

    Eigen::MatrixXd worst_case_state_matrix() const override {
        return worst_case_linearization(pm_, k1_, k2_).first;
    }
    Eigen::MatrixXd input_matrix() const override {
        return worst_case_linearization(pm_, k1_, k2_).second;
    }

  private:
    PointMassParams pm_;
    double k1_, k2_;
    CircularReference ref_;
};

/// Time-invariant linear dynamics e+ = A e + B u (sanity scenario, oracles).
class LinearDynamics final : public ErrorDynamics {
  public:
    LinearDynamics(Eigen::MatrixXd A, Eigen::MatrixXd B) : A_(std::move(A)), B_(std::move(B)) {
        if (A_.rows() != A_.cols() || B_.rows() != A_.rows())
            throw std::invalid_argument("LinearDynamics: shape mismatch");
    }

    int state_dim() const override { return static_cast<int>(A_.rows()); }
    int input_dim() const override { return static_cast<int>(B_.cols()); }

    Eigen::VectorXd step(int, const Eigen::VectorXd& e, const Eigen::VectorXd& u) const override {
        check_dims(e, u);
        return A_ * e + B_ * u;
    }
    void jacobians(int, const Eigen::VectorXd& e, const Eigen::VectorXd& u,
                   Eigen::MatrixXd& Je, Eigen::MatrixXd& Ju) const override {
        check_dims(e, u);
        Je = A_;
        Ju = B_;
    }
    Eigen::MatrixXd worst_case_state_matrix() const override { return A_; }
    Eigen::MatrixXd input_matrix() const override { return B_; }

  private:
    Eigen::MatrixXd A_, B_;
};

/// Error system together with its certified input-to-state gain.
struct PlantModel {
    std::shared_ptr<const ErrorDynamics> dynamics;
    BoundedRealCertificate certificate;

    double gamma_hat() const { return certificate.gamma_hat; }
};

inline PlantModel certify_plant(std::shared_ptr<const ErrorDynamics> dyn) {
    const int n = dyn->state_dim();
    const Eigen::MatrixXd Bu = dyn->input_matrix();
    Eigen::MatrixXd B_bar(n, Bu.cols() + n);
    B_bar << Bu, Eigen::MatrixXd::Identity(n, n);
    PlantModel pm;
    pm.certificate = certify_gain_lmi(dyn->worst_case_state_matrix(), B_bar);
    pm.dynamics = std::move(dyn);
    return pm;
}

/// IMC residual: w_hat_t = x_t - f_{t-1}(x_{t-1}, u_{t-1}); at t = 0 the
/// convention w_0 = x_0 applies. Equals the true disturbance exactly when
/// the internal model matches the plant.
inline Eigen::VectorXd reconstruct_disturbance(const PlantModel& pm, int t, const Eigen::VectorXd& x_t,
                                               const Eigen::VectorXd& x_prev, const Eigen::VectorXd& u_prev) {
    if (t == 0) return x_t;
    return x_t - pm.dynamics->step(t - 1, x_prev, u_prev);
}

}  // namespace gainbudget
