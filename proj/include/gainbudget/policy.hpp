#pragma once

#include <Eigen/Core>
#include <Eigen/SVD>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "gainbudget/rng.hpp"
#include "gainbudget/signal.hpp"

namespace gainbudget {

inline double spectral_norm(const Eigen::MatrixXd& M) {
    if (M.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
}

/// Recurrent causal operator with a certified l2-gain bound:
///   xi_{t+1} = tanh(W_rec xi_t + W_in z_t),  u_t = W_out xi_{t+1},
/// biasless so that zero input from zero state yields zero output. With
/// ||W_in|| <= s_in, ||W_rec|| <= s_rec < 1, ||W_out|| <= s_out and tanh
/// 1-Lipschitz, the contraction loop sums to the constructive gain bound
///   gamma = s_out s_in / (1 - s_rec),
/// valid for every lp norm in time (Young's inequality for the convolution
/// with the geometric kernel s_rec^k), so one certificate serves p = 2 and
/// p = infinity alike.
class GainBoundedPolicy {
  public:
    GainBoundedPolicy() = default;

    GainBoundedPolicy(int input_dim, int hidden_dim, int output_dim, double gamma_bar, double s_rec = 0.8)
        : in_(input_dim), hidden_(hidden_dim), out_(output_dim), gamma_bar_(gamma_bar), s_rec_(s_rec) {
        if (input_dim < 1 || hidden_dim < 1 || output_dim < 1)
            throw std::invalid_argument("GainBoundedPolicy: dimensions must be positive");
        if (!(gamma_bar > 0.0)) throw std::invalid_argument("GainBoundedPolicy: gamma_bar must be positive");
        if (!(s_rec >= 0.0 && s_rec < 1.0)) throw std::invalid_argument("GainBoundedPolicy: requires 0 <= s_rec < 1");
        // balanced split of the gain budget between the input and output maps
        s_in_ = s_out_ = std::sqrt(gamma_bar * (1.0 - s_rec));
        s_out_eff_ = s_out_;
        W_in_ = Eigen::MatrixXd::Zero(hidden_, in_);
        W_rec_ = Eigen::MatrixXd::Zero(hidden_, hidden_);
        W_out_ = Eigen::MatrixXd::Zero(out_, hidden_);
        state_ = Eigen::VectorXd::Zero(hidden_);
    }

    /// Random orthogonal-ish start scaled to 10% of each cap: small initial
    /// control action, well inside the feasible set.
    static GainBoundedPolicy random_init(int input_dim, int hidden_dim, int output_dim, double gamma_bar,
                                         Rng& rng, double s_rec = 0.8) {
        GainBoundedPolicy p(input_dim, hidden_dim, output_dim, gamma_bar, s_rec);
        auto scaled = [&](int r, int c, double cap) {
            Eigen::MatrixXd M = gaussian_matrix(rng, r, c);
            const double nrm = spectral_norm(M);
            if (nrm > 0.0) M *= 0.1 * cap / nrm;
            return M;
        };
        p.W_in_ = scaled(hidden_dim, input_dim, p.s_in_);
        p.W_rec_ = scaled(hidden_dim, hidden_dim, p.s_rec_);
        p.W_out_ = scaled(output_dim, hidden_dim, p.s_out_);
        return p;
    }

    int input_dim() const { return in_; }
    int hidden_dim() const { return hidden_; }
    int output_dim() const { return out_; }
    double gamma_bar() const { return gamma_bar_; }
    double s_in() const { return s_in_; }
    double s_rec() const { return s_rec_; }
    double s_out_eff() const { return s_out_eff_; }

    const Eigen::MatrixXd& W_in() const { return W_in_; }
    const Eigen::MatrixXd& W_rec() const { return W_rec_; }
    const Eigen::MatrixXd& W_out() const { return W_out_; }
    const Eigen::VectorXd& internal_state() const { return state_; }

    void reset() { state_.setZero(); }

    Eigen::VectorXd step(const Eigen::VectorXd& z) {
        if (z.size() != in_) throw std::invalid_argument("GainBoundedPolicy::step: input dimension mismatch");
        state_ = (W_rec_ * state_ + W_in_ * z).array().tanh();
        return W_out_ * state_;
    }

    double certified_gain() const {
        if (s_rec_ >= 1.0) throw std::invalid_argument("GainBoundedPolicy: s_rec >= 1 has no finite gain bound");
        return s_out_eff_ * s_in_ / (1.0 - s_rec_);
    }

    /// Rescale the maps so that certified_gain() <= gamma_req. Each matrix
    /// is shrunk only if over its cap; the output cap absorbs any remaining
    /// excess. Idempotent, and a no-op on feasible parameters.
    void project(double gamma_req) {
        if (!(gamma_req >= 0.0)) throw std::invalid_argument("GainBoundedPolicy::project: gamma_req must be >= 0");
        clip(W_in_, s_in_);
        clip(W_rec_, s_rec_);
        const double bound = certified_gain();
        if (bound > gamma_req) {
            s_out_eff_ *= gamma_req / bound;
            // the rescaled product may round one ulp above the target
            while (certified_gain() > gamma_req) s_out_eff_ = std::nextafter(s_out_eff_, 0.0);
        }
        clip(W_out_, s_out_eff_);
    }

    /// Copy of the parameters with the output cap restored to its structural
    /// value, so a retrained policy may use gain headroom up to gamma_bar.
    GainBoundedPolicy with_fresh_caps() const {
        GainBoundedPolicy p = *this;
        p.s_out_eff_ = p.s_out_;
        p.reset();
        return p;
    }

    int param_count() const { return hidden_ * in_ + hidden_ * hidden_ + out_ * hidden_; }

    Eigen::VectorXd theta() const {
        Eigen::VectorXd th(param_count());
        int k = 0;
        auto put = [&](const Eigen::MatrixXd& M) {
            for (int i = 0; i < M.rows(); ++i)
                for (int j = 0; j < M.cols(); ++j) th(k++) = M(i, j);
        };
        put(W_in_);
        put(W_rec_);
        put(W_out_);
        return th;
    }

    void set_theta(const Eigen::VectorXd& th) {
        if (th.size() != param_count()) throw std::invalid_argument("GainBoundedPolicy::set_theta: size mismatch");
        int k = 0;
        auto take = [&](Eigen::MatrixXd& M) {
            for (int i = 0; i < M.rows(); ++i)
                for (int j = 0; j < M.cols(); ++j) M(i, j) = th(k++);
        };
        take(W_in_);
        take(W_rec_);
        take(W_out_);
    }

    // mutable access for the trainer
    Eigen::MatrixXd& mutable_W_in() { return W_in_; }
    Eigen::MatrixXd& mutable_W_rec() { return W_rec_; }
    Eigen::MatrixXd& mutable_W_out() { return W_out_; }

    /// Evaluate this policy (from zero state) as a signal operator.
    std::function<Signal(const Signal&)> as_operator() const {
        GainBoundedPolicy copy = *this;
        return [copy](const Signal& z) mutable {
            copy.reset();
            Signal u(copy.out_, 0);
            for (int t = 0; t < z.length(); ++t) u.push_back(copy.step(z[t]));
            return u;
        };
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["schema_version"] = 1;
        j["input_dim"] = in_;
        j["hidden_dim"] = hidden_;
        j["output_dim"] = out_;
        j["gamma_bar"] = gamma_bar_;
        j["s_in"] = s_in_;
        j["s_rec"] = s_rec_;
        j["s_out"] = s_out_;
        j["s_out_eff"] = s_out_eff_;
        const Eigen::VectorXd th = theta();
        j["theta"] = std::vector<double>(th.data(), th.data() + th.size());
        return j;
    }

    static GainBoundedPolicy from_json(const nlohmann::json& j) {
        GainBoundedPolicy p(j.at("input_dim").get<int>(), j.at("hidden_dim").get<int>(),
                            j.at("output_dim").get<int>(), j.at("gamma_bar").get<double>(),
                            j.at("s_rec").get<double>());
        p.s_in_ = j.at("s_in").get<double>();
        p.s_out_ = j.at("s_out").get<double>();
        p.s_out_eff_ = j.at("s_out_eff").get<double>();
        const auto th = j.at("theta").get<std::vector<double>>();
        p.set_theta(Eigen::Map<const Eigen::VectorXd>(th.data(), static_cast<int>(th.size())));
        return p;
    }

  private:
    static void clip(Eigen::MatrixXd& M, double cap) {
        const double nrm = spectral_norm(M);
        if (nrm > cap) M *= (cap <= 0.0) ? 0.0 : cap / nrm;
    }

    int in_ = 0, hidden_ = 0, out_ = 0;
    double gamma_bar_ = 1.0;
    double s_in_ = 0.0, s_rec_ = 0.8, s_out_ = 0.0;
    double s_out_eff_ = 0.0;
    Eigen::MatrixXd W_in_, W_rec_, W_out_;
    Eigen::VectorXd state_;
};

}  // namespace gainbudget
