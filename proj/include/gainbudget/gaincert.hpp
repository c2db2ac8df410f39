#pragma once

#include <Eigen/Core>
#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gainbudget/point_mass.hpp"
#include "gainbudget/rng.hpp"
#include "gainbudget/signal.hpp"
#include "gainbudget/util.hpp"

namespace gainbudget {

inline double spectral_radius(const Eigen::MatrixXd& A) {
    return Eigen::EigenSolver<Eigen::MatrixXd>(A, false).eigenvalues().cwiseAbs().maxCoeff();
}

inline double max_eigenvalue_sym(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

/// Left-hand side of the bounded-real inequality
///   [ A'PA - P + eta I   A'PB        ]
///   [ B'PA               B'PB - rho I ]  <= 0.
inline Eigen::MatrixXd bounded_real_block(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                          const Eigen::MatrixXd& P, double eta, double rho) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    Eigen::MatrixXd M(n + m, n + m);
    M.topLeftCorner(n, n) = A.transpose() * P * A - P + eta * Eigen::MatrixXd::Identity(n, n);
    M.topRightCorner(n, m) = A.transpose() * P * B;
    M.bottomLeftCorner(m, n) = M.topRightCorner(n, m).transpose();
    M.bottomRightCorner(m, m) = B.transpose() * P * B - rho * Eigen::MatrixXd::Identity(m, m);
    return M;
}

/// Fixed-point iteration for the Riccati-type equation
///   P = eta I + A'PA + A'PB (rho I - B'PB)^{-1} B'PA,
/// whose solution makes the bounded-real block negative semidefinite with the
/// Schur complement exactly zero. Returns nullopt when the level is
/// infeasible (supply matrix loses definiteness or the iterate diverges).
inline std::optional<Eigen::MatrixXd> dare_fixed_point(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                                       double eta, double rho, int max_iter = 30000,
                                                       double tol = 1e-14) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    const Eigen::MatrixXd In = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd Im = Eigen::MatrixXd::Identity(m, m);
    for (int k = 0; k < max_iter; ++k) {
        const Eigen::MatrixXd S = rho * Im - B.transpose() * P * B;
        Eigen::LLT<Eigen::MatrixXd> llt(S);
        if (llt.info() != Eigen::Success) return std::nullopt;
        const Eigen::MatrixXd BtPA = B.transpose() * P * A;
        Eigen::MatrixXd Pn = eta * In + A.transpose() * P * A + BtPA.transpose() * llt.solve(BtPA);
        Pn = 0.5 * (Pn + Pn.transpose()).eval();
        const double scale = Pn.cwiseAbs().maxCoeff();
        if (scale > 1e14) return std::nullopt;
        const double delta = (Pn - P).cwiseAbs().maxCoeff() / std::max(1.0, scale);
        P = Pn;
        if (delta < tol) return P;
    }
    return std::nullopt;  // no convergence: treat the level as infeasible
}

/// Storage certificate for one input channel of the error system.
struct ChannelCertificate {
    std::string name;    // "u" or "w"
    Eigen::MatrixXd P;
    double eta = 1.0;
    double rho = 0.0;
    double gamma = 0.0;  // certified channel gain
    double block_residual = 0.0;  // max eigenvalue of the bounded-real block
};

/// Bounded-real certificate for the pre-stabilized error dynamics.
///
/// gamma_hat certifies the sum-of-norms inequality
///   ||e||_2 <= gamma_hat (||w||_2 + ||u||_2)
/// and is obtained channelwise: each channel (u through B_u, w through the
/// identity) carries its own storage certificate, and superposition of the
/// linear responses combines them. (P, eta, rho) additionally certifies the
/// joint supply rho(|u_t|^2 + |w_{t+1}|^2) used by the pointwise dissipation
/// check; its block matrix is negative semidefinite within tolerance.
struct BoundedRealCertificate {
    Eigen::MatrixXd P;     // storage for the joint-supply inequality
    double eta = 1.0;
    double rho = 0.0;
    double c = 0.0;        // max(lambda_max(P), rho)
    double gamma_hat = 1.0;
    double block_residual = 0.0;
    std::vector<ChannelCertificate> channels;
};

namespace detail {

struct LevelCheck {
    bool require_storage_below_rho;  // lambda_max(P) <= rho (channels that absorb the initial state)
};

inline std::optional<ChannelCertificate> try_level(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                                   double gamma, const LevelCheck& chk) {
    const double rho = gamma * gamma;
    auto P = dare_fixed_point(A, B, 1.0, rho);
    if (!P) return std::nullopt;
    if (chk.require_storage_below_rho && max_eigenvalue_sym(*P) > rho * (1.0 + 1e-12)) return std::nullopt;
    const Eigen::MatrixXd M = bounded_real_block(A, B, *P, 1.0, rho);
    const double resid = max_eigenvalue_sym(M);
    if (resid > 1e-9 + 1e-14 * M.norm()) return std::nullopt;
    ChannelCertificate cert;
    cert.P = *P;
    cert.eta = 1.0;
    cert.rho = rho;
    cert.gamma = gamma;
    cert.block_residual = resid;
    return cert;
}

/// Geometric bisection of the gain level over [1, 1e6], 60 iterations.
inline ChannelCertificate bisect_channel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                         const std::string& name, const LevelCheck& chk) {
    double lo = 1.0, hi = 1e6;
    auto top = try_level(A, B, hi, chk);
    if (!top) throw InfeasibilityError("gain certification infeasible for channel " + name);
    ChannelCertificate best = *top;
    for (int it = 0; it < 60; ++it) {
        const double mid = std::sqrt(lo * hi);
        auto c = try_level(A, B, mid, chk);
        if (c) {
            hi = mid;
            best = *c;
        } else {
            lo = mid;
        }
    }
    best.name = name;
    return best;
}

}  // namespace detail

/// Certified upper bound on the l2-gain of e+ = A e + B_u u + w (with the
/// w_0 = e_0 convention), from the discrete-time bounded-real inequality.
/// B_bar must be [B_u I]. Throws InfeasibilityError when A is not Schur.
inline BoundedRealCertificate certify_gain_lmi(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B_bar) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n) throw std::invalid_argument("certify_gain_lmi: A must be square");
    if (B_bar.rows() != n || B_bar.cols() < n) throw std::invalid_argument("certify_gain_lmi: B_bar must be [B_u I]");
    const int m = static_cast<int>(B_bar.cols()) - n;
    if (!B_bar.rightCols(n).isApprox(Eigen::MatrixXd::Identity(n, n), 1e-12))
        throw std::invalid_argument("certify_gain_lmi: trailing block of B_bar must be the identity");
    if (spectral_radius(A) >= 1.0) throw InfeasibilityError("plant not pre-stabilized");

    BoundedRealCertificate cert;
    // w channel: its storage also absorbs the initial state via w_0 = e_0,
    // so lambda_max(P) is held below rho to keep gamma = sqrt(c/eta).
    cert.channels.push_back(detail::bisect_channel(A, Eigen::MatrixXd::Identity(n, n), "w",
                                                   {/*require_storage_below_rho=*/true}));
    if (m > 0) {
        // u channel responds from zero initial state; no storage constraint.
        cert.channels.push_back(detail::bisect_channel(A, B_bar.leftCols(m), "u",
                                                       {/*require_storage_below_rho=*/false}));
    }
    double g = 1.0;
    for (const auto& ch : cert.channels) g = std::max(g, ch.gamma);
    cert.gamma_hat = g;

    // Joint-supply triple for the pointwise dissipation inequality.
    const auto joint = detail::bisect_channel(A, B_bar, "joint", {/*require_storage_below_rho=*/true});
    cert.P = joint.P;
    cert.eta = joint.eta;
    cert.rho = joint.rho;
    cert.c = std::max(max_eigenvalue_sym(joint.P), joint.rho);
    cert.block_residual = joint.block_residual;
    return cert;
}

/// Pointwise dissipation check against the joint-supply triple:
///   V(e_{t+1}) - V(e_t) <= -eta |e_t|^2 + rho (|u_t|^2 + |w_{t+1}|^2) + tol.
inline bool storage_dissipation_check(const BoundedRealCertificate& cert, const Signal& e, const Signal& u,
                                      const Signal& w, double tol = 1e-8) {
    if (e.length() != w.length() || u.length() < e.length() - 1)
        throw std::invalid_argument("storage_dissipation_check: signal lengths inconsistent");
    for (int t = 0; t + 1 < e.length(); ++t) {
        const double V0 = e[t].dot(cert.P * e[t]);
        const double V1 = e[t + 1].dot(cert.P * e[t + 1]);
        const double supply = cert.rho * (u[t].squaredNorm() + w[t + 1].squaredNorm());
        if (V1 - V0 > -cert.eta * e[t].squaredNorm() + supply + tol) return false;
    }
    return true;
}

/// Empirical lower bound / certified upper bound pair.
struct GainEstimate {
    double lower = 0.0;
    double upper = 0.0;
    std::string method;
};

/// Empirical lower bound on the l2-gain of a causal operator: the best
/// output/input norm ratio over `trials` random unit-norm inputs plus one
/// deterministic constant probe (which exposes low-frequency peaks that
/// random excitation tends to miss).
inline double estimate_gain_empirical(const std::function<Signal(const Signal&)>& op, int input_dim,
                                      int trials, int horizon, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("estimate_gain_empirical: trials must be >= 1");
    const PNorm l2 = PNorm::l2();
    double lower = 0.0;
    Rng rng = make_rng(seed, "gain-probe");
    auto run_probe = [&](Signal in) {
        const double nin = norm(in, l2);
        if (nin <= 0.0) return;
        Signal out = op(in);
        lower = std::max(lower, norm(out, l2) / nin);
    };
    for (int k = 0; k < trials; ++k) {
        Signal in(input_dim, horizon + 1);
        for (int t = 0; t <= horizon; ++t) in.set(t, gaussian_vector(rng, input_dim));
        double nin = norm(in, l2);
        Signal scaled(input_dim, horizon + 1);
        for (int t = 0; t <= horizon; ++t) scaled.set(t, in[t] / nin);
        run_probe(scaled);
    }
    Signal dc(input_dim, horizon + 1);
    const Eigen::VectorXd step = Eigen::VectorXd::Ones(input_dim) /
                                 std::sqrt(static_cast<double>(input_dim) * (horizon + 1));
    for (int t = 0; t <= horizon; ++t) dc.set(t, step);
    run_probe(dc);
    return lower;
}

inline double worst_case_slope(const PointMassParams& p) { return -(p.b1 - p.b2); }

/// Discrete-time error-dynamics matrices of one pre-stabilized point mass
/// with the friction slope frozen at its least-damped value -(b1-b2).
/// State is (qx, qy, vx, vy); K' = diag(k1, k2) acts on the position error.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> worst_case_linearization(const PointMassParams& p,
                                                                            double k1, double k2) {
    p.validate();
    if (!(k1 > 0.0 && k2 > 0.0)) throw std::invalid_argument("worst_case_linearization: gains must be positive");
    const double s = worst_case_slope(p);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 4);
    A.topLeftCorner(2, 2).setIdentity();
    A.topRightCorner(2, 2) = p.Ts * Eigen::Matrix2d::Identity();
    A(2, 0) = -p.Ts * k1 / p.m;
    A(3, 1) = -p.Ts * k2 / p.m;
    A(2, 2) = 1.0 + p.Ts * s / p.m;
    A(3, 3) = 1.0 + p.Ts * s / p.m;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(4, 2);
    B(2, 0) = p.Ts / p.m;
    B(3, 1) = p.Ts / p.m;
    return {A, B};
}

/// Block-diagonal stacking for multi-agent systems.
inline Eigen::MatrixXd block_diag(const Eigen::MatrixXd& M, int copies) {
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(M.rows() * copies, M.cols() * copies);
    for (int k = 0; k < copies; ++k) R.block(k * M.rows(), k * M.cols(), M.rows(), M.cols()) = M;
    return R;
}

}  // namespace gainbudget
