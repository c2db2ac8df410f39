#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gainbudget/signal.hpp"

namespace gainbudget {

/// Time-indexed budget profile r_t with a geometric tail past the recorded
/// horizon, so the full sequence lies in lp for every finite p.
struct BudgetProfile {
    std::vector<double> values;
    double tail_ratio = 0.9;

    double at(int t) const {
        if (values.empty()) return 0.0;
        if (t < 0) throw std::out_of_range("BudgetProfile: negative time");
        const int T = static_cast<int>(values.size()) - 1;
        if (t <= T) return values[static_cast<std::size_t>(t)];
        return values.back() * std::pow(tail_ratio, t - T);
    }
};

/// Appendix-style budget design from a nominal rollout: r_t = rho |x~_t|,
/// extended geometrically. Online, the budget consumed by an update at time
/// t_i is the profile value at t_i.
inline BudgetProfile design_budget_from_nominal(const Signal& nominal_x, double rho, double tail_ratio,
                                                const PNorm& inner = PNorm::l2()) {
    if (!(rho >= 0.0)) throw std::invalid_argument("design_budget_from_nominal: rho must be >= 0");
    if (!(tail_ratio > 0.0 && tail_ratio < 1.0))
        throw std::invalid_argument("design_budget_from_nominal: tail_ratio must be in (0,1)");
    BudgetProfile p;
    p.tail_ratio = tail_ratio;
    p.values.reserve(static_cast<std::size_t>(nominal_x.length()));
    for (int t = 0; t < nominal_x.length(); ++t) p.values.push_back(rho * inner.vec(nominal_x[t]));
    return p;
}

/// ISS schedule r^(i) = d^(i) gamma_F (gamma_M0 + 1) |x0| + g ||w||_inf for
/// a strictly decreasing d with d^(0) >= 1 and limit 0. Entry [i] of the
/// returned vector is r^(i); index 0 is filled for convenience but the
/// schedule applies from i = 1.
inline std::vector<double> iss_budget_schedule(double x0_norm, double gamma_F, double gamma_M0,
                                               const std::vector<double>& d, double g, double w_inf_bound) {
    if (d.size() < 2) throw std::invalid_argument("iss_budget_schedule: need at least two schedule entries");
    if (!(d.front() >= 1.0)) throw std::invalid_argument("iss_budget_schedule: d[0] must be >= 1");
    for (std::size_t i = 1; i < d.size(); ++i)
        if (!(d[i] < d[i - 1]) || !(d[i] > 0.0))
            throw std::invalid_argument("iss_budget_schedule: d must be positive and strictly decreasing");
    if (!(g > 0.0)) throw std::invalid_argument("iss_budget_schedule: g must be positive");
    const double D = gamma_F * (gamma_M0 + 1.0);
    std::vector<double> r(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) r[i] = d[i] * D * x0_norm + g * w_inf_bound;
    return r;
}

/// Gain budget governing when controller updates are admissible.
struct UpdateBudget {
    enum class Kind { Profile, Index, Iss };

    PNorm pn = PNorm::l2();
    double gamma_F_hat = 1.0;  // certified plant gain
    double gamma_bar = 1.0;    // uniform policy gain cap
    Kind kind = Kind::Profile;

    BudgetProfile profile;            // Kind::Profile
    std::vector<double> index_values; // Kind::Index: r^(i) by update index (i >= 1)
    std::vector<double> eps_values;   // optional explicit thresholds by index

    // Kind::Iss
    std::vector<double> d_schedule;
    double iss_g = 1.0;
    double iss_w_inf = 0.0;
    double iss_x0_norm = 0.0;
    double iss_gamma_M0 = 0.0;
    int t_opt = 1;

    /// Budget granted to an attempt at time t that would consume update
    /// index i (1-based). Rejected attempts do not consume indices; profile
    /// budgets are looked up by the attempt time, ISS schedules by the
    /// scheduled slot t / t_opt.
    double r_for_attempt(int t, int i) const {
        switch (kind) {
            case Kind::Profile:
                return profile.at(t);
            case Kind::Index: {
                if (i < 1) throw std::invalid_argument("UpdateBudget: update index must be >= 1");
                const std::size_t k = static_cast<std::size_t>(i);
                if (k < index_values.size()) return index_values[k];
                return index_values.empty() ? 0.0 : index_values.back();
            }
            case Kind::Iss: {
                const int slot = t / t_opt;
                std::vector<double> r = iss_budget_schedule(iss_x0_norm, gamma_F_hat, iss_gamma_M0,
                                                            d_schedule, iss_g, iss_w_inf);
                const std::size_t k = static_cast<std::size_t>(std::min<int>(slot, static_cast<int>(r.size()) - 1));
                return r[k];
            }
        }
        return 0.0;
    }

    double eps_for_index(int i) const {
        if (i < 1 || static_cast<std::size_t>(i) >= eps_values.size())
            throw std::out_of_range("UpdateBudget: no explicit threshold for this index");
        return eps_values[static_cast<std::size_t>(i)];
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["schema_version"] = 1;
        j["p"] = pn.is_inf() ? nlohmann::json("inf") : nlohmann::json(pn.p);
        j["vector_norm"] = pn.vector_norm == VectorNorm::Euclidean ? "euclidean" : "max";
        j["gamma_F_hat"] = gamma_F_hat;
        j["gamma_bar"] = gamma_bar;
        switch (kind) {
            case Kind::Profile:
                j["kind"] = "profile";
                j["profile_values"] = profile.values;
                j["tail_ratio"] = profile.tail_ratio;
                break;
            case Kind::Index:
                j["kind"] = "index";
                j["index_values"] = index_values;
                break;
            case Kind::Iss:
                j["kind"] = "iss";
                j["d_schedule"] = d_schedule;
                j["g"] = iss_g;
                j["w_inf_bound"] = iss_w_inf;
                j["x0_norm"] = iss_x0_norm;
                j["gamma_M0"] = iss_gamma_M0;
                j["t_opt"] = t_opt;
                break;
        }
        return j;
    }

    static UpdateBudget from_json(const nlohmann::json& j) {
        UpdateBudget b;
        const auto& p = j.at("p");
        const double pval = p.is_string() ? std::numeric_limits<double>::infinity() : p.get<double>();
        const VectorNorm vn = j.value("vector_norm", "euclidean") == std::string("max")
                                  ? VectorNorm::Max
                                  : VectorNorm::Euclidean;
        b.pn = PNorm(pval, vn);
        b.gamma_F_hat = j.at("gamma_F_hat").get<double>();
        b.gamma_bar = j.at("gamma_bar").get<double>();
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "profile") {
            b.kind = Kind::Profile;
            b.profile.values = j.at("profile_values").get<std::vector<double>>();
            b.profile.tail_ratio = j.at("tail_ratio").get<double>();
        } else if (kind == "index") {
            b.kind = Kind::Index;
            b.index_values = j.at("index_values").get<std::vector<double>>();
        } else if (kind == "iss") {
            b.kind = Kind::Iss;
            b.d_schedule = j.at("d_schedule").get<std::vector<double>>();
            b.iss_g = j.at("g").get<double>();
            b.iss_w_inf = j.at("w_inf_bound").get<double>();
            b.iss_x0_norm = j.at("x0_norm").get<double>();
            b.iss_gamma_M0 = j.at("gamma_M0").get<double>();
            b.t_opt = j.at("t_opt").get<int>();
        } else {
            throw std::invalid_argument("UpdateBudget: unknown kind '" + kind + "'");
        }
        return b;
    }
};

}  // namespace gainbudget
