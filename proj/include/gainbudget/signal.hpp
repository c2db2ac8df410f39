#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gainbudget/util.hpp"

namespace gainbudget {

enum class VectorNorm { Euclidean, Max };

/// Sequence-space norm choice: an lp exponent (p >= 1 or infinity) together
/// with the inner vector norm applied per time step.
struct PNorm {
    double p = 2.0;
    VectorNorm vector_norm = VectorNorm::Euclidean;

    PNorm() = default;
    PNorm(double p_, VectorNorm vn = VectorNorm::Euclidean) : p(p_), vector_norm(vn) {
        if (!(p >= 1.0) && !std::isinf(p)) throw std::invalid_argument("PNorm: p must be >= 1 or infinity");
    }

    static PNorm l1() { return PNorm(1.0); }
    static PNorm l2() { return PNorm(2.0); }
    static PNorm linf() { return PNorm(std::numeric_limits<double>::infinity()); }

    bool is_inf() const { return std::isinf(p); }

    /// Inner vector norm |v|.
    double vec(const Eigen::VectorXd& v) const {
        return vector_norm == VectorNorm::Euclidean ? v.norm() : v.lpNorm<Eigen::Infinity>();
    }
};

/// Finite-horizon vector-valued sequence v_0, ..., v_T. Infinite sequences
/// are represented by their truncation plus an implicit zero tail, so
/// extending a signal with zeros never changes any lp norm.
class Signal {
  public:
    Signal() : dim_(0) {}
    explicit Signal(int dim, int length = 0) : dim_(dim) {
        if (dim <= 0) throw std::invalid_argument("Signal: dim must be positive");
        values_.assign(static_cast<std::size_t>(length), Eigen::VectorXd::Zero(dim));
    }
    explicit Signal(std::vector<Eigen::VectorXd> values) {
        if (values.empty()) throw std::invalid_argument("Signal: empty value list");
        dim_ = static_cast<int>(values.front().size());
        for (const auto& v : values)
            if (v.size() != dim_) throw std::invalid_argument("Signal: inconsistent vector dimensions");
        values_ = std::move(values);
    }

    int dim() const { return dim_; }
    int length() const { return static_cast<int>(values_.size()); }
    bool empty() const { return values_.empty(); }

    const Eigen::VectorXd& operator[](int t) const { return values_.at(static_cast<std::size_t>(t)); }

    void push_back(const Eigen::VectorXd& v) {
        if (v.size() != dim_) throw std::invalid_argument("Signal: push_back dimension mismatch");
        values_.push_back(v);
    }
    void set(int t, const Eigen::VectorXd& v) {
        if (v.size() != dim_) throw std::invalid_argument("Signal: set dimension mismatch");
        values_.at(static_cast<std::size_t>(t)) = v;
    }

    /// Inclusive slice [a, b], reindexed from zero.
    Signal window(int a, int b) const {
        if (a < 0 || b < a || b >= length()) throw std::out_of_range("Signal::window: indices out of range");
        std::vector<Eigen::VectorXd> vals(values_.begin() + a, values_.begin() + b + 1);
        return Signal(std::move(vals));
    }

    void write_csv(std::ostream& os) const {
        os << "t";
        for (int j = 0; j < dim_; ++j) os << ",v_" << j;
        os << "\n";
        for (int t = 0; t < length(); ++t) {
            os << t;
            for (int j = 0; j < dim_; ++j) os << "," << format_double(values_[static_cast<std::size_t>(t)](j));
            os << "\n";
        }
    }
    void save_csv(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw std::runtime_error("Signal: cannot open " + path);
        write_csv(f);
    }
    static Signal read_csv(std::istream& is) {
        std::string line;
        if (!std::getline(is, line)) throw std::invalid_argument("Signal: empty csv");
        std::vector<Eigen::VectorXd> vals;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string cell;
            std::vector<double> row;
            while (std::getline(ss, cell, ',')) row.push_back(parse_double(cell));
            if (row.size() < 2) throw std::invalid_argument("Signal: malformed csv row");
            Eigen::VectorXd v(static_cast<int>(row.size()) - 1);
            for (std::size_t j = 1; j < row.size(); ++j) v(static_cast<int>(j - 1)) = row[j];
            vals.push_back(std::move(v));
        }
        return Signal(std::move(vals));
    }
    static Signal load_csv(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("Signal: cannot open " + path);
        return read_csv(f);
    }

  private:
    int dim_;
    std::vector<Eigen::VectorXd> values_;
};

inline Signal add(const Signal& a, const Signal& b) {
    if (a.dim() != b.dim() || a.length() != b.length())
        throw std::invalid_argument("add: signal shapes differ");
    std::vector<Eigen::VectorXd> vals;
    vals.reserve(static_cast<std::size_t>(a.length()));
    for (int t = 0; t < a.length(); ++t) vals.push_back(a[t] + b[t]);
    return Signal(std::move(vals));
}

/// Finite-horizon lp norm. Zero-padding the horizon does not change the value.
inline double norm(const Signal& s, const PNorm& pn) {
    if (s.empty()) throw std::invalid_argument("norm: empty signal");
    if (pn.is_inf()) {
        double m = 0.0;
        for (int t = 0; t < s.length(); ++t) m = std::max(m, pn.vec(s[t]));
        return m;
    }
    double acc = 0.0;
    for (int t = 0; t < s.length(); ++t) acc += std::pow(pn.vec(s[t]), pn.p);
    return std::pow(acc, 1.0 / pn.p);
}

/// For disjoint windows covering [0, T], sum_i ||window_i||_p^p equals
/// ||s||_p^p exactly. Returns (windowed sum, direct p-th power) so callers
/// can assert the identity.
inline std::pair<double, double> disjoint_window_norm_identity(const Signal& s,
                                                               const std::vector<int>& boundaries,
                                                               const PNorm& pn) {
    if (pn.is_inf()) throw std::invalid_argument("disjoint_window_norm_identity: requires finite p");
    if (boundaries.empty() || boundaries.front() != 0)
        throw std::invalid_argument("disjoint_window_norm_identity: boundaries must start at 0");
    for (std::size_t i = 1; i < boundaries.size(); ++i)
        if (boundaries[i] <= boundaries[i - 1])
            throw std::invalid_argument("disjoint_window_norm_identity: boundaries must be strictly increasing");
    if (boundaries.back() > s.length() - 1)
        throw std::invalid_argument("disjoint_window_norm_identity: boundary beyond horizon");

    double windowed = 0.0;
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        const int a = boundaries[i];
        const int b = (i + 1 < boundaries.size()) ? boundaries[i + 1] - 1 : s.length() - 1;
        windowed += std::pow(norm(s.window(a, b), pn), pn.p);
    }
    return {windowed, std::pow(norm(s, pn), pn.p)};
}

}  // namespace gainbudget
