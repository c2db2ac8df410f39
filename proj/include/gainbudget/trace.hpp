#pragma once

#include <Eigen/Core>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gainbudget/signal.hpp"
#include "gainbudget/util.hpp"

namespace gainbudget {

/// One executed step: state, applied input, realized disturbance, IMC
/// reconstruction, active segment index, and stage cost. By the w_0 = x_0
/// convention the stored disturbance at t = 0 is the initial state.
struct TraceStep {
    int t = 0;
    Eigen::VectorXd x, u, w, w_hat;
    int segment = 0;
    double stage_cost = 0.0;
};

class ClosedLoopTrace {
  public:
    ClosedLoopTrace() = default;
    ClosedLoopTrace(int state_dim, int input_dim) : n_(state_dim), m_(input_dim) {}

    int state_dim() const { return n_; }
    int input_dim() const { return m_; }
    int length() const { return static_cast<int>(steps_.size()); }
    const TraceStep& operator[](int t) const { return steps_.at(static_cast<std::size_t>(t)); }
    const std::vector<TraceStep>& steps() const { return steps_; }

    void push_back(TraceStep s) {
        if (s.x.size() != n_ || s.u.size() != m_ || s.w.size() != n_ || s.w_hat.size() != n_)
            throw std::invalid_argument("ClosedLoopTrace: dimension mismatch");
        steps_.push_back(std::move(s));
    }

    double total_cost() const {
        double acc = 0.0;
        for (const auto& s : steps_) acc += s.stage_cost;
        return acc;
    }

    Signal states() const { return extract([](const TraceStep& s) { return s.x; }); }
    Signal inputs() const { return extract([](const TraceStep& s) { return s.u; }); }
    Signal disturbances() const { return extract([](const TraceStep& s) { return s.w; }); }
    Signal reconstructions() const { return extract([](const TraceStep& s) { return s.w_hat; }); }

    void write_csv(std::ostream& os) const {
        os << "t";
        for (int j = 0; j < n_; ++j) os << ",x_" << j;
        for (int j = 0; j < m_; ++j) os << ",u_" << j;
        for (int j = 0; j < n_; ++j) os << ",w_" << j;
        for (int j = 0; j < n_; ++j) os << ",what_" << j;
        os << ",segment,stage_cost\n";
        for (const auto& s : steps_) {
            os << s.t;
            auto emit = [&](const Eigen::VectorXd& v) {
                for (int j = 0; j < v.size(); ++j) os << "," << format_double(v(j));
            };
            emit(s.x);
            emit(s.u);
            emit(s.w);
            emit(s.w_hat);
            os << "," << s.segment << "," << format_double(s.stage_cost) << "\n";
        }
    }
    void save_csv(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw std::runtime_error("ClosedLoopTrace: cannot open " + path);
        write_csv(f);
    }

    static ClosedLoopTrace read_csv(std::istream& is) {
        std::string header;
        if (!std::getline(is, header)) throw std::invalid_argument("ClosedLoopTrace: empty csv");
        int n = 0, m = 0;
        {
            std::stringstream ss(header);
            std::string col;
            while (std::getline(ss, col, ',')) {
                if (col.rfind("x_", 0) == 0) ++n;
                if (col.rfind("u_", 0) == 0) ++m;
            }
        }
        if (n == 0) throw std::invalid_argument("ClosedLoopTrace: malformed header");
        ClosedLoopTrace tr(n, m);
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string cell;
            std::vector<std::string> cells;
            while (std::getline(ss, cell, ',')) cells.push_back(cell);
            const std::size_t expect = 1 + static_cast<std::size_t>(3 * n + m) + 2;
            if (cells.size() != expect) throw std::invalid_argument("ClosedLoopTrace: malformed row");
            TraceStep s;
            std::size_t k = 0;
            s.t = static_cast<int>(parse_double(cells[k++]));
            auto grab = [&](int len) {
                Eigen::VectorXd v(len);
                for (int j = 0; j < len; ++j) v(j) = parse_double(cells[k++]);
                return v;
            };
            s.x = grab(n);
            s.u = grab(m);
            s.w = grab(n);
            s.w_hat = grab(n);
            s.segment = static_cast<int>(parse_double(cells[k++]));
            s.stage_cost = parse_double(cells[k++]);
            tr.push_back(std::move(s));
        }
        return tr;
    }
    static ClosedLoopTrace load_csv(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("ClosedLoopTrace: cannot open " + path);
        return read_csv(f);
    }

  private:
    template <typename F>
    Signal extract(F field) const {
        if (steps_.empty()) throw std::invalid_argument("ClosedLoopTrace: empty trace");
        std::vector<Eigen::VectorXd> vals;
        vals.reserve(steps_.size());
        for (const auto& s : steps_) vals.push_back(field(s));
        return Signal(std::move(vals));
    }

    int n_ = 0, m_ = 0;
    std::vector<TraceStep> steps_;
};

}  // namespace gainbudget
