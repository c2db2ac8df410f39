#pragma once

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace gainbudget {

/// Thrown when a certification problem has no solution (e.g., the plant
/// is not pre-stabilized and no finite gain bound exists).
struct InfeasibilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a simulation produces a non-finite state. Carries the step
/// index at which the blow-up was detected.
struct DivergenceError : std::runtime_error {
    int step;
    DivergenceError(const std::string& what, int step_)
        : std::runtime_error(what + " at step " + std::to_string(step_)), step(step_) {}
};

/// Round-trip-exact decimal formatting (17 significant digits).
inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

}  // namespace gainbudget
