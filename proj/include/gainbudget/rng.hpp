#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string_view>

namespace gainbudget {

using Rng = std::mt19937_64;

inline std::uint64_t hash_tag(std::string_view tag) {
    // FNV-1a, used only to derive named substreams from a base seed
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Deterministic substream keyed by (seed, tag, index). Every consumer of
/// randomness in a run owns one of these, so runs are reproducible and
/// independent of execution order.
inline Rng make_rng(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
    const std::uint64_t t = hash_tag(tag);
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(t),    static_cast<std::uint32_t>(t >> 32),
        static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

inline Eigen::VectorXd gaussian_vector(Rng& rng, int n, double stddev = 1.0) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = stddev * dist(rng);
    return v;
}

inline Eigen::MatrixXd gaussian_matrix(Rng& rng, int rows, int cols, double stddev = 1.0) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = stddev * dist(rng);
    return m;
}

}  // namespace gainbudget
