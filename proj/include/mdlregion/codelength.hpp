#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace mdlregion {

// All codelengths are base-2 reals (bits). These functions are pure and are
// the only arithmetic used by the optimizers, so every consumer of the
// objective agrees bit-for-bit on ties.

namespace detail {

// log2(n!) for n = 0..20, taken from the exact integer factorials
// (20! = 2432902008176640000 still fits in 64 bits).
inline const double* log2_factorial_table() {
    static const auto table = [] {
        std::array<double, 21> t{};
        std::uint64_t f = 1;
        t[0] = 0.0;
        for (std::uint64_t n = 1; n <= 20; ++n) {
            f *= n;
            t[n] = std::log2(static_cast<double>(f));
        }
        return t;
    }();
    return table.data();
}

inline constexpr double kLog2E = 1.4426950408889634074;

}  // namespace detail

/// log2(n!) in bits. Exact table for n <= 20, log-gamma beyond.
inline double log_factorial(std::int64_t n) {
    if (n < 0) throw std::invalid_argument("log_factorial: negative argument");
    if (n <= 20) return detail::log2_factorial_table()[n];
    return std::lgamma(static_cast<double>(n) + 1.0) * detail::kLog2E;
}

/// log2 of the binomial coefficient C(n, k) in bits.
inline double log_binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || n < 0 || k > n)
        throw std::invalid_argument("log_binomial: require 0 <= k <= n");
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

/// log2 of the multiset coefficient C(n + k - 1, k): the number of ways to
/// select k elements from a dictionary of size n with repetition.
inline double log_multiset(std::int64_t n, std::int64_t k) {
    if (n < 1 || k < 0)
        throw std::invalid_argument("log_multiset: require n >= 1, k >= 0");
    return log_binomial(n + k - 1, k);
}

/// Bits to transmit a contiguous partition: a spanning tree of the adjacency
/// graph plus D-1 cuts among its N-1 edges.
inline double partition_cost(std::int64_t n_locations, std::int64_t n_clusters,
                             double spanning_tree_bits) {
    if (n_clusters < 1 || n_clusters > n_locations)
        throw std::invalid_argument("partition_cost: require 1 <= D <= N");
    return spanning_tree_bits + log_binomial(n_locations - 1, n_clusters - 1);
}

/// Bits to transmit all D driver series of length T over an alphabet of size S.
inline double driver_cost(std::int64_t n_clusters, std::int64_t series_length,
                          std::int64_t alphabet_size) {
    if (n_clusters < 1 || series_length < 1 || alphabet_size < 1)
        throw std::invalid_argument("driver_cost: require D, T, S >= 1");
    return static_cast<double>(n_clusters) * static_cast<double>(series_length) *
           std::log2(static_cast<double>(alphabet_size));
}

/// Bits to transmit the rows of a cluster's contingency table given the
/// driver marginals: sum_r log multiset(S, n_d * c_r).
inline double table_cost(std::span<const std::int64_t> driver_marginals,
                         std::int64_t cluster_size, std::int64_t alphabet_size) {
    if (cluster_size < 1) throw std::invalid_argument("table_cost: cluster_size < 1");
    double bits = 0.0;
    for (std::int64_t c_r : driver_marginals) {
        if (c_r < 0) throw std::invalid_argument("table_cost: negative marginal");
        bits += log_multiset(alphabet_size, cluster_size * c_r);
    }
    return bits;
}

/// Bits to transmit the member series given the driver and the contingency
/// table: sum over rows of the log multinomial coefficient.
/// `contingency` is a dense S x S table in row-major order, row = driver
/// symbol, column = member symbol.
inline double member_cost(std::span<const std::int64_t> contingency,
                          std::int64_t alphabet_size) {
    double bits = 0.0;
    for (std::int64_t r = 0; r < alphabet_size; ++r) {
        std::int64_t row_sum = 0;
        double row_bits = 0.0;
        for (std::int64_t s = 0; s < alphabet_size; ++s) {
            const std::int64_t c = contingency[r * alphabet_size + s];
            row_sum += c;
            row_bits -= log_factorial(c);
        }
        bits += log_factorial(row_sum) + row_bits;
    }
    return bits;
}

/// One evaluated description-length objective, split into its five terms.
struct CodelengthBreakdown {
    double spanning_tree_bits = 0.0;     // log |T(G)|
    double partition_choice_bits = 0.0;  // log C(N-1, D-1)
    double driver_bits = 0.0;            // D * T * log S
    double table_bits = 0.0;             // sum_d L(c^(dc) | C_d)
    double member_bits = 0.0;            // sum_d L(Z^(d) | C_d, c^(dc))
    double total_bits = 0.0;

    double components_sum() const {
        return spanning_tree_bits + partition_choice_bits + driver_bits +
               table_bits + member_bits;
    }
};

}  // namespace mdlregion
