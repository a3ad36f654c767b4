#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdlregion/cluster_state.hpp"
#include "mdlregion/optimizer.hpp"
#include "mdlregion/spanning_tree.hpp"

namespace mdlregion {

inline constexpr int kMaxExactNodes = 12;

namespace detail {

inline void check_exact_guard(std::size_t n, const char* where) {
    if (n == 0) throw std::runtime_error(std::string(where) + ": empty graph");
    if (n > static_cast<std::size_t>(kMaxExactNodes))
        throw std::runtime_error(std::string(where) + ": N=" + std::to_string(n) +
                                 " exceeds the exact-enumeration guard (N <= " +
                                 std::to_string(kMaxExactNodes) +
                                 "); the number of connected partitions grows too fast for "
                                 "exhaustive search");
}

inline std::vector<std::uint32_t> adjacency_masks(const SpatialGraph& g) {
    std::vector<std::uint32_t> adj(g.n_nodes(), 0);
    for (NodeId u = 0; u < g.n_nodes(); ++u)
        for (NodeId v : g.neighbors(u)) adj[u] |= (1u << v);
    return adj;
}

inline bool mask_connected(std::uint32_t mask, const std::vector<std::uint32_t>& adj) {
    if (mask == 0) return false;
    const std::uint32_t start = mask & (~mask + 1);
    std::uint32_t reach = start;
    for (;;) {
        std::uint32_t grown = reach;
        std::uint32_t scan = reach;
        while (scan) {
            const int i = std::countr_zero(scan);
            scan &= scan - 1;
            grown |= adj[i] & mask;
        }
        if (grown == reach) break;
        reach = grown;
    }
    return reach == mask;
}

}  // namespace detail

/// Visits every partition of the nodes into connected induced subgraphs
/// exactly once. The smallest unassigned node seeds each new block, so the
/// emitted labels are already canonical (1..D by smallest member). N <= 12.
template <typename Visitor>
void enumerate_connected_partitions(const SpatialGraph& g, Visitor&& visit) {
    const std::size_t n = g.n_nodes();
    detail::check_exact_guard(n, "enumerate_connected_partitions");
    const auto adj = detail::adjacency_masks(g);
    const auto full = static_cast<std::uint32_t>((1u << n) - 1);

    std::vector<char> connected(1u << n, 0);
    for (std::uint32_t m = 1; m <= full; ++m)
        connected[m] = detail::mask_connected(m, adj);

    std::vector<std::uint32_t> labels(n, 0);
    const auto rec = [&](auto&& self, std::uint32_t unassigned, std::uint32_t next_label) -> void {
        if (unassigned == 0) {
            visit(std::span<const std::uint32_t>(labels));
            return;
        }
        const std::uint32_t seed = unassigned & (~unassigned + 1);
        const std::uint32_t rest = unassigned ^ seed;
        for (std::uint32_t s = rest;; s = (s - 1) & rest) {
            const std::uint32_t block = s | seed;
            if (connected[block]) {
                std::uint32_t scan = block;
                while (scan) {
                    const int i = std::countr_zero(scan);
                    scan &= scan - 1;
                    labels[i] = next_label;
                }
                self(self, unassigned ^ block, next_label + 1);
            }
            if (s == 0) break;
        }
    };
    rec(rec, full, 1);
}

/// Global minimizer of the objective over every connected partition, by
/// exhaustive enumeration with per-block cost memoization. Ties go to fewer
/// clusters, then lexicographically smaller labels. N <= 12.
inline Partition exact_regionalize(const SymbolMatrix& z, const SpatialGraph& g) {
    const std::size_t n = z.n_series();
    detail::check_exact_guard(n, "exact_regionalize");
    if (g.n_nodes() != n) throw std::runtime_error("exact_regionalize: z and g disagree on N");
    if (!is_connected(g)) throw std::runtime_error("exact_regionalize: graph is disconnected");

    const double st_bits = log_spanning_tree_count(g);
    const auto t_len = static_cast<std::int64_t>(z.series_length());
    const int s_size = z.alphabet_size();
    const auto n64 = static_cast<std::int64_t>(n);

    std::vector<double> block_cost(std::size_t{1} << n,
                                   std::numeric_limits<double>::quiet_NaN());
    std::vector<std::uint32_t> counts;
    const auto cost_of_block = [&](std::uint32_t mask) {
        double& slot = block_cost[mask];
        if (!std::isnan(slot)) return slot;
        counts.assign(static_cast<std::size_t>(t_len) * s_size, 0);
        std::uint32_t scan = mask;
        while (scan) {
            const int i = std::countr_zero(scan);
            scan &= scan - 1;
            for (std::int64_t t = 0; t < t_len; ++t) ++counts[t * s_size + (z(i, t) - 1)];
        }
        const auto driver = majority_vote_driver(counts, static_cast<std::size_t>(t_len), s_size);
        slot = cluster_cost_for_driver(driver, counts, std::popcount(mask), s_size);
        return slot;
    };

    bool have_best = false;
    double best_bits = 0.0;
    std::vector<std::uint32_t> best_labels;
    std::vector<std::uint32_t> block_of_label;

    enumerate_connected_partitions(g, [&](std::span<const std::uint32_t> part) {
        std::uint32_t d32 = 0;
        for (std::uint32_t l : part) d32 = std::max(d32, l);
        block_of_label.assign(d32, 0);
        for (std::size_t i = 0; i < n; ++i) block_of_label[part[i] - 1] |= (1u << i);
        double cluster_bits = 0.0;
        for (std::uint32_t mask : block_of_label) cluster_bits += cost_of_block(mask);
        const auto d = static_cast<std::int64_t>(d32);
        const double total = st_bits + log_binomial(n64 - 1, d - 1) +
                             driver_cost(d, t_len, s_size) + cluster_bits;
        const bool better = [&] {
            if (!have_best || total < best_bits) return true;
            if (total > best_bits) return false;
            const auto best_d = static_cast<std::int64_t>(
                *std::max_element(best_labels.begin(), best_labels.end()));
            if (d != best_d) return d < best_d;
            return std::lexicographical_compare(part.begin(), part.end(), best_labels.begin(),
                                                best_labels.end());
        }();
        if (better) {
            have_best = true;
            best_bits = total;
            best_labels.assign(part.begin(), part.end());
        }
    });

    return evaluate_partition(z, g, best_labels, st_bits);
}

}  // namespace mdlregion
