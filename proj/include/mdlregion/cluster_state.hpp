#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "mdlregion/codelength.hpp"
#include "mdlregion/spatial_graph.hpp"
#include "mdlregion/symbol_matrix.hpp"

namespace mdlregion {

/// Per-cluster sufficient statistics: per-time symbol counts, the majority
/// driver, its marginals, and the driver/member contingency table. cached_cost
/// holds table_cost + member_cost so merge evaluation never rescans members.
struct ClusterState {
    std::vector<NodeId> members;               // sorted node ids
    std::vector<std::uint32_t> time_symbol_counts;  // T x S row-major: m_ts
    std::vector<Symbol> driver;                // length T, symbols 1..S
    std::vector<std::int64_t> driver_marginals;  // length S: c_r
    std::vector<std::int64_t> contingency;       // S x S row-major: c_rs
    double cached_cost = 0.0;
    int alphabet_size = 1;

    std::size_t size() const { return members.size(); }
    std::size_t series_length() const { return driver.size(); }
};

/// Per-time majority vote over the count table; ties go to the smallest
/// symbol. Throws if some time step has no observations.
inline std::vector<Symbol> majority_vote_driver(std::span<const std::uint32_t> counts,
                                                std::size_t series_length, int alphabet_size) {
    std::vector<Symbol> driver(series_length);
    for (std::size_t t = 0; t < series_length; ++t) {
        const std::uint32_t* row = counts.data() + t * alphabet_size;
        int best = 0;
        std::uint32_t best_count = row[0];
        for (int s = 1; s < alphabet_size; ++s)
            if (row[s] > best_count) {
                best = s;
                best_count = row[s];
            }
        if (best_count == 0)
            throw std::runtime_error("majority_vote_driver: empty count row");
        driver[t] = static_cast<Symbol>(best + 1);
    }
    return driver;
}

/// table_cost + member_cost of a cluster for a given driver, rebuilt from the
/// count table. Also the arithmetic behind cached_cost.
inline double cluster_cost_for_driver(std::span<const Symbol> driver,
                                      std::span<const std::uint32_t> counts,
                                      std::int64_t cluster_size, int alphabet_size,
                                      std::vector<std::int64_t>* marginals_out = nullptr,
                                      std::vector<std::int64_t>* contingency_out = nullptr) {
    const std::size_t series_length = driver.size();
    std::vector<std::int64_t> marginals(alphabet_size, 0);
    std::vector<std::int64_t> contingency(
        static_cast<std::size_t>(alphabet_size) * alphabet_size, 0);
    for (std::size_t t = 0; t < series_length; ++t) {
        const int r = driver[t] - 1;
        ++marginals[r];
        const std::uint32_t* row = counts.data() + t * alphabet_size;
        std::int64_t* crow = contingency.data() + static_cast<std::size_t>(r) * alphabet_size;
        for (int s = 0; s < alphabet_size; ++s) crow[s] += row[s];
    }
    const double bits = table_cost(marginals, cluster_size, alphabet_size) +
                        member_cost(contingency, alphabet_size);
    if (marginals_out) *marginals_out = std::move(marginals);
    if (contingency_out) *contingency_out = std::move(contingency);
    return bits;
}

/// Recomputes driver, marginals, contingency and cached_cost from members
/// and the count table. The merged driver can differ from both parents at any
/// time step, so merges rebuild rather than patch.
inline void refresh_cluster_state(ClusterState& st) {
    const std::size_t series_length = st.time_symbol_counts.size() / st.alphabet_size;
    st.driver = majority_vote_driver(st.time_symbol_counts, series_length, st.alphabet_size);
    st.cached_cost =
        cluster_cost_for_driver(st.driver, st.time_symbol_counts, static_cast<std::int64_t>(st.size()),
                                st.alphabet_size, &st.driver_marginals, &st.contingency);
}

/// One singleton ClusterState per series. Every singleton has a diagonal
/// contingency table and member cost zero.
inline std::vector<ClusterState> init_singletons(const SymbolMatrix& z) {
    const std::size_t n = z.n_series(), t_len = z.series_length();
    const int s_size = z.alphabet_size();
    std::vector<ClusterState> states(n);
    for (std::size_t i = 0; i < n; ++i) {
        ClusterState& st = states[i];
        st.alphabet_size = s_size;
        st.members = {static_cast<NodeId>(i)};
        st.time_symbol_counts.assign(t_len * s_size, 0);
        for (std::size_t t = 0; t < t_len; ++t) ++st.time_symbol_counts[t * s_size + (z(i, t) - 1)];
        refresh_cluster_state(st);
    }
    return states;
}

namespace detail {

/// Reusable buffers for merge evaluation.
struct MergeScratch {
    std::vector<std::uint32_t> counts;
    std::vector<Symbol> driver;
    std::vector<std::int64_t> marginals;
    std::vector<std::int64_t> contingency;
};

/// Cost of the union cluster (table + member bits) without materializing a
/// full ClusterState.
inline double merged_cost(const ClusterState& a, const ClusterState& b, MergeScratch& ws) {
    const int s_size = a.alphabet_size;
    const std::size_t cells = a.time_symbol_counts.size();
    ws.counts.resize(cells);
    for (std::size_t i = 0; i < cells; ++i) ws.counts[i] = a.time_symbol_counts[i] + b.time_symbol_counts[i];
    const std::size_t series_length = cells / s_size;
    const auto n_merged = static_cast<std::int64_t>(a.size() + b.size());

    ws.driver.resize(series_length);
    ws.marginals.assign(s_size, 0);
    ws.contingency.assign(static_cast<std::size_t>(s_size) * s_size, 0);
    for (std::size_t t = 0; t < series_length; ++t) {
        const std::uint32_t* row = ws.counts.data() + t * s_size;
        int best = 0;
        std::uint32_t best_count = row[0];
        for (int s = 1; s < s_size; ++s)
            if (row[s] > best_count) {
                best = s;
                best_count = row[s];
            }
        ++ws.marginals[best];
        std::int64_t* crow = ws.contingency.data() + static_cast<std::size_t>(best) * s_size;
        for (int s = 0; s < s_size; ++s) crow[s] += row[s];
    }
    return table_cost(ws.marginals, n_merged, s_size) + member_cost(ws.contingency, s_size);
}

}  // namespace detail

/// Cluster-local change in description length from merging a and b:
/// [table + member cost of the union] - [a.cached_cost + b.cached_cost].
/// Global D-dependent terms are excluded; the optimizer folds them in once
/// per step. Pure: neither input is mutated.
inline double merge_delta(const ClusterState& a, const ClusterState& b,
                          detail::MergeScratch& scratch) {
    if (a.alphabet_size != b.alphabet_size || a.time_symbol_counts.size() != b.time_symbol_counts.size())
        throw std::runtime_error("merge_delta: incompatible cluster states");
    return detail::merged_cost(a, b, scratch) - (a.cached_cost + b.cached_cost);
}

inline double merge_delta(const ClusterState& a, const ClusterState& b) {
    detail::MergeScratch scratch;
    return merge_delta(a, b, scratch);
}

/// The union cluster: members merged sorted, counts summed, driver recomputed
/// by majority vote, contingency rebuilt, cached_cost refreshed. O(n_a + n_b
/// + T*S).
inline ClusterState apply_merge(const ClusterState& a, const ClusterState& b) {
    if (a.alphabet_size != b.alphabet_size || a.time_symbol_counts.size() != b.time_symbol_counts.size())
        throw std::runtime_error("apply_merge: incompatible cluster states");
    ClusterState out;
    out.alphabet_size = a.alphabet_size;
    out.members.resize(a.size() + b.size());
    std::merge(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
               out.members.begin());
    if (std::adjacent_find(out.members.begin(), out.members.end()) != out.members.end())
        throw std::runtime_error("apply_merge: clusters overlap");
    out.time_symbol_counts.resize(a.time_symbol_counts.size());
    for (std::size_t i = 0; i < out.time_symbol_counts.size(); ++i)
        out.time_symbol_counts[i] = a.time_symbol_counts[i] + b.time_symbol_counts[i];
    refresh_cluster_state(out);
    return out;
}

/// Checks the internal count identities of a cluster state. Throws with a
/// description of the first violated identity.
inline void validate_cluster_state(const ClusterState& st) {
    const int s_size = st.alphabet_size;
    const std::size_t series_length = st.series_length();
    if (st.time_symbol_counts.size() != series_length * static_cast<std::size_t>(s_size))
        throw std::runtime_error("cluster state: count table shape mismatch");
    const auto n_d = static_cast<std::int64_t>(st.size());
    for (std::size_t t = 0; t < series_length; ++t) {
        std::int64_t row_sum = 0;
        std::uint32_t best = 0;
        for (int s = 0; s < s_size; ++s) {
            const std::uint32_t c = st.time_symbol_counts[t * s_size + s];
            row_sum += c;
            best = std::max(best, c);
        }
        if (row_sum != n_d) throw std::runtime_error("cluster state: sum_s m_ts != n_d");
        if (st.time_symbol_counts[t * s_size + (st.driver[t] - 1)] != best)
            throw std::runtime_error("cluster state: driver is not a per-time majority");
        for (int s = 0; s < st.driver[t] - 1; ++s)
            if (st.time_symbol_counts[t * s_size + s] == best)
                throw std::runtime_error("cluster state: driver tie not broken downward");
    }
    std::int64_t marg_sum = 0;
    for (int r = 0; r < s_size; ++r) {
        marg_sum += st.driver_marginals[r];
        std::int64_t row_sum = 0;
        for (int s = 0; s < s_size; ++s) row_sum += st.contingency[r * s_size + s];
        if (row_sum != n_d * st.driver_marginals[r])
            throw std::runtime_error("cluster state: sum_s c_rs != n_d * c_r");
    }
    if (marg_sum != static_cast<std::int64_t>(series_length))
        throw std::runtime_error("cluster state: sum_r c_r != T");
    const double recomputed = cluster_cost_for_driver(
        st.driver, st.time_symbol_counts, n_d, s_size);
    const double tol = 1e-9 * std::max(1.0, std::abs(recomputed));
    if (std::abs(recomputed - st.cached_cost) > tol)
        throw std::runtime_error("cluster state: cached_cost out of date");
}

/// Global constants of one regionalization problem.
struct GraphConstants {
    std::int64_t n_locations = 0;   // N
    std::int64_t series_length = 0; // T
    std::int64_t alphabet_size = 1; // S
    double spanning_tree_bits = 0.0;
};

/// Assembles the full objective for a set of clusters forming a partition of
/// {1..N}: spanning tree + partition choice + drivers + per-cluster table and
/// member terms.
inline CodelengthBreakdown total_description_length(std::span<const ClusterState> states,
                                                    const GraphConstants& gc) {
    std::int64_t covered = 0;
    CodelengthBreakdown bd;
    bd.spanning_tree_bits = gc.spanning_tree_bits;
    for (const ClusterState& st : states) {
        covered += static_cast<std::int64_t>(st.size());
        bd.table_bits += table_cost(st.driver_marginals, static_cast<std::int64_t>(st.size()),
                                    st.alphabet_size);
        bd.member_bits += member_cost(st.contingency, st.alphabet_size);
    }
    if (covered != gc.n_locations)
        throw std::runtime_error("total_description_length: clusters do not partition {1..N}");
    const auto d = static_cast<std::int64_t>(states.size());
    bd.partition_choice_bits = log_binomial(gc.n_locations - 1, d - 1);
    bd.driver_bits = driver_cost(d, gc.series_length, gc.alphabet_size);
    bd.total_bits = bd.components_sum();
    return bd;
}

}  // namespace mdlregion
