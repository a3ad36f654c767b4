#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mdlregion/cluster_state.hpp"
#include "mdlregion/codelength.hpp"
#include "mdlregion/spanning_tree.hpp"
#include "mdlregion/spatial_graph.hpp"
#include "mdlregion/symbol_matrix.hpp"

namespace mdlregion {

/// A contiguous clustering of the N locations. Labels run 1..D in order of
/// each cluster's smallest member; drivers[k] belongs to label k+1.
struct Partition {
    std::vector<std::uint32_t> labels;
    std::vector<std::vector<Symbol>> drivers;
    CodelengthBreakdown breakdown;

    std::size_t n_clusters() const { return drivers.size(); }
};

/// One recorded point of a greedy run. merged_a/merged_b are the smallest
/// members of the two clusters merged to reach this point; the initial
/// (all-singletons) step uses -1 for both.
struct TrajectoryStep {
    std::int64_t n_clusters = 0;
    std::int64_t merged_a = -1;
    std::int64_t merged_b = -1;
    double total_bits = 0.0;
};

/// Full merge record from D=N down to D=1 (or down to a fixed target).
/// best_step_index points at the first step attaining the minimum total, so
/// ties resolve toward larger D.
struct MergeTrajectory {
    std::vector<TrajectoryStep> steps;
    std::size_t best_step_index = 0;
};

/// Relabels an arbitrary cluster assignment to canonical ids 1..D ordered by
/// each cluster's smallest member. Scanning nodes in id order makes
/// first-appearance order exactly smallest-member order.
inline std::vector<std::uint32_t> canonical_labels(std::span<const std::uint32_t> raw) {
    std::uint32_t max_raw = 0;
    for (std::uint32_t r : raw) max_raw = std::max(max_raw, r);
    std::vector<std::uint32_t> remap(static_cast<std::size_t>(max_raw) + 1, 0);
    std::vector<std::uint32_t> out(raw.size());
    std::uint32_t next = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        std::uint32_t& slot = remap[raw[i]];
        if (slot == 0) slot = ++next;
        out[i] = slot;
    }
    return out;
}

/// From-scratch evaluation of a labeled partition: canonicalizes labels,
/// verifies each cluster is connected in g by flood fill, rebuilds every
/// cluster's statistics from z, and assembles the full objective.
inline Partition evaluate_partition(const SymbolMatrix& z, const SpatialGraph& g,
                                    std::span<const std::uint32_t> labels,
                                    double spanning_tree_bits) {
    const std::size_t n = z.n_series();
    if (g.n_nodes() != n || labels.size() != n)
        throw std::runtime_error("evaluate_partition: size mismatch between z, g and labels");
    Partition p;
    p.labels = canonical_labels(labels);
    const std::uint32_t d = *std::max_element(p.labels.begin(), p.labels.end());

    std::vector<std::vector<NodeId>> members(d);
    for (std::size_t i = 0; i < n; ++i) members[p.labels[i] - 1].push_back(static_cast<NodeId>(i));

    std::vector<char> seen(n, 0);
    std::vector<NodeId> stack;
    for (std::uint32_t c = 0; c < d; ++c) {
        stack.assign(1, members[c].front());
        seen[stack.back()] = 1;
        std::size_t reached = 0;
        while (!stack.empty()) {
            const NodeId u = stack.back();
            stack.pop_back();
            ++reached;
            for (NodeId v : g.neighbors(u))
                if (!seen[v] && p.labels[v] == c + 1) {
                    seen[v] = 1;
                    stack.push_back(v);
                }
        }
        if (reached != members[c].size())
            throw std::runtime_error("evaluate_partition: cluster " + std::to_string(c + 1) +
                                     " is not connected in the adjacency graph");
    }

    const int s_size = z.alphabet_size();
    const std::size_t t_len = z.series_length();
    std::vector<ClusterState> states(d);
    for (std::uint32_t c = 0; c < d; ++c) {
        ClusterState& st = states[c];
        st.alphabet_size = s_size;
        st.members = std::move(members[c]);
        st.time_symbol_counts.assign(t_len * s_size, 0);
        for (NodeId i : st.members)
            for (std::size_t t = 0; t < t_len; ++t)
                ++st.time_symbol_counts[t * s_size + (z(i, t) - 1)];
        refresh_cluster_state(st);
        p.drivers.push_back(st.driver);
    }
    p.breakdown = total_description_length(
        states, GraphConstants{static_cast<std::int64_t>(n), static_cast<std::int64_t>(t_len),
                               s_size, spanning_tree_bits});
    return p;
}

struct GreedyOptions {
    /// Leave the spanning-tree term out of reported totals (it shifts every
    /// trajectory entry by the same constant and never affects the argmin).
    bool skip_tree_count = false;
};

namespace detail {

struct MergeCandidate {
    double delta;
    NodeId lo, hi;  // smallest members of the two clusters, lo < hi
    std::uint32_t slot_a, slot_b;
};

struct CandidateAfter {
    bool operator()(const MergeCandidate& x, const MergeCandidate& y) const {
        if (x.delta != y.delta) return x.delta > y.delta;
        if (x.lo != y.lo) return x.lo > y.lo;
        return x.hi > y.hi;
    }
};

struct GreedyRun {
    MergeTrajectory trajectory;                       // steps[0] is the singleton state
    std::vector<std::pair<NodeId, NodeId>> merges;    // smallest-member pairs, in order
};

/// Greedy agglomeration core. Performs max_merges merges (or N-1 when larger),
/// recording the running total after each.
///
/// Candidate deltas live in a min priority queue with lazy refresh. Each merge
/// allocates a fresh slot id, so an entry is current exactly when both its
/// slots are still alive; no version stamps are needed. A merge pushes nothing:
/// the entries of the two consumed clusters stay in the queue and act as
/// adjacency records. When a stale entry reaches the front it is remapped to
/// the surviving clusters that absorbed its endpoints and reinserted with the
/// recomputed delta (once per surviving pair; later lineages of the same pair
/// are dropped). Entries whose endpoints collapsed into one cluster are
/// discarded. Queue work per merge is therefore proportional to the number of
/// stale entries that actually surface, not to the merged cluster's degree.
inline GreedyRun run_greedy(const SymbolMatrix& z, const SpatialGraph& g, double st_bits,
                            std::size_t max_merges) {
    const std::size_t n = z.n_series();
    if (n == 0) throw std::runtime_error("greedy: empty input");
    if (g.n_nodes() != n) throw std::runtime_error("greedy: z and g disagree on N");
    if (!is_connected(g)) throw std::runtime_error("greedy: adjacency graph is disconnected");

    const auto t_len = static_cast<std::int64_t>(z.series_length());
    const auto s_size = static_cast<std::int64_t>(z.alphabet_size());
    const auto n64 = static_cast<std::int64_t>(n);

    std::vector<ClusterState> states = init_singletons(z);
    states.reserve(2 * n);
    std::vector<char> alive(n, 1);
    std::vector<NodeId> rep(n);
    std::iota(rep.begin(), rep.end(), NodeId{0});
    std::vector<std::uint32_t> into(n);  // dead slot -> slot that absorbed it
    std::iota(into.begin(), into.end(), 0u);
    const auto find_current = [&](std::uint32_t s) {
        while (into[s] != s) {
            into[s] = into[into[s]];
            s = into[s];
        }
        return s;
    };

    double running_cluster_bits = 0.0;
    for (const ClusterState& st : states) running_cluster_bits += st.cached_cost;

    GreedyRun out;
    const auto total_at = [&](std::int64_t d) {
        return st_bits + log_binomial(n64 - 1, d - 1) + driver_cost(d, t_len, s_size) +
               running_cluster_bits;
    };
    out.trajectory.steps.push_back({n64, -1, -1, total_at(n64)});

    std::vector<MergeCandidate> heap;
    heap.reserve(2 * g.n_edges());
    const CandidateAfter after{};
    MergeScratch scratch;
    std::unordered_set<std::uint64_t> pair_pushed;
    pair_pushed.reserve(2 * g.n_edges());
    const auto pair_key = [](std::uint32_t a, std::uint32_t b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | b;
    };
    const auto push_candidate = [&](std::uint32_t sa, std::uint32_t sb) {
        const double delta = merge_delta(states[sa], states[sb], scratch);
        auto [lo, hi] = std::minmax(rep[sa], rep[sb]);
        heap.push_back({delta, lo, hi, sa, sb});
        std::push_heap(heap.begin(), heap.end(), after);
    };
    for (auto [u, v] : g.edges()) {
        pair_pushed.insert(pair_key(u, v));
        push_candidate(u, v);
    }

    const std::size_t n_merges = std::min(max_merges, n - 1);
    out.merges.reserve(n_merges);
    for (std::size_t step = 0; step < n_merges; ++step) {
        MergeCandidate best;
        for (;;) {
            if (heap.empty()) throw std::runtime_error("greedy: candidate queue exhausted");
            std::pop_heap(heap.begin(), heap.end(), after);
            best = heap.back();
            heap.pop_back();
            if (alive[best.slot_a] && alive[best.slot_b]) break;
            const std::uint32_t ca = find_current(best.slot_a);
            const std::uint32_t cb = find_current(best.slot_b);
            if (ca == cb) continue;  // became an internal adjacency
            if (pair_pushed.insert(pair_key(ca, cb)).second) push_candidate(ca, cb);
        }
        const std::uint32_t sa = best.slot_a, sb = best.slot_b;
        const auto m = static_cast<std::uint32_t>(states.size());

        ClusterState merged = apply_merge(states[sa], states[sb]);
        running_cluster_bits += merged.cached_cost - states[sa].cached_cost -
                                states[sb].cached_cost;
        states.push_back(std::move(merged));
        alive.push_back(1);
        rep.push_back(std::min(rep[sa], rep[sb]));
        into.push_back(m);
        alive[sa] = alive[sb] = 0;
        into[sa] = into[sb] = m;
        states[sa] = ClusterState{};
        states[sb] = ClusterState{};

        out.merges.emplace_back(best.lo, best.hi);
        const auto d = static_cast<std::int64_t>(n - step - 1);
        out.trajectory.steps.push_back({d, static_cast<std::int64_t>(best.lo),
                                        static_cast<std::int64_t>(best.hi), total_at(d)});
    }

    std::size_t best_idx = 0;
    for (std::size_t i = 1; i < out.trajectory.steps.size(); ++i)
        if (out.trajectory.steps[i].total_bits < out.trajectory.steps[best_idx].total_bits)
            best_idx = i;
    out.trajectory.best_step_index = best_idx;
    return out;
}

/// Node labels after replaying the first n_applied merges with a union-find.
inline std::vector<std::uint32_t> labels_after_merges(
    std::size_t n, std::span<const std::pair<NodeId, NodeId>> merges, std::size_t n_applied) {
    std::vector<NodeId> parent(n);
    std::iota(parent.begin(), parent.end(), NodeId{0});
    const auto find = [&](NodeId x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (std::size_t i = 0; i < n_applied; ++i) {
        const NodeId ra = find(merges[i].first), rb = find(merges[i].second);
        parent[std::max(ra, rb)] = std::min(ra, rb);  // root stays the smallest member
    }
    std::vector<std::uint32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = find(static_cast<NodeId>(i)) + 1;
    return canonical_labels(labels);
}

}  // namespace detail

/// Greedy agglomerative minimization over contiguous partitions: starts from
/// singletons, repeatedly merges the adjacent pair at the front of the lazily
/// refreshed candidate queue (ties broken lexicographically on the pair's
/// smallest members), and keeps going to D=1. Returns the full trajectory and
/// the partition at its minimum, re-evaluated from scratch. Deterministic.
inline std::pair<MergeTrajectory, Partition> greedy_regionalize(const SymbolMatrix& z,
                                                                const SpatialGraph& g,
                                                                const GreedyOptions& opts = {}) {
    const double st_bits = opts.skip_tree_count ? 0.0 : log_spanning_tree_count(g);
    detail::GreedyRun run = detail::run_greedy(z, g, st_bits, z.n_series());
    const std::size_t k = run.trajectory.best_step_index;
    const auto labels = detail::labels_after_merges(z.n_series(), run.merges, k);
    Partition p = evaluate_partition(z, g, labels, st_bits);
    return {std::move(run.trajectory), std::move(p)};
}

/// Greedy trajectory truncated at a requested cluster count.
inline Partition regionalize_fixed_D(const SymbolMatrix& z, const SpatialGraph& g,
                                     std::int64_t target_d, const GreedyOptions& opts = {}) {
    const auto n = static_cast<std::int64_t>(z.n_series());
    if (target_d < 1 || target_d > n)
        throw std::runtime_error("regionalize_fixed_D: target D " + std::to_string(target_d) +
                                 " outside [1, " + std::to_string(n) + "]");
    const double st_bits = opts.skip_tree_count ? 0.0 : log_spanning_tree_count(g);
    detail::GreedyRun run =
        detail::run_greedy(z, g, st_bits, static_cast<std::size_t>(n - target_d));
    const auto labels = detail::labels_after_merges(z.n_series(), run.merges, run.merges.size());
    return evaluate_partition(z, g, labels, st_bits);
}

}  // namespace mdlregion
