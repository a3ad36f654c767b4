#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mdlregion {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;  // normalized: first < second

/// Undirected spatial adjacency network over N locations. Edges are stored
/// normalized (i < j), sorted and deduplicated; neighbor queries go through a
/// CSR index built at construction. Coordinates are optional (grid graphs and
/// externally supplied edge lists may not have any).
class SpatialGraph {
public:
    SpatialGraph() = default;

    SpatialGraph(std::size_t n_nodes, std::vector<Edge> edges,
                 std::optional<std::vector<std::array<double, 2>>> coordinates = std::nullopt)
        : n_(n_nodes), edges_(std::move(edges)), coords_(std::move(coordinates)) {
        for (auto& [a, b] : edges_) {
            if (a == b) throw std::invalid_argument("SpatialGraph: self-loop");
            if (a > b) std::swap(a, b);
            if (b >= n_) throw std::invalid_argument("SpatialGraph: edge endpoint out of range");
        }
        std::sort(edges_.begin(), edges_.end());
        if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
            throw std::invalid_argument("SpatialGraph: duplicate edge");
        if (coords_ && coords_->size() != n_)
            throw std::invalid_argument("SpatialGraph: coordinate count != node count");
        build_csr();
    }

    std::size_t n_nodes() const { return n_; }
    std::size_t n_edges() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }

    bool has_coordinates() const { return coords_.has_value(); }
    const std::vector<std::array<double, 2>>& coordinates() const {
        if (!coords_) throw std::runtime_error("SpatialGraph: no coordinates");
        return *coords_;
    }

    std::span<const NodeId> neighbors(NodeId i) const {
        return {adj_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }
    std::size_t degree(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }

    bool operator==(const SpatialGraph& o) const {
        return n_ == o.n_ && edges_ == o.edges_;
    }

private:
    void build_csr() {
        offsets_.assign(n_ + 1, 0);
        for (auto [a, b] : edges_) {
            ++offsets_[a + 1];
            ++offsets_[b + 1];
        }
        std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
        adj_.resize(2 * edges_.size());
        std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
        for (auto [a, b] : edges_) {
            adj_[cursor[a]++] = b;
            adj_[cursor[b]++] = a;
        }
        // edges_ is sorted, so each neighbor list comes out sorted as well
        // except for the mixed a/b interleaving; restore order per node.
        for (std::size_t i = 0; i < n_; ++i)
            std::sort(adj_.begin() + offsets_[i], adj_.begin() + offsets_[i + 1]);
    }

    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::optional<std::vector<std::array<double, 2>>> coords_;
    std::vector<std::size_t> offsets_{0};
    std::vector<NodeId> adj_;
};

/// Component label per node (labels are 0-based, ordered by smallest member).
inline std::vector<NodeId> connected_components(const SpatialGraph& g,
                                                std::size_t* n_components = nullptr) {
    const std::size_t n = g.n_nodes();
    std::vector<NodeId> label(n, UINT32_MAX);
    std::vector<NodeId> stack;
    NodeId next = 0;
    for (NodeId start = 0; start < n; ++start) {
        if (label[start] != UINT32_MAX) continue;
        stack.push_back(start);
        label[start] = next;
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            for (NodeId w : g.neighbors(v)) {
                if (label[w] == UINT32_MAX) {
                    label[w] = next;
                    stack.push_back(w);
                }
            }
        }
        ++next;
    }
    if (n_components) *n_components = next;
    return label;
}

inline bool is_connected(const SpatialGraph& g) {
    if (g.n_nodes() == 0) return false;
    std::size_t c = 0;
    connected_components(g, &c);
    return c == 1;
}

/// True when every label class induces a connected subgraph of g. Floods the
/// label-restricted graph once, then checks each label owns one flood region.
inline bool is_partition_contiguous(const SpatialGraph& g,
                                    std::span<const std::uint32_t> labels) {
    const std::size_t n = g.n_nodes();
    if (labels.size() != n) return false;
    std::vector<NodeId> region(n, UINT32_MAX);
    std::vector<NodeId> stack;
    NodeId next = 0;
    for (NodeId start = 0; start < n; ++start) {
        if (region[start] != UINT32_MAX) continue;
        stack.assign(1, start);
        region[start] = next;
        while (!stack.empty()) {
            const NodeId v = stack.back();
            stack.pop_back();
            for (NodeId w : g.neighbors(v))
                if (region[w] == UINT32_MAX && labels[w] == labels[start]) {
                    region[w] = next;
                    stack.push_back(w);
                }
        }
        ++next;
    }
    std::unordered_map<std::uint32_t, NodeId> region_of_label;
    for (std::size_t i = 0; i < n; ++i) {
        auto [it, fresh] = region_of_label.try_emplace(labels[i], region[i]);
        if (!fresh && it->second != region[i]) return false;
    }
    return true;
}

/// Rook (4-neighbor) adjacency over an R x C grid. The optional mask selects
/// retained cells (row-major); node ids are row-major over retained cells.
/// Throws if the retained cells are disconnected, listing component sizes.
inline SpatialGraph build_grid_adjacency(std::size_t rows, std::size_t cols,
                                         const std::vector<bool>& mask = {}) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("build_grid_adjacency: need rows, cols >= 1");
    if (!mask.empty() && mask.size() != rows * cols)
        throw std::invalid_argument("build_grid_adjacency: mask size != rows * cols");

    auto kept = [&](std::size_t r, std::size_t c) {
        return mask.empty() || mask[r * cols + c];
    };
    std::vector<NodeId> id(rows * cols, UINT32_MAX);
    NodeId next = 0;
    std::vector<std::array<double, 2>> coords;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            if (kept(r, c)) {
                id[r * cols + c] = next++;
                coords.push_back({static_cast<double>(c), static_cast<double>(r)});
            }
    if (next == 0) throw std::invalid_argument("build_grid_adjacency: empty mask");

    std::vector<Edge> edges;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            if (!kept(r, c)) continue;
            if (c + 1 < cols && kept(r, c + 1))
                edges.emplace_back(id[r * cols + c], id[r * cols + c + 1]);
            if (r + 1 < rows && kept(r + 1, c))
                edges.emplace_back(id[r * cols + c], id[(r + 1) * cols + c]);
        }

    SpatialGraph g(next, std::move(edges), std::move(coords));
    std::size_t n_comp = 0;
    auto comp = connected_components(g, &n_comp);
    if (n_comp > 1) {
        std::vector<std::size_t> sizes(n_comp, 0);
        for (NodeId c : comp) ++sizes[c];
        std::string msg = "build_grid_adjacency: masked grid is disconnected; component sizes:";
        for (std::size_t s : sizes) msg += " " + std::to_string(s);
        throw std::invalid_argument(msg);
    }
    return g;
}

/// Mutual k-nearest-neighbor adjacency: edge (i, j) kept when each point is
/// among the other's k nearest (Euclidean). May come out disconnected; callers
/// that need contiguity must validate.
inline SpatialGraph build_knn_adjacency(const std::vector<std::array<double, 2>>& points,
                                        std::size_t k) {
    const std::size_t n = points.size();
    if (k < 1 || k >= n)
        throw std::invalid_argument("build_knn_adjacency: need 1 <= k < n");
    std::vector<std::vector<NodeId>> knn(n);
    std::vector<std::pair<double, NodeId>> dist;
    for (NodeId i = 0; i < n; ++i) {
        dist.clear();
        for (NodeId j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dx = points[i][0] - points[j][0];
            const double dy = points[i][1] - points[j][1];
            dist.emplace_back(dx * dx + dy * dy, j);
        }
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        knn[i].reserve(k);
        for (std::size_t m = 0; m < k; ++m) knn[i].push_back(dist[m].second);
        std::sort(knn[i].begin(), knn[i].end());
    }
    std::vector<Edge> edges;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j : knn[i])
            if (i < j && std::binary_search(knn[j].begin(), knn[j].end(), i))
                edges.emplace_back(i, j);
    return SpatialGraph(n, std::move(edges), points);
}

/// Minimum spanning tree under the given per-edge weights (aligned with
/// g.edges()). Kruskal with ties broken by lexicographic edge order, so the
/// result is deterministic. Throws if g is disconnected.
inline SpatialGraph minimum_spanning_tree(const SpatialGraph& g,
                                          std::span<const double> weights) {
    if (weights.size() != g.n_edges())
        throw std::invalid_argument("minimum_spanning_tree: one weight per edge required");
    const std::size_t n = g.n_nodes();
    std::vector<std::size_t> order(g.n_edges());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (weights[a] != weights[b]) return weights[a] < weights[b];
        return g.edges()[a] < g.edges()[b];
    });

    std::vector<NodeId> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](NodeId x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    std::vector<Edge> tree;
    tree.reserve(n > 0 ? n - 1 : 0);
    for (std::size_t e : order) {
        auto [a, b] = g.edges()[e];
        NodeId ra = find(a), rb = find(b);
        if (ra == rb) continue;
        parent[ra] = rb;
        tree.push_back(g.edges()[e]);
    }
    if (tree.size() + 1 != n)
        throw std::invalid_argument("minimum_spanning_tree: graph is disconnected");
    auto coords = g.has_coordinates()
                      ? std::optional(g.coordinates())
                      : std::nullopt;
    return SpatialGraph(n, std::move(tree), std::move(coords));
}

/// Euclidean edge lengths, the default MST weighting for point data.
inline std::vector<double> euclidean_edge_weights(const SpatialGraph& g) {
    const auto& pts = g.coordinates();
    std::vector<double> w;
    w.reserve(g.n_edges());
    for (auto [a, b] : g.edges()) {
        const double dx = pts[a][0] - pts[b][0];
        const double dy = pts[a][1] - pts[b][1];
        w.push_back(std::hypot(dx, dy));
    }
    return w;
}

/// Cluster pairs (d, d') that share at least one crossing edge of g,
/// normalized d < d', sorted and deduplicated. Labels may be any integers.
inline std::vector<std::pair<NodeId, NodeId>> cluster_adjacency(
    const SpatialGraph& g, std::span<const NodeId> labels) {
    if (labels.size() != g.n_nodes())
        throw std::invalid_argument("cluster_adjacency: label vector size mismatch");
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (auto [a, b] : g.edges()) {
        NodeId da = labels[a], db = labels[b];
        if (da == db) continue;
        if (da > db) std::swap(da, db);
        pairs.emplace_back(da, db);
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    return pairs;
}

}  // namespace mdlregion
