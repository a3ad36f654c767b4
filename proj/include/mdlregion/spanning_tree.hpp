#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "mdlregion/spatial_graph.hpp"

namespace mdlregion {

/// log2 of the number of spanning trees of g (the matrix-tree theorem):
/// the log-determinant of any (N-1) x (N-1) principal minor of the graph
/// Laplacian, here the minor dropping the last node, factorized sparsely with
/// a fill-reducing (AMD) ordering. Throws if g is disconnected.
inline double log_spanning_tree_count(const SpatialGraph& g) {
    if (g.n_nodes() == 0)
        throw std::invalid_argument("log_spanning_tree_count: empty graph");
    if (!is_connected(g))
        throw std::invalid_argument("log_spanning_tree_count: graph is disconnected");
    const auto n = static_cast<Eigen::Index>(g.n_nodes());
    if (n == 1) return 0.0;  // the empty tree

    const Eigen::Index m = n - 1;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(g.n_edges() * 2 + static_cast<std::size_t>(m));
    std::vector<double> degree(g.n_nodes(), 0.0);
    for (auto [a, b] : g.edges()) {
        degree[a] += 1.0;
        degree[b] += 1.0;
        if (a < m && b < m) {
            trip.emplace_back(a, b, -1.0);
            trip.emplace_back(b, a, -1.0);
        }
    }
    for (Eigen::Index i = 0; i < m; ++i)
        trip.emplace_back(i, i, degree[static_cast<std::size_t>(i)]);

    Eigen::SparseMatrix<double> minor(m, m);
    minor.setFromTriplets(trip.begin(), trip.end());

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(minor);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("log_spanning_tree_count: factorization failed");

    double log2_det = 0.0;
    const auto& d = ldlt.vectorD();
    for (Eigen::Index i = 0; i < m; ++i) {
        if (!(d[i] > 0.0))
            throw std::runtime_error("log_spanning_tree_count: non-positive pivot");
        log2_det += std::log2(d[i]);
    }
    return log2_det;
}

}  // namespace mdlregion
