#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "mdlregion/spatial_graph.hpp"

namespace mdlregion {
namespace delaunay_detail {

using boost::multiprecision::cpp_rational;

// Doubles are dyadic rationals; decompose through frexp so the conversion is
// exact by construction rather than relying on library conversion paths.
inline cpp_rational to_rational(double x) {
    if (x == 0.0) return cpp_rational(0);
    int e = 0;
    const double m = std::frexp(x, &e);
    const auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
    cpp_rational r(mant);
    const int shift = e - 53;
    if (shift >= 0) {
        boost::multiprecision::cpp_int num = numerator(r) << shift;
        r = cpp_rational(num, denominator(r));
    } else {
        boost::multiprecision::cpp_int den = denominator(r) << (-shift);
        r = cpp_rational(numerator(r), den);
    }
    return r;
}

inline int sign_of(const cpp_rational& x) {
    if (x > 0) return 1;
    if (x < 0) return -1;
    return 0;
}

// Error-bound constants for the floating-point filters (Shewchuk).
inline constexpr double kEps = 1.1102230246251565e-16;  // 2^-53
inline constexpr double kOrientBound = (3.0 + 16.0 * kEps) * kEps;
inline constexpr double kIncircleBound = (10.0 + 96.0 * kEps) * kEps;

/// Sign of the orientation determinant of (a, b, c): +1 if c lies left of the
/// directed line a->b, -1 if right, 0 if exactly collinear. Filtered double
/// evaluation with an exact rational fallback.
inline int orient2d(const std::array<double, 2>& a, const std::array<double, 2>& b,
                    const std::array<double, 2>& c) {
    const double detleft = (b[0] - a[0]) * (c[1] - a[1]);
    const double detright = (b[1] - a[1]) * (c[0] - a[0]);
    const double det = detleft - detright;
    const double detsum = std::abs(detleft) + std::abs(detright);
    if (std::abs(det) > kOrientBound * detsum) return det > 0 ? 1 : -1;
    if (det == 0.0 && detsum == 0.0) return 0;

    const cpp_rational ax = to_rational(a[0]), ay = to_rational(a[1]);
    const cpp_rational bx = to_rational(b[0]), by = to_rational(b[1]);
    const cpp_rational cx = to_rational(c[0]), cy = to_rational(c[1]);
    return sign_of((bx - ax) * (cy - ay) - (by - ay) * (cx - ax));
}

/// Sign of the incircle determinant: +1 if d lies strictly inside the
/// circumcircle of the CCW triangle (a, b, c), -1 if strictly outside,
/// 0 if exactly cocircular.
inline int incircle(const std::array<double, 2>& a, const std::array<double, 2>& b,
                    const std::array<double, 2>& c, const std::array<double, 2>& d) {
    const double adx = a[0] - d[0], ady = a[1] - d[1];
    const double bdx = b[0] - d[0], bdy = b[1] - d[1];
    const double cdx = c[0] - d[0], cdy = c[1] - d[1];

    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;

    const double bxcy = bdx * cdy, cxby = cdx * bdy;
    const double cxay = cdx * ady, axcy = adx * cdy;
    const double axby = adx * bdy, bxay = bdx * ady;

    const double det = alift * (bxcy - cxby) + blift * (cxay - axcy) + clift * (axby - bxay);
    const double permanent = alift * (std::abs(bxcy) + std::abs(cxby)) +
                             blift * (std::abs(cxay) + std::abs(axcy)) +
                             clift * (std::abs(axby) + std::abs(bxay));
    if (std::abs(det) > kIncircleBound * permanent) return det > 0 ? 1 : -1;
    if (det == 0.0 && permanent == 0.0) return 0;

    const cpp_rational Adx = to_rational(a[0]) - to_rational(d[0]);
    const cpp_rational Ady = to_rational(a[1]) - to_rational(d[1]);
    const cpp_rational Bdx = to_rational(b[0]) - to_rational(d[0]);
    const cpp_rational Bdy = to_rational(b[1]) - to_rational(d[1]);
    const cpp_rational Cdx = to_rational(c[0]) - to_rational(d[0]);
    const cpp_rational Cdy = to_rational(c[1]) - to_rational(d[1]);
    const cpp_rational Al = Adx * Adx + Ady * Ady;
    const cpp_rational Bl = Bdx * Bdx + Bdy * Bdy;
    const cpp_rational Cl = Cdx * Cdx + Cdy * Cdy;
    return sign_of(Al * (Bdx * Cdy - Cdx * Bdy) + Bl * (Cdx * Ady - Adx * Cdy) +
                   Cl * (Adx * Bdy - Bdx * Ady));
}

constexpr int kGhost = -1;

struct Tri {
    std::array<int, 3> v;    // vertex ids; at most one kGhost
    std::array<int, 3> n;    // n[k] = triangle across the edge opposite v[k]
    bool alive = true;
    bool is_ghost() const { return v[0] == kGhost || v[1] == kGhost || v[2] == kGhost; }
};

/// Incremental Bowyer-Watson triangulator with ghost triangles standing in
/// for the region outside the convex hull. Exactly cocircular quadruples are
/// resolved by treating the new point as outside the circle, which keeps the
/// construction deterministic for degenerate inputs such as grid points.
class Triangulator {
public:
    explicit Triangulator(const std::vector<std::array<double, 2>>& points)
        : pts_(points) {}

    // Returns undirected Delaunay edges over point indices.
    std::vector<Edge> run() {
        const std::size_t n = pts_.size();
        order_ = spatial_order();
        init_first_triangle();
        for (std::size_t k = first_uninserted_; k < n; ++k) insert(order_[k]);

        std::vector<Edge> edges;
        edges.reserve(tris_.size() * 3 / 2);
        for (const Tri& t : tris_) {
            if (!t.alive || t.is_ghost()) continue;
            for (int k = 0; k < 3; ++k) {
                const int u = std::min(t.v[k], t.v[(k + 1) % 3]);
                const int v = std::max(t.v[k], t.v[(k + 1) % 3]);
                edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
            }
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        return edges;
    }

private:
    const std::array<double, 2>& P(int i) const { return pts_[static_cast<std::size_t>(i)]; }

    // Morton order over quantized coordinates keeps successive insertions
    // spatially close, so the walk-based point location stays short.
    std::vector<int> spatial_order() const {
        const std::size_t n = pts_.size();
        double xmin = pts_[0][0], xmax = xmin, ymin = pts_[0][1], ymax = ymin;
        for (const auto& p : pts_) {
            xmin = std::min(xmin, p[0]);
            xmax = std::max(xmax, p[0]);
            ymin = std::min(ymin, p[1]);
            ymax = std::max(ymax, p[1]);
        }
        const double sx = xmax > xmin ? 65535.0 / (xmax - xmin) : 0.0;
        const double sy = ymax > ymin ? 65535.0 / (ymax - ymin) : 0.0;
        std::vector<std::pair<std::uint64_t, int>> keyed(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto qx = static_cast<std::uint32_t>((pts_[i][0] - xmin) * sx);
            auto qy = static_cast<std::uint32_t>((pts_[i][1] - ymin) * sy);
            std::uint64_t key = 0;
            for (int b = 0; b < 16; ++b) {
                key |= static_cast<std::uint64_t>((qx >> b) & 1u) << (2 * b);
                key |= static_cast<std::uint64_t>((qy >> b) & 1u) << (2 * b + 1);
            }
            keyed[i] = {key, static_cast<int>(i)};
        }
        std::sort(keyed.begin(), keyed.end());
        std::vector<int> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = keyed[i].second;
        return order;
    }

    void init_first_triangle() {
        // First two points plus the earliest point not collinear with them.
        std::size_t k = 2;
        int o = 0;
        while (k < order_.size() &&
               (o = orient2d(P(order_[0]), P(order_[1]), P(order_[k]))) == 0)
            ++k;
        if (k >= order_.size())
            throw std::invalid_argument("delaunay: all points are collinear");
        std::rotate(order_.begin() + 2, order_.begin() + k, order_.begin() + k + 1);
        first_uninserted_ = 3;

        int a = order_[0], b = order_[1], c = order_[2];
        if (o < 0) std::swap(b, c);  // make (a, b, c) counterclockwise

        tris_.push_back({{a, b, c}, {-1, -1, -1}, true});        // 0: real
        tris_.push_back({{b, a, kGhost}, {-1, -1, -1}, true});   // 1
        tris_.push_back({{c, b, kGhost}, {-1, -1, -1}, true});   // 2
        tris_.push_back({{a, c, kGhost}, {-1, -1, -1}, true});   // 3
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) try_link(i, j);
        last_tri_ = 0;
    }

    // Matches one shared undirected edge between two triangles, if any, and
    // sets both neighbor slots.
    void try_link(int t1, int t2) {
        for (int k1 = 0; k1 < 3; ++k1) {
            const int a1 = tris_[t1].v[(k1 + 1) % 3], b1 = tris_[t1].v[(k1 + 2) % 3];
            for (int k2 = 0; k2 < 3; ++k2) {
                const int a2 = tris_[t2].v[(k2 + 1) % 3], b2 = tris_[t2].v[(k2 + 2) % 3];
                if (a1 == b2 && b1 == a2) {
                    tris_[t1].n[k1] = t2;
                    tris_[t2].n[k2] = t1;
                    return;
                }
            }
        }
    }

    bool between_collinear(int a, int b, int p) const {
        const auto &pa = P(a), &pb = P(b), &pp = P(p);
        const auto lo = std::min(pa, pb), hi = std::max(pa, pb);
        return lo < pp && pp < hi;
    }

    // Conflict rule. Real triangle: p strictly inside the circumcircle.
    // Ghost triangle (u, v, ghost) for hull edge u->v with the outside on its
    // left: p strictly left, or exactly on the open hull edge segment.
    bool conflicts(int t, int p) const {
        const Tri& tr = tris_[t];
        if (!tr.is_ghost())
            return incircle(P(tr.v[0]), P(tr.v[1]), P(tr.v[2]), P(p)) > 0;
        int g = 0;
        while (tr.v[g] != kGhost) ++g;
        const int u = tr.v[(g + 1) % 3], v = tr.v[(g + 2) % 3];
        const int o = orient2d(P(u), P(v), P(p));
        if (o != 0) return o > 0;
        return between_collinear(u, v, p);
    }

    // Walk from the last created triangle toward p until a conflicting
    // triangle is found.
    int locate(int p) {
        int t = last_tri_;
        if (tris_[t].is_ghost()) {
            int g = 0;
            while (tris_[t].v[g] != kGhost) ++g;
            if (conflicts(t, p)) return t;
            t = tris_[t].n[g];  // hop to the interior side
        }
        std::size_t steps = 0;
        const std::size_t max_steps = 4 * tris_.size() + 16;
        while (true) {
            if (++steps > max_steps) {  // safety net; scan everything
                for (std::size_t i = 0; i < tris_.size(); ++i)
                    if (tris_[i].alive && conflicts(static_cast<int>(i), p))
                        return static_cast<int>(i);
                throw std::runtime_error("delaunay: point location failed");
            }
            const Tri& tr = tris_[t];
            int next = -1;
            for (int k = 0; k < 3; ++k) {
                const int a = tr.v[(k + 1) % 3], b = tr.v[(k + 2) % 3];
                if (a == kGhost || b == kGhost) continue;
                if (orient2d(P(a), P(b), P(p)) < 0) {
                    next = tr.n[k];
                    break;
                }
            }
            if (next == -1) return t;  // p inside this real triangle
            if (tris_[next].is_ghost()) return next;  // crossed the hull: conflict
            t = next;
        }
    }

    void insert(int p) {
        const int seed = locate(p);
        if (!conflicts(seed, p))
            throw std::runtime_error("delaunay: located a non-conflicting triangle");

        // Grow the conflict cavity.
        dead_.clear();
        boundary_.clear();
        stack_.clear();
        stack_.push_back(seed);
        tris_[seed].alive = false;
        dead_.push_back(seed);
        while (!stack_.empty()) {
            const int t = stack_.back();
            stack_.pop_back();
            for (int k = 0; k < 3; ++k) {
                const int nb = tris_[t].n[k];
                if (!tris_[nb].alive) continue;  // already dead
                if (conflicts(nb, p)) {
                    tris_[nb].alive = false;
                    dead_.push_back(nb);
                    stack_.push_back(nb);
                } else {
                    boundary_.push_back({tris_[t].v[(k + 1) % 3], tris_[t].v[(k + 2) % 3], nb});
                }
            }
        }

        // Star-connect p to the cavity boundary.
        start_map_.clear();
        new_tris_.clear();
        for (const auto& [u, v, outside] : boundary_) {
            int idx;
            if (!free_.empty()) {
                idx = free_.back();
                free_.pop_back();
                tris_[idx] = Tri{{u, v, p}, {-1, -1, -1}, true};
            } else {
                idx = static_cast<int>(tris_.size());
                tris_.push_back(Tri{{u, v, p}, {-1, -1, -1}, true});
            }
            tris_[idx].n[2] = outside;  // across p: the surviving outside triangle
            for (int k = 0; k < 3; ++k)
                if (tris_[outside].v[(k + 1) % 3] == v && tris_[outside].v[(k + 2) % 3] == u)
                    tris_[outside].n[k] = idx;
            start_map_[u] = idx;
            new_tris_.push_back(idx);
        }
        for (const int idx : new_tris_) {
            const int v = tris_[idx].v[1];
            const int succ = start_map_.at(v);  // shares edge {v, p}
            tris_[idx].n[0] = succ;
            tris_[succ].n[1] = idx;
        }
        for (const int d : dead_) free_.push_back(d);
        last_tri_ = new_tris_.back();
    }

    const std::vector<std::array<double, 2>>& pts_;
    std::vector<int> order_;
    std::size_t first_uninserted_ = 3;
    std::vector<Tri> tris_;
    std::vector<int> free_;
    int last_tri_ = 0;

    // scratch
    std::vector<int> dead_;
    std::vector<std::array<int, 3>> boundary_;  // (u, v, outside triangle)
    std::vector<int> stack_;
    std::vector<int> new_tris_;
    std::unordered_map<int, int> start_map_;
};

}  // namespace delaunay_detail

/// Adjacency from isolated points: two locations are neighbors when their
/// Voronoi cells share a boundary, i.e. the Delaunay triangulation edge set.
/// Requires at least three points, not all collinear, all distinct.
inline SpatialGraph build_delaunay_adjacency(const std::vector<std::array<double, 2>>& points) {
    if (points.size() < 3)
        throw std::invalid_argument("build_delaunay_adjacency: need at least 3 points");
    for (std::size_t i = 0; i < points.size(); ++i)
        if (!std::isfinite(points[i][0]) || !std::isfinite(points[i][1]))
            throw std::invalid_argument("build_delaunay_adjacency: non-finite coordinate at index " +
                                        std::to_string(i));

    // Detect exact duplicates, naming the offending indices.
    {
        std::vector<std::size_t> idx(points.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            if (points[a] != points[b]) return points[a] < points[b];
            return a < b;
        });
        for (std::size_t k = 1; k < idx.size(); ++k)
            if (points[idx[k - 1]] == points[idx[k]])
                throw std::invalid_argument(
                    "build_delaunay_adjacency: duplicate points at indices " +
                    std::to_string(idx[k - 1]) + " and " + std::to_string(idx[k]));
    }

    delaunay_detail::Triangulator tri(points);
    return SpatialGraph(points.size(), tri.run(), points);
}

}  // namespace mdlregion
