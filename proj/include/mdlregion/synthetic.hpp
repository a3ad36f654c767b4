#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mdlregion/delaunay.hpp"
#include "mdlregion/evaluation.hpp"
#include "mdlregion/optimizer.hpp"
#include "mdlregion/rng.hpp"
#include "mdlregion/spatial_graph.hpp"
#include "mdlregion/symbol_matrix.hpp"

namespace mdlregion {

struct SyntheticParams {
    std::int64_t n_locations = 100;
    std::int64_t series_length = 51;
    std::int64_t alphabet_size = 4;
    std::int64_t n_clusters = 5;
    double noise_level = 0.0;
    std::uint64_t seed = 0;
    /// Fraction of locations whose series is generated from a uniformly
    /// chosen *other* cluster's driver while keeping their planted label.
    double confuser_fraction = 0.0;
    /// Default noise: flip with probability noise*S/(S-1) capped at 1,
    /// replacement uniform over the full alphabet, so the per-position
    /// corruption rate is exactly noise_level until it saturates at 1-1/S
    /// (noise 1 = fully random series). This flag switches to drawing the
    /// replacement from the S-1 other symbols with probability noise_level:
    /// identical in distribution below the saturation point, but corruption
    /// keeps climbing to 1, where every position disagrees with the driver.
    bool distinct_replacement_noise = false;
};

struct SyntheticDataset {
    SpatialGraph graph;
    std::vector<std::array<double, 2>> points;
    SymbolMatrix z;
    std::vector<std::uint32_t> planted_labels;          // 1..D by smallest member
    std::vector<std::vector<Symbol>> planted_drivers;   // D vectors of length T
    double noise_level = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {

/// Substream tags: one independent stream per randomness source, all derived
/// from the dataset seed.
enum SynthStream : std::uint64_t {
    kStreamPoints = 0,
    kStreamCuts = 1,
    kStreamDrivers = 2,
    kStreamNoise = 3,
    kStreamConfusers = 4,
    kStreamDriverSites = 5,
};

inline SpatialGraph synth_adjacency(std::vector<std::array<double, 2>>& points,
                                    std::int64_t n, Rng& rng) {
    if (n <= 2) {
        points.resize(static_cast<std::size_t>(n));
        for (auto& p : points) p = {rng.uniform(), rng.uniform()};
        std::vector<Edge> edges;
        if (n == 2) edges.push_back({0, 1});
        return SpatialGraph(static_cast<std::size_t>(n), edges, points);
    }
    for (int attempt = 0; attempt < 32; ++attempt) {
        points.resize(static_cast<std::size_t>(n));
        for (auto& p : points) p = {rng.uniform(), rng.uniform()};
        try {
            return build_delaunay_adjacency(points);
        } catch (const std::exception&) {
            // duplicate or collinear draw; redraw from the same stream
        }
    }
    throw std::runtime_error("synthetic: could not draw a non-degenerate point set");
}

}  // namespace detail

/// Planted-structure benchmark: uniform points in the unit square, Delaunay
/// adjacency, Euclidean MST, D-1 uniformly chosen MST edges cut to form the
/// planted clusters, iid uniform drivers, and per-position symbol corruption
/// at the requested noise level. Byte-identical output for a given seed.
inline SyntheticDataset generate(const SyntheticParams& p) {
    const std::int64_t n = p.n_locations, t_len = p.series_length, s_size = p.alphabet_size,
                       d = p.n_clusters;
    if (n < 1 || d < 1 || d > n) throw std::runtime_error("synthetic: need N >= D >= 1");
    if (s_size < 2 || s_size > 255) throw std::runtime_error("synthetic: need 2 <= S <= 255");
    if (t_len < 1) throw std::runtime_error("synthetic: need T >= 1");
    if (p.noise_level < 0.0 || p.noise_level > 1.0)
        throw std::runtime_error("synthetic: noise level outside [0, 1]");
    if (p.confuser_fraction < 0.0 || p.confuser_fraction > 1.0)
        throw std::runtime_error("synthetic: confuser fraction outside [0, 1]");

    SyntheticDataset out{SpatialGraph(1, {}), {}, SymbolMatrix(1, 1, 2), {}, {},
                         p.noise_level, p.seed};

    Rng rng_points = Rng::substream(p.seed, detail::kStreamPoints);
    out.graph = detail::synth_adjacency(out.points, n, rng_points);

    Rng rng_cuts = Rng::substream(p.seed, detail::kStreamCuts);
    if (d > 1) {
        const SpatialGraph mst =
            minimum_spanning_tree(out.graph, euclidean_edge_weights(out.graph));
        const auto cut_idx = rng_cuts.sample_without_replacement(
            static_cast<std::uint64_t>(n - 1), static_cast<std::uint64_t>(d - 1));
        std::vector<char> cut(static_cast<std::size_t>(n - 1), 0);
        for (std::uint64_t k : cut_idx) cut[k] = 1;
        std::vector<Edge> kept;
        for (std::size_t e = 0; e < mst.edges().size(); ++e)
            if (!cut[e]) kept.push_back(mst.edges()[e]);
        const SpatialGraph forest(static_cast<std::size_t>(n), kept);
        std::size_t n_comp = 0;
        out.planted_labels = connected_components(forest, &n_comp);
        if (n_comp != static_cast<std::size_t>(d))
            throw std::runtime_error("synthetic: MST cut produced wrong component count");
        for (auto& l : out.planted_labels) ++l;  // components are 0-based
    } else {
        out.planted_labels.assign(static_cast<std::size_t>(n), 1);
    }
    if (!is_partition_contiguous(out.graph, out.planted_labels))
        throw std::runtime_error("synthetic: planted clusters are not contiguous");

    Rng rng_drivers = Rng::substream(p.seed, detail::kStreamDrivers);
    out.planted_drivers.assign(static_cast<std::size_t>(d), std::vector<Symbol>(t_len));
    for (auto& drv : out.planted_drivers)
        for (auto& sym : drv)
            sym = static_cast<Symbol>(1 + rng_drivers.uniform_below(
                static_cast<std::uint64_t>(s_size)));

    // One member per cluster is the driver's own location; its series stays
    // an exact copy, untouched by noise or confuser reassignment.
    Rng rng_sites = Rng::substream(p.seed, detail::kStreamDriverSites);
    std::vector<std::vector<NodeId>> cluster_members(static_cast<std::size_t>(d));
    for (std::int64_t i = 0; i < n; ++i)
        cluster_members[out.planted_labels[i] - 1].push_back(static_cast<NodeId>(i));
    std::vector<char> is_driver_site(static_cast<std::size_t>(n), 0);
    for (const auto& members : cluster_members)
        is_driver_site[members[rng_sites.uniform_below(members.size())]] = 1;

    Rng rng_confusers = Rng::substream(p.seed, detail::kStreamConfusers);
    std::vector<std::uint32_t> source_cluster(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const std::uint32_t own = out.planted_labels[i] - 1;
        source_cluster[i] = own;
        if (p.confuser_fraction > 0.0 && d >= 2 && !is_driver_site[i] &&
            rng_confusers.bernoulli(p.confuser_fraction)) {
            const auto k = static_cast<std::uint32_t>(
                rng_confusers.uniform_below(static_cast<std::uint64_t>(d - 1)));
            source_cluster[i] = (k < own) ? k : k + 1;
        }
    }

    Rng rng_noise = Rng::substream(p.seed, detail::kStreamNoise);
    out.z = SymbolMatrix(static_cast<std::size_t>(n), static_cast<std::size_t>(t_len),
                         static_cast<int>(s_size));
    const double flip_prob = p.distinct_replacement_noise
                                 ? p.noise_level
                                 : std::min(1.0, p.noise_level * static_cast<double>(s_size) /
                                                     static_cast<double>(s_size - 1));
    for (std::int64_t i = 0; i < n; ++i) {
        const std::vector<Symbol>& drv = out.planted_drivers[source_cluster[i]];
        if (is_driver_site[i]) {
            for (std::int64_t t = 0; t < t_len; ++t) out.z(i, t) = drv[t];
            continue;
        }
        for (std::int64_t t = 0; t < t_len; ++t) {
            Symbol sym = drv[t];
            if (rng_noise.bernoulli(flip_prob)) {
                if (p.distinct_replacement_noise) {
                    const auto off = rng_noise.uniform_below(static_cast<std::uint64_t>(s_size - 1));
                    sym = static_cast<Symbol>(off + 1 < drv[t] ? off + 1 : off + 2);
                } else {
                    sym = static_cast<Symbol>(
                        1 + rng_noise.uniform_below(static_cast<std::uint64_t>(s_size)));
                }
            }
            out.z(i, t) = sym;
        }
    }
    out.z.validate();
    return out;
}

struct SweepConfig {
    SyntheticParams base;                 // defaults: N=100, T=51, S=4, D=5
    std::string param = "noise";          // one of: noise, n, t, s, d, confuser
    std::vector<double> values;           // ignored when param == "noise"
    std::vector<double> noise_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::int64_t repetitions = 10;
    std::uint64_t seed = 0;
};

struct SweepRow {
    std::string param;
    double value = 0.0;
    double noise = 0.0;
    std::int64_t rep = 0;
    double ami = 0.0;
    double eta = 0.0;
    std::int64_t selected_d = 0;
    double runtime_s = 0.0;
};

/// Per-(value, noise) cell aggregate: means with two-standard-error bars.
struct SweepCell {
    std::string param;
    double value = 0.0;
    double noise = 0.0;
    std::int64_t n_reps = 0;
    double mean_ami = 0.0, two_se_ami = 0.0;
    double mean_eta = 0.0, two_se_eta = 0.0;
    double mean_runtime_s = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<SweepCell> cells;
};

namespace detail {

inline SyntheticParams apply_sweep_value(SyntheticParams base, const std::string& param,
                                         double value) {
    if (param == "noise" || param.empty()) return base;
    if (param == "n")
        base.n_locations = static_cast<std::int64_t>(value);
    else if (param == "t")
        base.series_length = static_cast<std::int64_t>(value);
    else if (param == "s")
        base.alphabet_size = static_cast<std::int64_t>(value);
    else if (param == "d")
        base.n_clusters = static_cast<std::int64_t>(value);
    else if (param == "confuser")
        base.confuser_fraction = value;
    else
        throw std::runtime_error("sweep: unknown parameter '" + param + "'");
    return base;
}

inline void push_mean_se(std::span<const double> xs, double& mean, double& two_se) {
    const auto m = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    mean = sum / m;
    if (xs.size() < 2) {
        two_se = 0.0;
        return;
    }
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    two_se = 2.0 * std::sqrt(ss / (m - 1.0) / m);
}

}  // namespace detail

/// Runs generate + greedy_regionalize over a parameter/noise grid with
/// independent repetitions; per-run seeds derive deterministically from the
/// sweep seed. Returns both raw rows and per-cell summaries.
inline SweepResult sweep(const SweepConfig& cfg) {
    SweepResult out;
    const bool noise_is_param = cfg.param == "noise" || cfg.param.empty();
    const std::vector<double> values = noise_is_param ? std::vector<double>{0.0} : cfg.values;
    if (values.empty()) throw std::runtime_error("sweep: no parameter values given");
    if (cfg.noise_grid.empty()) throw std::runtime_error("sweep: empty noise grid");
    if (cfg.repetitions < 1) throw std::runtime_error("sweep: repetitions must be >= 1");

    std::uint64_t run_counter = 0;
    for (double value : values) {
        for (double noise : cfg.noise_grid) {
            std::vector<double> amis, etas, runtimes;
            for (std::int64_t rep = 0; rep < cfg.repetitions; ++rep) {
                SyntheticParams params =
                    detail::apply_sweep_value(cfg.base, noise_is_param ? "" : cfg.param, value);
                params.noise_level = noise;
                params.seed = Rng::substream(cfg.seed, run_counter++).next_u64();
                const SyntheticDataset data = generate(params);

                const auto t0 = std::chrono::steady_clock::now();
                auto [traj, part] = greedy_regionalize(data.z, data.graph);
                const auto t1 = std::chrono::steady_clock::now();
                const double runtime = std::chrono::duration<double>(t1 - t0).count();

                SweepRow row;
                row.param = noise_is_param ? "noise" : cfg.param;
                row.value = noise_is_param ? noise : value;
                row.noise = noise;
                row.rep = rep;
                row.ami = adjusted_mutual_information(
                    std::span<const std::uint32_t>(part.labels),
                    std::span<const std::uint32_t>(data.planted_labels));
                row.eta = traj.steps[traj.best_step_index].total_bits / traj.steps[0].total_bits;
                row.selected_d = static_cast<std::int64_t>(part.n_clusters());
                row.runtime_s = runtime;
                out.rows.push_back(row);
                amis.push_back(row.ami);
                etas.push_back(row.eta);
                runtimes.push_back(runtime);
            }
            SweepCell cell;
            cell.param = noise_is_param ? "noise" : cfg.param;
            cell.value = noise_is_param ? noise : value;
            cell.noise = noise;
            cell.n_reps = cfg.repetitions;
            detail::push_mean_se(amis, cell.mean_ami, cell.two_se_ami);
            detail::push_mean_se(etas, cell.mean_eta, cell.two_se_eta);
            double dummy = 0.0;
            detail::push_mean_se(runtimes, cell.mean_runtime_s, dummy);
            out.cells.push_back(cell);
        }
    }
    return out;
}

}  // namespace mdlregion
