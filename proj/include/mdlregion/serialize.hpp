#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "mdlregion/cluster_state.hpp"
#include "mdlregion/ingest.hpp"
#include "mdlregion/optimizer.hpp"
#include "mdlregion/symbol_matrix.hpp"
#include "mdlregion/synthetic.hpp"

namespace mdlregion {

/// FNV-1a over an arbitrary byte stream.
inline std::uint64_t fnv1a64(const void* data, std::size_t n_bytes,
                             std::uint64_t h = 14695981039346656037ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n_bytes; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

/// Hash of the discretized dataset (dimensions plus symbol stream), recorded
/// in result documents so runs can be matched to their inputs.
inline std::uint64_t data_hash(const SymbolMatrix& z) {
    std::array<std::uint64_t, 3> dims = {z.n_series(), z.series_length(),
                                         static_cast<std::uint64_t>(z.alphabet_size())};
    std::uint64_t h = fnv1a64(dims.data(), sizeof(dims));
    return fnv1a64(z.values().data(), z.values().size(), h);
}

/// Per-cluster report row. mismatch_rate is the fraction of (member, time)
/// pairs whose symbol differs from the driver's.
struct ClusterSummary {
    std::uint32_t id = 0;
    std::int64_t size = 0;
    std::vector<Symbol> driver;
    double mismatch_rate = 0.0;
    double table_bits = 0.0;
    double member_bits = 0.0;
    double bits = 0.0;
};

inline std::vector<ClusterSummary> summarize_clusters(const SymbolMatrix& z,
                                                      const Partition& partition) {
    const std::size_t n = z.n_series(), t_len = z.series_length();
    const int s_size = z.alphabet_size();
    if (partition.labels.size() != n)
        throw std::invalid_argument("summarize_clusters: label count != series count");

    const std::size_t d = partition.n_clusters();
    std::vector<ClusterSummary> out(d);
    std::vector<std::vector<std::uint32_t>> counts(
        d, std::vector<std::uint32_t>(t_len * s_size, 0));
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t label = partition.labels[i];  // labels run 1..D
        if (label < 1 || label > d)
            throw std::invalid_argument("summarize_clusters: label out of range");
        ++out[label - 1].size;
        auto& cnt = counts[label - 1];
        for (std::size_t t = 0; t < t_len; ++t) ++cnt[t * s_size + (z(i, t) - 1)];
    }
    for (std::size_t c = 0; c < d; ++c) {
        ClusterSummary& cs = out[c];
        cs.id = static_cast<std::uint32_t>(c + 1);
        cs.driver = partition.drivers[c];
        std::vector<std::int64_t> marginals, contingency;
        cluster_cost_for_driver(cs.driver, counts[c], cs.size, s_size, &marginals, &contingency);
        cs.table_bits = table_cost(marginals, cs.size, s_size);
        cs.member_bits = member_cost(contingency, s_size);
        cs.bits = cs.table_bits + cs.member_bits;
        std::int64_t matches = 0;
        for (int r = 0; r < s_size; ++r) matches += contingency[r * s_size + r];
        cs.mismatch_rate =
            1.0 - static_cast<double>(matches) / (static_cast<double>(cs.size) * t_len);
    }
    return out;
}

/// Everything one regionalization run produces. Serialization is
/// deterministic: no timestamps, objects dump with sorted keys, doubles
/// round-trip exactly.
struct ResultDocument {
    std::uint64_t seed = 0;
    std::string flags;
    std::uint64_t hash = 0;
    std::size_t n_locations = 0;
    std::size_t series_length = 0;
    int alphabet_size = 0;
    std::vector<std::string> site_ids;                       // may be empty
    std::optional<std::vector<std::array<double, 2>>> coordinates;
    Partition partition;
    std::vector<ClusterSummary> clusters;
    MergeTrajectory trajectory;
    double eta = 0.0;
};

inline ResultDocument make_result_document(const SymbolMatrix& z, const SpatialGraph& g,
                                           const Partition& partition,
                                           const MergeTrajectory& trajectory,
                                           std::uint64_t seed = 0, std::string flags = {}) {
    ResultDocument doc;
    doc.seed = seed;
    doc.flags = std::move(flags);
    doc.hash = data_hash(z);
    doc.n_locations = z.n_series();
    doc.series_length = z.series_length();
    doc.alphabet_size = z.alphabet_size();
    if (g.has_coordinates()) doc.coordinates = g.coordinates();
    doc.partition = partition;
    doc.clusters = summarize_clusters(z, partition);
    doc.trajectory = trajectory;
    if (!trajectory.steps.empty())
        doc.eta = trajectory.steps[trajectory.best_step_index].total_bits /
                  trajectory.steps.front().total_bits;
    return doc;
}

namespace detail {

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::uint64_t parse_hex64(const std::string& s) {
    return std::strtoull(s.c_str(), nullptr, 16);
}

inline nlohmann::json geojson_points(const std::vector<std::array<double, 2>>& coords,
                                     const std::vector<std::string>& site_ids,
                                     std::span<const std::uint32_t> labels) {
    nlohmann::json features = nlohmann::json::array();
    for (std::size_t i = 0; i < coords.size(); ++i) {
        nlohmann::json props;
        props["cluster"] = labels[i];
        props["id"] = i < site_ids.size() ? site_ids[i] : std::to_string(i);
        features.push_back({{"type", "Feature"},
                            {"geometry",
                             {{"type", "Point"}, {"coordinates", {coords[i][0], coords[i][1]}}}},
                            {"properties", props}});
    }
    return {{"type", "FeatureCollection"}, {"features", features}};
}

}  // namespace detail

inline nlohmann::json serialize_result(const ResultDocument& doc) {
    nlohmann::json j;
    j["meta"] = {{"seed", doc.seed},
                 {"flags", doc.flags},
                 {"data_hash", detail::hex64(doc.hash)},
                 {"n_locations", doc.n_locations},
                 {"series_length", doc.series_length},
                 {"alphabet_size", doc.alphabet_size}};
    j["selected_d"] = doc.partition.n_clusters();
    j["eta"] = doc.eta;
    const CodelengthBreakdown& b = doc.partition.breakdown;
    j["breakdown"] = {{"spanning_tree_bits", b.spanning_tree_bits},
                      {"partition_choice_bits", b.partition_choice_bits},
                      {"driver_bits", b.driver_bits},
                      {"table_bits", b.table_bits},
                      {"member_bits", b.member_bits},
                      {"total_bits", b.total_bits}};
    j["labels"] = doc.partition.labels;
    if (!doc.site_ids.empty()) j["site_ids"] = doc.site_ids;

    nlohmann::json clusters = nlohmann::json::array();
    for (const ClusterSummary& c : doc.clusters)
        clusters.push_back({{"id", c.id},
                            {"size", c.size},
                            {"driver", c.driver},
                            {"mismatch_rate", c.mismatch_rate},
                            {"table_bits", c.table_bits},
                            {"member_bits", c.member_bits},
                            {"bits", c.bits}});
    j["clusters"] = clusters;

    nlohmann::json steps = nlohmann::json::array();
    for (const TrajectoryStep& s : doc.trajectory.steps)
        steps.push_back({s.n_clusters, s.merged_a, s.merged_b, s.total_bits});
    j["trajectory"] = {{"best_step_index", doc.trajectory.best_step_index}, {"steps", steps}};

    if (doc.coordinates)
        j["geojson"] = detail::geojson_points(*doc.coordinates, doc.site_ids,
                                              doc.partition.labels);
    return j;
}

inline ResultDocument deserialize_result(const nlohmann::json& j) {
    ResultDocument doc;
    const auto& meta = j.at("meta");
    doc.seed = meta.at("seed").get<std::uint64_t>();
    doc.flags = meta.at("flags").get<std::string>();
    doc.hash = detail::parse_hex64(meta.at("data_hash").get<std::string>());
    doc.n_locations = meta.at("n_locations").get<std::size_t>();
    doc.series_length = meta.at("series_length").get<std::size_t>();
    doc.alphabet_size = meta.at("alphabet_size").get<int>();
    doc.eta = j.at("eta").get<double>();
    if (j.contains("site_ids")) doc.site_ids = j.at("site_ids").get<std::vector<std::string>>();

    const auto& b = j.at("breakdown");
    doc.partition.breakdown.spanning_tree_bits = b.at("spanning_tree_bits").get<double>();
    doc.partition.breakdown.partition_choice_bits = b.at("partition_choice_bits").get<double>();
    doc.partition.breakdown.driver_bits = b.at("driver_bits").get<double>();
    doc.partition.breakdown.table_bits = b.at("table_bits").get<double>();
    doc.partition.breakdown.member_bits = b.at("member_bits").get<double>();
    doc.partition.breakdown.total_bits = b.at("total_bits").get<double>();
    doc.partition.labels = j.at("labels").get<std::vector<std::uint32_t>>();

    for (const auto& cj : j.at("clusters")) {
        ClusterSummary c;
        c.id = cj.at("id").get<std::uint32_t>();
        c.size = cj.at("size").get<std::int64_t>();
        c.driver = cj.at("driver").get<std::vector<Symbol>>();
        c.mismatch_rate = cj.at("mismatch_rate").get<double>();
        c.table_bits = cj.at("table_bits").get<double>();
        c.member_bits = cj.at("member_bits").get<double>();
        c.bits = cj.at("bits").get<double>();
        doc.clusters.push_back(std::move(c));
        doc.partition.drivers.push_back(doc.clusters.back().driver);
    }

    const auto& tj = j.at("trajectory");
    doc.trajectory.best_step_index = tj.at("best_step_index").get<std::size_t>();
    for (const auto& sj : tj.at("steps")) {
        TrajectoryStep s;
        s.n_clusters = sj.at(0).get<std::int64_t>();
        s.merged_a = sj.at(1).get<std::int64_t>();
        s.merged_b = sj.at(2).get<std::int64_t>();
        s.total_bits = sj.at(3).get<double>();
        doc.trajectory.steps.push_back(s);
    }

    if (j.contains("geojson")) {
        std::vector<std::array<double, 2>> coords;
        for (const auto& f : j.at("geojson").at("features")) {
            const auto& xy = f.at("geometry").at("coordinates");
            coords.push_back({xy.at(0).get<double>(), xy.at(1).get<double>()});
        }
        doc.coordinates = std::move(coords);
    }
    return doc;
}

inline void write_result_json(const ResultDocument& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << serialize_result(doc).dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: '" + path + "'");
}

inline ResultDocument read_result_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    nlohmann::json j;
    in >> j;
    return deserialize_result(j);
}

namespace detail {

/// Shortest exact decimal for CSV output.
inline std::string fmt_double(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

}  // namespace detail

/// `id,cluster` rows, one per site. Empty site_ids fall back to row indices.
inline void write_labels_csv(const std::string& path, std::span<const std::uint32_t> labels,
                             const std::vector<std::string>& site_ids = {}) {
    if (!site_ids.empty() && site_ids.size() != labels.size())
        throw std::invalid_argument("write_labels_csv: id count != label count");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "id,cluster\n";
    for (std::size_t i = 0; i < labels.size(); ++i)
        out << (site_ids.empty() ? std::to_string(i) : site_ids[i]) << ',' << labels[i] << '\n';
    if (!out) throw std::runtime_error("write failed: '" + path + "'");
}

struct LabelTable {
    std::vector<std::string> ids;
    std::vector<std::uint32_t> labels;
};

inline LabelTable read_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    bool ok = false;
    std::string header = detail::read_line_crlf(in, ok);
    if (!ok || detail::split_csv_line(header).size() != 2)
        throw std::runtime_error("labels CSV: expected header id,cluster: " + path);
    LabelTable table;
    for (;;) {
        std::string line = detail::read_line_crlf(in, ok);
        if (!ok) break;
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != 2)
            throw std::runtime_error("labels CSV: expected 2 fields: " + path);
        table.ids.push_back(detail::trim(fields[0]));
        table.labels.push_back(
            static_cast<std::uint32_t>(std::stoul(detail::trim(fields[1]))));
    }
    return table;
}

/// `D,merged_a,merged_b,total_bits` rows, one per trajectory step. The first
/// step (all singletons) carries the -1,-1 sentinel.
inline void write_trajectory_csv(const std::string& path, const MergeTrajectory& trajectory) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "D,merged_a,merged_b,total_bits\n";
    for (const TrajectoryStep& s : trajectory.steps)
        out << s.n_clusters << ',' << s.merged_a << ',' << s.merged_b << ','
            << detail::fmt_double(s.total_bits) << '\n';
    if (!out) throw std::runtime_error("write failed: '" + path + "'");
}

/// One `i j` pair per line, 0-based ids, blank lines skipped.
inline std::vector<Edge> read_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<Edge> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream row(line);
        long long a = 0, b = 0;
        if (!(row >> a)) continue;
        if (!(row >> b) || a < 0 || b < 0)
            throw std::runtime_error("edge list line " + std::to_string(line_no) +
                                     ": expected two node ids: " + path);
        edges.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b)});
    }
    return edges;
}

inline void write_edge_list(const std::string& path, const SpatialGraph& g) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    for (auto [a, b] : g.edges()) out << a << ' ' << b << '\n';
    if (!out) throw std::runtime_error("write failed: '" + path + "'");
}

struct PointsTable {
    std::vector<std::string> site_ids;
    std::vector<std::array<double, 2>> coordinates;
};

/// Site coordinates from a CSV with header `id,x,y`. Row order is kept;
/// duplicate ids are rejected.
inline PointsTable read_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("points CSV: empty input: " + path);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    auto cols = detail::split_csv_line(header);
    for (auto& c : cols) c = detail::trim(c);
    if (cols.size() != 3 || cols[0] != "id" || cols[1] != "x" || cols[2] != "y")
        throw std::runtime_error("points CSV: header must be id,x,y");

    PointsTable table;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != 3)
            throw std::runtime_error("points CSV line " + std::to_string(line_no) +
                                     ": expected 3 fields");
        const std::string id = detail::trim(fields[0]);
        if (!seen.insert(id).second)
            throw std::runtime_error("points CSV line " + std::to_string(line_no) +
                                     ": duplicate site '" + id + "'");
        table.site_ids.push_back(id);
        table.coordinates.push_back(
            {detail::parse_coordinate(detail::trim(fields[1]), "x", line_no),
             detail::parse_coordinate(detail::trim(fields[2]), "y", line_no)});
    }
    return table;
}

inline void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "param,value,noise,rep,ami,eta,selected_D,runtime_s\n";
    for (const SweepRow& r : rows)
        out << r.param << ',' << detail::fmt_double(r.value) << ','
            << detail::fmt_double(r.noise) << ',' << r.rep << ',' << detail::fmt_double(r.ami)
            << ',' << detail::fmt_double(r.eta) << ',' << r.selected_d << ','
            << detail::fmt_double(r.runtime_s) << '\n';
    if (!out) throw std::runtime_error("write failed: '" + path + "'");
}

inline void write_sweep_summary_csv(const std::string& path,
                                    const std::vector<SweepCell>& cells) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "param,value,noise,n_reps,mean_ami,two_se_ami,mean_eta,two_se_eta,mean_runtime_s\n";
    for (const SweepCell& c : cells)
        out << c.param << ',' << detail::fmt_double(c.value) << ','
            << detail::fmt_double(c.noise) << ',' << c.n_reps << ','
            << detail::fmt_double(c.mean_ami) << ',' << detail::fmt_double(c.two_se_ami) << ','
            << detail::fmt_double(c.mean_eta) << ',' << detail::fmt_double(c.two_se_eta) << ','
            << detail::fmt_double(c.mean_runtime_s) << '\n';
    if (!out) throw std::runtime_error("write failed: '" + path + "'");
}

}  // namespace mdlregion
