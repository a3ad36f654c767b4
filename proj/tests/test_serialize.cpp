#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "mdlregion/optimizer.hpp"
#include "mdlregion/serialize.hpp"
#include "mdlregion/synthetic.hpp"

using namespace mdlregion;

namespace {

struct TempDir {
    std::filesystem::path dir;
    TempDir() {
        dir = std::filesystem::temp_directory_path() /
              ("mdlregion_serialize_" + std::to_string(::getpid()));
        std::filesystem::create_directories(dir);
    }
    ~TempDir() { std::filesystem::remove_all(dir); }
    std::string file(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

TEST_CASE("fnv1a64 matches published test vectors") {
    REQUIRE(fnv1a64("", 0) == 14695981039346656037ull);
    REQUIRE(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cull);
    REQUIRE(fnv1a64("foobar", 6) == 0x85944171f73967e8ull);
}

TEST_CASE("data hash is deterministic and sensitive") {
    SyntheticParams p;
    p.n_locations = 20;
    p.seed = 2;
    const SyntheticDataset d = generate(p);
    const std::uint64_t h = data_hash(d.z);
    REQUIRE(h == data_hash(d.z));

    SymbolMatrix tweaked = d.z;
    tweaked(3, 5) = tweaked(3, 5) == 1 ? Symbol{2} : Symbol{1};
    REQUIRE(data_hash(tweaked) != h);

    // identical symbol stream, different shape
    SymbolMatrix a(2, 3, 4), b(3, 2, 4);
    const std::vector<Symbol> stream = {1, 2, 3, 4, 1, 2};
    for (std::size_t k = 0; k < 6; ++k) {
        a(k / 3, k % 3) = stream[k];
        b(k / 2, k % 2) = stream[k];
    }
    REQUIRE(data_hash(a) != data_hash(b));
}

TEST_CASE("cluster summaries: sizes, mismatch rates and bit split") {
    SyntheticParams p;
    p.n_locations = 30;
    p.n_clusters = 3;
    p.noise_level = 0.2;
    p.seed = 21;
    const SyntheticDataset d = generate(p);
    const auto [trajectory, part] = greedy_regionalize(d.z, d.graph);
    const auto clusters = summarize_clusters(d.z, part);
    REQUIRE(clusters.size() == part.n_clusters());
    std::int64_t total = 0;
    double table = 0.0, member = 0.0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        REQUIRE(clusters[c].id == c + 1);
        REQUIRE(clusters[c].driver == part.drivers[c]);
        REQUIRE(clusters[c].mismatch_rate >= 0.0);
        REQUIRE(clusters[c].mismatch_rate <= 1.0);
        REQUIRE_THAT(clusters[c].bits, Catch::Matchers::WithinRel(
                                           clusters[c].table_bits + clusters[c].member_bits,
                                           1e-12));
        total += clusters[c].size;
        table += clusters[c].table_bits;
        member += clusters[c].member_bits;
    }
    REQUIRE(total == 30);
    REQUIRE_THAT(table, Catch::Matchers::WithinAbs(part.breakdown.table_bits, 1e-9));
    REQUIRE_THAT(member, Catch::Matchers::WithinAbs(part.breakdown.member_bits, 1e-9));
}

TEST_CASE("singleton clusters have zero mismatch") {
    SyntheticParams p;
    p.n_locations = 8;
    p.noise_level = 0.7;
    p.seed = 33;
    const SyntheticDataset d = generate(p);
    const Partition singles = regionalize_fixed_D(d.z, d.graph, 8);
    for (const auto& cs : summarize_clusters(d.z, singles)) {
        REQUIRE(cs.size == 1);
        REQUIRE(cs.mismatch_rate == 0.0);
        REQUIRE(cs.member_bits == 0.0);
    }
}

TEST_CASE("result documents round-trip through json") {
    SyntheticParams p;
    p.n_locations = 25;
    p.n_clusters = 4;
    p.noise_level = 0.15;
    p.seed = 77;
    const SyntheticDataset d = generate(p);
    const auto [trajectory, part] = greedy_regionalize(d.z, d.graph);
    const ResultDocument doc =
        make_result_document(d.z, d.graph, part, trajectory, p.seed, "--synthetic");

    const nlohmann::json j = serialize_result(doc);
    REQUIRE(j.at("meta").at("seed") == p.seed);
    REQUIRE(j.at("meta").at("flags") == "--synthetic");
    REQUIRE(j.at("meta").at("n_locations") == 25);
    REQUIRE(j.at("labels").size() == 25);
    REQUIRE(j.at("selected_d") == part.n_clusters());
    REQUIRE(j.contains("geojson"));
    REQUIRE(j.at("geojson").at("features").size() == 25);
    REQUIRE(j.at("trajectory").at("steps").size() == 25);

    const ResultDocument back = deserialize_result(j);
    REQUIRE(back.seed == doc.seed);
    REQUIRE(back.flags == doc.flags);
    REQUIRE(back.hash == doc.hash);
    REQUIRE(back.partition.labels == doc.partition.labels);
    REQUIRE(back.partition.drivers == doc.partition.drivers);
    REQUIRE(back.partition.breakdown.total_bits == doc.partition.breakdown.total_bits);
    REQUIRE(back.eta == doc.eta);
    REQUIRE(back.trajectory.best_step_index == doc.trajectory.best_step_index);
    REQUIRE(back.trajectory.steps.size() == doc.trajectory.steps.size());
    for (std::size_t k = 0; k < doc.trajectory.steps.size(); ++k) {
        REQUIRE(back.trajectory.steps[k].total_bits == doc.trajectory.steps[k].total_bits);
        REQUIRE(back.trajectory.steps[k].merged_a == doc.trajectory.steps[k].merged_a);
    }

    // serialization is deterministic
    REQUIRE(serialize_result(doc).dump(2) == j.dump(2));

    TempDir tmp;
    write_result_json(doc, tmp.file("result.json"));
    const ResultDocument from_file = read_result_json(tmp.file("result.json"));
    REQUIRE(from_file.partition.labels == doc.partition.labels);
    REQUIRE(from_file.partition.breakdown.total_bits == doc.partition.breakdown.total_bits);
    const std::string text = slurp(tmp.file("result.json"));
    REQUIRE(text.back() == '\n');
}

TEST_CASE("documents without coordinates omit geojson") {
    SymbolMatrix z(4, 6, 3);
    Rng rng(5);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t t = 0; t < 6; ++t)
            z(i, t) = static_cast<Symbol>(1 + rng.uniform_below(3));
    SpatialGraph path(4, {{0, 1}, {1, 2}, {2, 3}});
    const auto [trajectory, part] = greedy_regionalize(z, path);
    const ResultDocument doc = make_result_document(z, path, part, trajectory);
    const nlohmann::json j = serialize_result(doc);
    REQUIRE_FALSE(j.contains("geojson"));
    const ResultDocument back = deserialize_result(j);
    REQUIRE_FALSE(back.coordinates.has_value());
}

TEST_CASE("labels csv round-trips ids and clusters") {
    TempDir tmp;
    const std::vector<std::uint32_t> labels = {1, 2, 2, 1, 3};
    const std::vector<std::string> ids = {"a", "b", "c", "d", "e"};
    write_labels_csv(tmp.file("labels.csv"), labels, ids);
    const LabelTable table = read_labels_csv(tmp.file("labels.csv"));
    REQUIRE(table.ids == ids);
    REQUIRE(table.labels == labels);
    REQUIRE(slurp(tmp.file("labels.csv")).rfind("id,cluster\n", 0) == 0);

    // index fallback when no ids given
    write_labels_csv(tmp.file("plain.csv"), labels);
    const LabelTable plain = read_labels_csv(tmp.file("plain.csv"));
    REQUIRE(plain.ids == std::vector<std::string>{"0", "1", "2", "3", "4"});
    REQUIRE(plain.labels == labels);

    REQUIRE_THROWS_AS(read_labels_csv(tmp.file("missing.csv")), std::runtime_error);
}

TEST_CASE("trajectory csv lists one step per line") {
    TempDir tmp;
    MergeTrajectory trajectory;
    trajectory.steps.push_back({3, -1, -1, 100.0});
    trajectory.steps.push_back({2, 0, 2, 95.5});
    trajectory.steps.push_back({1, 0, 1, 99.25});
    trajectory.best_step_index = 1;
    write_trajectory_csv(tmp.file("trajectory.csv"), trajectory);
    const std::string text = slurp(tmp.file("trajectory.csv"));
    REQUIRE(text.rfind("D,merged_a,merged_b,total_bits\n", 0) == 0);
    REQUIRE(text.find("\n3,-1,-1,100\n") != std::string::npos);
    REQUIRE(text.find("\n2,0,2,95.5\n") != std::string::npos);
    REQUIRE(text.find("\n1,0,1,99.25\n") != std::string::npos);
}

TEST_CASE("edge lists round-trip and report bad lines") {
    TempDir tmp;
    SpatialGraph g(5, {{0, 1}, {1, 4}, {2, 3}});
    write_edge_list(tmp.file("edges.txt"), g);
    const std::vector<Edge> edges = read_edge_list(tmp.file("edges.txt"));
    REQUIRE(edges == g.edges());

    {
        std::ofstream out(tmp.file("bad.txt"));
        out << "0 1\n\n2 x\n";
    }
    REQUIRE_THROWS_WITH(read_edge_list(tmp.file("bad.txt")),
                        Catch::Matchers::ContainsSubstring("line 3"));

    {
        std::ofstream out(tmp.file("blank.txt"));
        out << "0 1\n\n1 2\n";
    }
    REQUIRE(read_edge_list(tmp.file("blank.txt")).size() == 2);
}

TEST_CASE("points csv keeps row order and rejects duplicates") {
    TempDir tmp;
    {
        std::ofstream out(tmp.file("pts.csv"));
        out << "id,x,y\r\nb, 1.5 ,2\na,-0.25,3e2\n\n";
    }
    const PointsTable pts = read_points_csv(tmp.file("pts.csv"));
    REQUIRE(pts.site_ids == std::vector<std::string>{"b", "a"});
    REQUIRE(pts.coordinates[0][0] == 1.5);
    REQUIRE(pts.coordinates[1][1] == 300.0);

    {
        std::ofstream out(tmp.file("dup.csv"));
        out << "id,x,y\na,0,0\na,1,1\n";
    }
    REQUIRE_THROWS_WITH(read_points_csv(tmp.file("dup.csv")),
                        Catch::Matchers::ContainsSubstring("duplicate site 'a'"));

    {
        std::ofstream out(tmp.file("hdr.csv"));
        out << "site,x,y\na,0,0\n";
    }
    REQUIRE_THROWS_WITH(read_points_csv(tmp.file("hdr.csv")),
                        Catch::Matchers::ContainsSubstring("id,x,y"));

    {
        std::ofstream out(tmp.file("badx.csv"));
        out << "id,x,y\na,zero,0\n";
    }
    REQUIRE_THROWS(read_points_csv(tmp.file("badx.csv")));
}

TEST_CASE("sweep csv headers and row counts") {
    TempDir tmp;
    SweepRow row;
    row.param = "noise";
    row.value = 0.1;
    row.noise = 0.1;
    row.rep = 0;
    row.ami = 0.95;
    row.eta = 0.5;
    row.selected_d = 5;
    row.runtime_s = 0.01;
    write_sweep_csv(tmp.file("rows.csv"), {row});
    const std::string rows_text = slurp(tmp.file("rows.csv"));
    REQUIRE(rows_text.rfind("param,value,noise,rep,ami,eta,selected_D,runtime_s\n", 0) == 0);
    REQUIRE(rows_text.find("noise,0.1,0.1,0,0.95,0.5,5,") != std::string::npos);

    SweepCell cell;
    cell.param = "noise";
    cell.value = 0.1;
    cell.noise = 0.1;
    cell.n_reps = 10;
    cell.mean_ami = 0.9;
    cell.two_se_ami = 0.02;
    cell.mean_eta = 0.4;
    cell.two_se_eta = 0.01;
    cell.mean_runtime_s = 0.05;
    write_sweep_summary_csv(tmp.file("cells.csv"), {cell});
    REQUIRE(slurp(tmp.file("cells.csv"))
                .rfind("param,value,noise,n_reps,mean_ami,two_se_ami,mean_eta,two_se_eta,"
                       "mean_runtime_s\n",
                       0) == 0);
}
