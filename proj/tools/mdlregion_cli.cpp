// Command-line front end: regionalize CSV time series, generate synthetic
// benchmarks, run exhaustive search on small inputs, sweep parameter grids,
// and compare labelings.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mdlregion/mdlregion.hpp"

using namespace mdlregion;

namespace {

struct RegionalizeOptions {
    std::string input;
    std::string adjacency;
    int bins = 8;
    std::string categorical;
    std::int64_t fixed_d = 0;
    bool skip_tree_count = false;
    double min_completeness = 0.8;
    std::string labels_csv;
    std::string trajectory_csv;
    std::string out;
};

struct LoadedInput {
    SymbolMatrix z;
    SpatialGraph graph;
    std::vector<std::string> site_ids;
    std::string flags;
};

/// Shared ingestion path: CSV -> completeness filter -> symbols + adjacency.
/// Adjacency files index sites by their row order after filtering.
LoadedInput load_input(const RegionalizeOptions& opt) {
    RawSeriesTable table = read_series_csv(opt.input);
    std::vector<std::string> removed;
    table = filter_completeness(table, opt.min_completeness, &removed);
    for (const std::string& id : removed)
        std::cerr << "dropped site '" << id << "': below completeness threshold\n";

    LoadedInput loaded;
    std::ostringstream flags;
    if (!opt.categorical.empty()) {
        const auto categories = read_category_list(opt.categorical);
        loaded.z = passthrough_categorical(table, categories);
        flags << "--categorical " << opt.categorical;
    } else {
        table = interpolate_missing(table);
        bool constant = false;
        loaded.z = discretize_uniform(table, opt.bins, &constant);
        if (constant)
            std::cerr << "warning: input is constant; every symbol is 1\n";
        flags << "--bins " << opt.bins;
    }

    if (!opt.adjacency.empty()) {
        auto edges = read_edge_list(opt.adjacency);
        loaded.graph = SpatialGraph(table.n_sites(), std::move(edges), table.coordinates);
        flags << " --adjacency " << opt.adjacency;
    } else {
        loaded.graph = build_delaunay_adjacency(table.coordinates);
    }
    if (opt.skip_tree_count) flags << " --skip-tree-count";
    if (opt.fixed_d > 0) flags << " --fixed-D " << opt.fixed_d;
    loaded.site_ids = table.site_ids;
    loaded.flags = flags.str();
    return loaded;
}

void write_outputs(const RegionalizeOptions& opt, const LoadedInput& loaded,
                   const Partition& part, const MergeTrajectory& trajectory) {
    ResultDocument doc =
        make_result_document(loaded.z, loaded.graph, part, trajectory, 0, loaded.flags);
    doc.site_ids = loaded.site_ids;
    write_result_json(doc, opt.out);
    std::cout << "D = " << part.n_clusters() << ", total " << part.breakdown.total_bits
              << " bits, eta " << doc.eta << "\n";
    if (!opt.labels_csv.empty()) write_labels_csv(opt.labels_csv, part.labels, loaded.site_ids);
    if (!opt.trajectory_csv.empty()) write_trajectory_csv(opt.trajectory_csv, trajectory);
}

/// Baseline-plus-selected stub for runs that do not record a full merge
/// trajectory; keeps the document's eta meaning the same as a greedy run's.
MergeTrajectory two_point_trajectory(const LoadedInput& loaded, const Partition& part) {
    const double st_bits = part.breakdown.spanning_tree_bits;
    std::vector<std::uint32_t> singleton_labels(loaded.z.n_series());
    for (std::size_t i = 0; i < singleton_labels.size(); ++i)
        singleton_labels[i] = static_cast<std::uint32_t>(i + 1);
    const Partition baseline =
        evaluate_partition(loaded.z, loaded.graph, singleton_labels, st_bits);
    MergeTrajectory trajectory;
    trajectory.steps.push_back({static_cast<std::int64_t>(loaded.z.n_series()), -1, -1,
                                baseline.breakdown.total_bits});
    trajectory.steps.push_back({static_cast<std::int64_t>(part.n_clusters()), -1, -1,
                                part.breakdown.total_bits});
    trajectory.best_step_index =
        part.breakdown.total_bits < baseline.breakdown.total_bits ? 1 : 0;
    return trajectory;
}

int run_regionalize(const RegionalizeOptions& opt) {
    const LoadedInput loaded = load_input(opt);
    GreedyOptions greedy_opts;
    greedy_opts.skip_tree_count = opt.skip_tree_count;
    if (opt.fixed_d > 0) {
        const Partition part =
            regionalize_fixed_D(loaded.z, loaded.graph, opt.fixed_d, greedy_opts);
        write_outputs(opt, loaded, part, two_point_trajectory(loaded, part));
    } else {
        const auto [trajectory, part] = greedy_regionalize(loaded.z, loaded.graph, greedy_opts);
        write_outputs(opt, loaded, part, trajectory);
    }
    return 0;
}

int run_exact(const RegionalizeOptions& opt) {
    const LoadedInput loaded = load_input(opt);
    const Partition part = exact_regionalize(loaded.z, loaded.graph);
    write_outputs(opt, loaded, part, two_point_trajectory(loaded, part));
    return 0;
}

struct SynthOptions {
    std::int64_t n = 100;
    std::int64_t t = 51;
    std::int64_t s = 4;
    std::int64_t d = 5;
    double noise = 0.0;
    double confuser_fraction = 0.0;
    bool distinct_replacement_noise = false;
    std::uint64_t seed = 0;
    std::string out;
    std::string labels_out;
    std::string edges_out;
};

int run_synth(const SynthOptions& opt) {
    SyntheticParams p;
    p.n_locations = opt.n;
    p.series_length = opt.t;
    p.alphabet_size = opt.s;
    p.n_clusters = opt.d;
    p.noise_level = opt.noise;
    p.confuser_fraction = opt.confuser_fraction;
    p.distinct_replacement_noise = opt.distinct_replacement_noise;
    p.seed = opt.seed;
    const SyntheticDataset data = generate(p);

    std::ofstream out(opt.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + opt.out + "' for writing");
    out << "id,x,y";
    for (std::int64_t t = 1; t <= opt.t; ++t) out << ",t" << t;
    out << "\n";
    char coord[64];
    for (std::size_t i = 0; i < data.z.n_series(); ++i) {
        out << i;
        std::snprintf(coord, sizeof(coord), ",%.17g,%.17g", data.points[i][0],
                      data.points[i][1]);
        out << coord;
        for (std::size_t t = 0; t < data.z.series_length(); ++t)
            out << ',' << static_cast<int>(data.z(i, t));
        out << "\n";
    }
    out.close();
    if (!out) throw std::runtime_error("write failed: '" + opt.out + "'");

    if (!opt.labels_out.empty()) {
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < data.z.n_series(); ++i) ids.push_back(std::to_string(i));
        write_labels_csv(opt.labels_out, data.planted_labels, ids);
    }
    if (!opt.edges_out.empty()) write_edge_list(opt.edges_out, data.graph);
    std::cout << "wrote " << data.z.n_series() << " series of length "
              << data.z.series_length() << " over " << data.planted_drivers.size()
              << " clusters\n";
    return 0;
}

SweepConfig parse_sweep_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    SweepConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    const auto parse_list = [](const std::string& text) {
        std::vector<double> values;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ','))
            values.push_back(std::stod(item));
        return values;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const std::size_t eq = line.find('=');
        std::string key = detail::trim(eq == std::string::npos ? line : line.substr(0, eq));
        if (key.empty()) continue;
        if (eq == std::string::npos)
            throw std::runtime_error("sweep config line " + std::to_string(line_no) +
                                     ": expected key=value");
        const std::string value = detail::trim(line.substr(eq + 1));
        try {
            if (key == "n") cfg.base.n_locations = std::stoll(value);
            else if (key == "t") cfg.base.series_length = std::stoll(value);
            else if (key == "s") cfg.base.alphabet_size = std::stoll(value);
            else if (key == "d") cfg.base.n_clusters = std::stoll(value);
            else if (key == "confuser") cfg.base.confuser_fraction = std::stod(value);
            else if (key == "distinct_replacement_noise")
                cfg.base.distinct_replacement_noise = std::stoll(value) != 0;
            else if (key == "param") cfg.param = value;
            else if (key == "values") cfg.values = parse_list(value);
            else if (key == "noise_grid") cfg.noise_grid = parse_list(value);
            else if (key == "repetitions") cfg.repetitions = std::stoll(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else
                throw std::runtime_error("unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw std::runtime_error("sweep config line " + std::to_string(line_no) +
                                     ": bad value for '" + key + "'");
        }
    }
    return cfg;
}

std::string summary_path_for(const std::string& out) {
    const std::string suffix = ".csv";
    if (out.size() > suffix.size() &&
        out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0)
        return out.substr(0, out.size() - suffix.size()) + ".summary.csv";
    return out + ".summary.csv";
}

int run_sweep(const std::string& config_path, const std::string& out,
              std::string summary_out) {
    const SweepConfig cfg = parse_sweep_config(config_path);
    const SweepResult res = sweep(cfg);
    write_sweep_csv(out, res.rows);
    if (summary_out.empty()) summary_out = summary_path_for(out);
    write_sweep_summary_csv(summary_out, res.cells);
    std::cout << res.rows.size() << " runs -> " << out << ", summary -> " << summary_out
              << "\n";
    return 0;
}

int run_eval_ami(const std::string& path_a, const std::string& path_b) {
    const LabelTable a = read_labels_csv(path_a);
    const LabelTable b = read_labels_csv(path_b);
    std::map<std::string, std::uint32_t> by_id;
    for (std::size_t i = 0; i < b.ids.size(); ++i)
        if (!by_id.emplace(b.ids[i], b.labels[i]).second)
            throw std::runtime_error("duplicate id '" + b.ids[i] + "' in " + path_b);
    std::vector<std::uint32_t> la, lb;
    for (std::size_t i = 0; i < a.ids.size(); ++i) {
        const auto it = by_id.find(a.ids[i]);
        if (it == by_id.end())
            throw std::runtime_error("id '" + a.ids[i] + "' missing from " + path_b);
        la.push_back(a.labels[i]);
        lb.push_back(it->second);
    }
    const double ami = adjusted_mutual_information(std::span<const std::uint32_t>(la),
                                                   std::span<const std::uint32_t>(lb));
    std::printf("%.12g\n", ami);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Codelength-minimizing regionalization of spatial time series"};
    app.require_subcommand(1);

    RegionalizeOptions reg_opt;
    CLI::App* reg = app.add_subcommand("regionalize",
                                       "Cluster a CSV of located time series");
    reg->add_option("--input", reg_opt.input, "wide or long series CSV")->required();
    reg->add_option("--adjacency", reg_opt.adjacency,
                    "edge list file (one 'i j' pair per line, 0-based row indices); "
                    "default: Delaunay neighbors of the site coordinates");
    auto* bins_opt = reg->add_option("--bins", reg_opt.bins,
                                     "uniform bins for numeric data (2-255)");
    auto* cat_opt = reg->add_option("--categorical", reg_opt.categorical,
                                    "category list file; values pass through as symbols");
    bins_opt->excludes(cat_opt);
    cat_opt->excludes(bins_opt);
    reg->add_option("--fixed-D", reg_opt.fixed_d, "stop at this cluster count");
    reg->add_flag("--skip-tree-count", reg_opt.skip_tree_count,
                  "omit the constant spanning-tree term");
    reg->add_option("--min-completeness", reg_opt.min_completeness,
                    "drop sites observed on less than this fraction of time steps");
    reg->add_option("--labels-csv", reg_opt.labels_csv, "also write id,cluster CSV here");
    reg->add_option("--trajectory-csv", reg_opt.trajectory_csv,
                    "also write the merge trajectory CSV here");
    reg->add_option("--out", reg_opt.out, "result JSON path")->required();

    RegionalizeOptions exact_opt;
    CLI::App* exact = app.add_subcommand("exact",
                                         "Exhaustive search over connected partitions (N <= 12)");
    exact->add_option("--input", exact_opt.input, "wide or long series CSV")->required();
    exact->add_option("--adjacency", exact_opt.adjacency, "edge list file");
    auto* ebins = exact->add_option("--bins", exact_opt.bins, "uniform bins for numeric data");
    auto* ecat = exact->add_option("--categorical", exact_opt.categorical, "category list file");
    ebins->excludes(ecat);
    ecat->excludes(ebins);
    exact->add_option("--min-completeness", exact_opt.min_completeness,
                      "completeness threshold");
    exact->add_option("--labels-csv", exact_opt.labels_csv, "also write id,cluster CSV here");
    exact->add_option("--out", exact_opt.out, "result JSON path")->required();

    SynthOptions synth_opt;
    CLI::App* synth = app.add_subcommand("synth", "Generate a planted benchmark dataset");
    synth->add_option("--n", synth_opt.n, "locations");
    synth->add_option("--t", synth_opt.t, "series length");
    synth->add_option("--s", synth_opt.s, "alphabet size");
    synth->add_option("--d", synth_opt.d, "planted clusters");
    synth->add_option("--noise", synth_opt.noise, "corruption rate in [0, 1]");
    synth->add_option("--confuser-fraction", synth_opt.confuser_fraction,
                      "fraction of sites fed another cluster's driver");
    synth->add_flag("--distinct-replacement-noise", synth_opt.distinct_replacement_noise,
                    "corrupt by drawing from the other S-1 symbols");
    synth->add_option("--seed", synth_opt.seed, "generator seed");
    synth->add_option("--out", synth_opt.out, "wide CSV output path")->required();
    synth->add_option("--labels-out", synth_opt.labels_out, "planted labels CSV path");
    synth->add_option("--edges-out", synth_opt.edges_out, "adjacency edge list path");

    std::string sweep_config, sweep_out, sweep_summary;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a parameter/noise grid");
    sweep_cmd->add_option("--config", sweep_config, "key=value config file")->required();
    sweep_cmd->add_option("--out", sweep_out, "per-run CSV path")->required();
    sweep_cmd->add_option("--summary-out", sweep_summary,
                          "per-cell summary CSV path (default: <out>.summary.csv)");

    std::string ami_a, ami_b;
    CLI::App* eval = app.add_subcommand("eval-ami",
                                        "Adjusted mutual information of two labelings");
    eval->add_option("--a", ami_a, "first id,cluster CSV")->required();
    eval->add_option("--b", ami_b, "second id,cluster CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (reg->parsed()) return run_regionalize(reg_opt);
        if (exact->parsed()) return run_exact(exact_opt);
        if (synth->parsed()) return run_synth(synth_opt);
        if (sweep_cmd->parsed()) return run_sweep(sweep_config, sweep_out, sweep_summary);
        if (eval->parsed()) return run_eval_ami(ami_a, ami_b);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
