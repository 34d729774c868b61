#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "facegraph/benchmark.hpp"
#include "facegraph/community.hpp"
#include "facegraph/error.hpp"
#include "facegraph/graph_builder.hpp"
#include "facegraph/graph_io.hpp"
#include "facegraph/identity_resolver.hpp"
#include "facegraph/manifest.hpp"
#include "facegraph/resolution_io.hpp"
#include "facegraph/synthetic.hpp"

namespace facegraph::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

/// Raised to abort a command with a stage-named diagnostic.
struct StageError : std::runtime_error {
    StageError(std::string stage, const std::string& what)
        : std::runtime_error(what), stage(std::move(stage)) {}
    std::string stage;
};

struct Settings {
    std::string backend = "flat";
    double threshold = kDefaultMatchThreshold;
    std::size_t nlist = 0;
    std::size_t expected_size = 0;
    std::size_t m = 8;
    std::size_t nprobe = 8;
    std::size_t train_min = 1024;
    std::uint64_t seed = 1;
    bool strict_dup_faces = false;
    bool unweighted = false;
    double louvain_resolution = 1.0;
    std::string out = ".";
    bool config_dump = false;

    std::string input;
    std::string resolution_file;  // communities: optional, for isolate accounting

    // bench
    std::vector<std::size_t> sizes{1000, 2000, 4000, 8000, 16000};
    std::vector<std::string> backends{"naive", "flat", "ivfpq"};
    double faces_per_identity = 3.0;
    std::size_t min_faces = 1;
    std::size_t max_faces = 4;
    double noise_radius = 0.2;
    double separation = 1.2;

    // synth
    std::size_t identities = 10;
    std::size_t images = 100;
};

IndexConfig index_config(const Settings& s) {
    IndexConfig cfg;
    cfg.backend = parse_backend(s.backend);
    cfg.nlist = s.nlist;
    cfg.expected_size = s.expected_size;
    cfg.m = s.m;
    cfg.nprobe = s.nprobe;
    cfg.train_min = s.train_min;
    cfg.seed = s.seed;
    return cfg;
}

ResolveOptions resolve_options(const Settings& s) {
    ResolveOptions ro;
    ro.threshold = s.threshold;
    ro.strict_duplicate_faces = s.strict_dup_faces;
    return ro;
}

LouvainOptions louvain_options(const Settings& s) {
    LouvainOptions lo;
    lo.seed = s.seed;
    lo.resolution = s.louvain_resolution;
    lo.weighted = !s.unweighted;
    return lo;
}

BenchmarkOptions bench_options(const Settings& s) {
    BenchmarkOptions b;
    b.sizes = s.sizes;
    b.backends.clear();
    for (const auto& name : s.backends) b.backends.push_back(parse_bench_backend(name));
    b.faces_per_identity = s.faces_per_identity;
    b.min_faces = s.min_faces;
    b.max_faces = s.max_faces;
    b.noise_radius = s.noise_radius;
    b.separation = s.separation;
    b.threshold = s.threshold;
    b.ivfpq = index_config(s);
    b.ivfpq.backend = Backend::IvfPq;
    b.seed = s.seed;
    return b;
}

ordered_json index_json(const IndexConfig& cfg) {
    ordered_json j;
    j["backend"] = to_string(cfg.backend);
    if (cfg.backend == Backend::IvfPq) {
        j["nlist"] = cfg.nlist == 0 ? ordered_json("auto") : ordered_json(cfg.nlist);
        j["expected_size"] = cfg.expected_size;
        j["m"] = cfg.m;
        j["nbits"] = 8;
        j["nprobe"] = cfg.nprobe;
        j["train_min"] = cfg.train_min;
        j["kmeans_iterations"] = cfg.kmeans_iterations;
        j["kmeans_tolerance"] = cfg.kmeans_tolerance;
    }
    j["seed"] = cfg.seed;
    return j;
}

ordered_json config_json(const std::string& command, const Settings& s) {
    ordered_json j;
    j["version"] = kVersion;
    j["command"] = command;
    if (!s.input.empty()) j["input"] = s.input;
    j["out"] = s.out;
    j["seed"] = s.seed;
    if (command == "resolve" || command == "pipeline") {
        j["threshold"] = s.threshold;
        j["strict_dup_faces"] = s.strict_dup_faces;
        j["index"] = index_json(index_config(s));
    }
    if (command == "communities" || command == "pipeline") {
        j["louvain"] = {{"seed", s.seed},
                        {"resolution", s.louvain_resolution},
                        {"weighted", !s.unweighted}};
        if (!s.resolution_file.empty()) j["resolution_file"] = s.resolution_file;
    }
    if (command == "bench") {
        const auto b = bench_options(s);
        j["threshold"] = s.threshold;
        j["sizes"] = s.sizes;
        j["backends"] = s.backends;
        j["faces_per_identity"] = s.faces_per_identity;
        j["faces_per_image"] = {s.min_faces, s.max_faces};
        j["noise_radius"] = s.noise_radius;
        j["separation"] = s.separation;
        j["ivfpq"] = index_json(b.ivfpq);
    }
    if (command == "synth") {
        j["identities"] = s.identities;
        j["images"] = s.images;
        j["faces_per_image"] = {s.min_faces, s.max_faces};
        j["noise_radius"] = s.noise_radius;
        j["separation"] = s.separation;
    }
    return j;
}

void check_threshold(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw InvalidArgument("--threshold must be a positive finite number, got " + std::to_string(t));
    }
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoFailure("cannot create output directory '" + dir.string() + "'");
    }
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoFailure("cannot write '" + path.string() + "'");
    fn(f);
    if (!f) throw IoFailure("write error on '" + path.string() + "'");
}

// ---- stages ---------------------------------------------------------------

void do_resolve(const Settings& s, std::ostream& out) {
    check_threshold(s.threshold);
    const auto cfg = index_config(s);
    cfg.validate();
    const auto ro = resolve_options(s);
    ro.validate();

    const auto manifest = load_manifest(s.input);
    auto res = resolve_archive(manifest, cfg, ro);
    const fs::path dir(s.out);
    ensure_dir(dir);
    save_resolution(dir / "resolution.jsonl", res.images);
    save_registry(dir / "registry.jsonl", res.registry);
    out << "resolve: " << manifest.image_count() << " images, " << manifest.face_count()
        << " faces -> " << res.registry.size() << " identities (" << to_string(cfg.backend)
        << ")\n";
}

void do_graph(const Settings& s, std::ostream& out) {
    const auto resolved = load_resolution(s.input);
    const auto graph = build_graph(resolved, identity_count(resolved));
    const fs::path dir(s.out);
    ensure_dir(dir);
    save_edge_list(dir / "edges.csv", graph);
    save_gexf(dir / "graph.gexf", graph);
    out << "graph: " << graph.node_count() << " nodes, " << graph.edge_count() << " edges, "
        << graph.isolates().size() << " isolates\n";
}

ordered_json stats_json(const CoOccurrenceGraph& graph, const Partition& partition,
                        const CommunityStats& stats, const Settings& s) {
    ordered_json j;
    if (graph.registry_size()) j["identities"] = *graph.registry_size();
    j["nodes"] = graph.node_count();
    j["edges"] = graph.edge_count();
    j["total_weight"] = graph.total_weight();
    if (graph.registry_size()) j["isolates"] = graph.isolates().size();
    j["communities"] = stats.community_count;
    j["two_node_communities"] = stats.two_node_communities;
    j["largest_community"] = stats.largest_size;
    j["largest_community_fraction"] = stats.largest_fraction;
    j["modularity"] = partition.modularity;
    j["level_modularity"] = partition.level_modularity;
    j["louvain"] = {{"seed", s.seed},
                    {"resolution", s.louvain_resolution},
                    {"weighted", !s.unweighted}};

    ordered_json hist = ordered_json::array();
    for (const auto& [size, count] : stats.size_histogram) hist.push_back({{"size", size}, {"count", count}});
    j["size_histogram"] = hist;

    ordered_json top = ordered_json::array();
    for (const auto& [image, share] : top_images_by_edge_share(graph, 10)) {
        top.push_back({{"image", image}, {"edges", share.edges}, {"fraction", share.fraction}});
    }
    j["top_images"] = top;

    ordered_json degrees = ordered_json::array();
    auto nd = degree_centrality(graph);
    std::stable_sort(nd.begin(), nd.end(),
                     [](const NodeDegree& a, const NodeDegree& b) { return a.degree > b.degree; });
    for (std::size_t i = 0; i < nd.size() && i < 10; ++i) {
        degrees.push_back({{"identity", nd[i].id},
                           {"degree", nd[i].degree},
                           {"strength", nd[i].strength},
                           {"centrality", nd[i].centrality}});
    }
    j["top_degree"] = degrees;

    ordered_json edges = ordered_json::array();
    for (const auto& e : graph.edges()) {
        edges.push_back({{"source", e.a}, {"target", e.b}, {"weight", e.weight()}});
    }
    j["edge_weights"] = edges;
    return j;
}

void do_communities(const Settings& s, std::ostream& out) {
    std::optional<std::size_t> registry_size;
    if (!s.resolution_file.empty()) {
        registry_size = identity_count(load_resolution(s.resolution_file));
    }
    const auto graph = load_edge_list(s.input, registry_size);
    Partition partition;
    if (graph.node_count() > 0) partition = louvain(graph, louvain_options(s));
    const auto stats = community_stats(partition, graph);

    const fs::path dir(s.out);
    ensure_dir(dir);
    write_file(dir / "stats.json",
               [&](std::ostream& f) { f << stats_json(graph, partition, stats, s).dump(2) << '\n'; });
    write_file(dir / "partition.csv", [&](std::ostream& f) {
        f << "identity,community\n";
        for (const auto& [id, c] : partition.assignment) f << id << ',' << c << '\n';
    });
    save_gexf(dir / "communities.gexf", graph, &partition);
    out << "communities: " << stats.community_count << " communities over " << graph.node_count()
        << " nodes, modularity " << partition.modularity << "\n";
}

void do_bench(const Settings& s, std::ostream& out) {
    check_threshold(s.threshold);
    const auto opts = bench_options(s);
    opts.ivfpq.validate();
    const auto records = run_scaling_benchmark(opts);
    const fs::path dir(s.out);
    ensure_dir(dir);
    write_file(dir / "series.csv", [&](std::ostream& f) { write_series_csv(f, records); });
    write_file(dir / "bench_details.csv", [&](std::ostream& f) { write_timing_table(f, records); });
    write_file(dir / "series.svg", [&](std::ostream& f) { write_series_svg(f, records); });
    write_timing_table(out, records);
    if (opts.sizes.size() >= 2) {
        for (auto b : opts.backends) {
            out << "slope " << to_string(b) << ": " << loglog_slope(records, b) << '\n';
        }
    }
}

void do_synth(const Settings& s, std::ostream& out) {
    SyntheticSpec spec;
    spec.identity_count = s.identities;
    spec.images = s.images;
    spec.min_faces = s.min_faces;
    spec.max_faces = s.max_faces;
    spec.noise_radius = s.noise_radius;
    spec.separation = s.separation;
    spec.threshold = s.threshold;
    spec.seed = s.seed;
    const auto archive = generate_synthetic_archive(spec);
    const fs::path dir(s.out);
    ensure_dir(dir);
    save_manifest(dir / "manifest.jsonl", archive.manifest);
    write_file(dir / "labels.jsonl", [&](std::ostream& f) {
        const auto& images = archive.manifest.images();
        for (std::size_t i = 0; i < images.size(); ++i) {
            f << ordered_json{{"image", images[i].image_id}, {"labels", archive.labels[i]}}.dump()
              << '\n';
        }
    });
    out << "synth: " << archive.manifest.image_count() << " images, "
        << archive.manifest.face_count() << " faces, " << archive.distinct_labels()
        << " identities\n";
}

template <class Fn>
void stage(const std::string& name, Fn&& fn) {
    try {
        fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

void do_pipeline(const Settings& s, std::ostream& out) {
    check_threshold(s.threshold);
    const fs::path dir(s.out);
    Settings r = s;
    stage("resolve", [&] { do_resolve(r, out); });
    Settings g = s;
    g.input = (dir / "resolution.jsonl").string();
    stage("graph", [&] { do_graph(g, out); });
    Settings c = s;
    c.input = (dir / "edges.csv").string();
    c.resolution_file = (dir / "resolution.jsonl").string();
    stage("communities", [&] { do_communities(c, out); });
}

void add_index_flags(CLI::App* sub, Settings& s, bool with_backend = true) {
    if (with_backend) {
        sub->add_option("--backend", s.backend, "Index backend")
            ->check(CLI::IsMember({"flat", "ivfpq"}))
            ->capture_default_str();
    }
    sub->add_option("--nlist", s.nlist, "IVFPQ inverted lists (0 = auto)")->capture_default_str();
    sub->add_option("--expected-size", s.expected_size, "Expected identity count for nlist auto")
        ->capture_default_str();
    sub->add_option("--m", s.m, "PQ subquantizers (must divide 128)")->capture_default_str();
    sub->add_option("--nprobe", s.nprobe, "Inverted lists scanned per query")->capture_default_str();
    sub->add_option("--train-min", s.train_min, "Vectors buffered before IVFPQ training")
        ->capture_default_str();
}

void add_threshold(CLI::App* sub, Settings& s) {
    sub->add_option("--threshold", s.threshold, "Match when distance is strictly below this")
        ->capture_default_str();
}

void add_louvain_flags(CLI::App* sub, Settings& s) {
    sub->add_flag("--unweighted", s.unweighted, "Ignore co-occurrence counts in modularity");
    sub->add_option("--louvain-resolution", s.louvain_resolution, "Modularity resolution gamma")
        ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Settings s;
    CLI::App app{"Face-embedding archive to co-occurrence network"};
    app.set_version_flag("--version", std::string("facegraph ") + kVersion);
    app.require_subcommand(1);
    app.add_option("--seed", s.seed, "Seed for every random choice")->capture_default_str();
    app.add_option("--out", s.out, "Output directory")->capture_default_str();
    app.add_flag("--config-dump", s.config_dump, "Print the resolved configuration and exit");
    app.fallthrough();

    auto* resolve = app.add_subcommand("resolve", "Resolve faces to identities");
    resolve->add_option("manifest", s.input, "Manifest (JSONL)")->required();
    add_threshold(resolve, s);
    add_index_flags(resolve, s);
    resolve->add_flag("--strict-dup-faces", s.strict_dup_faces,
                      "Never assign one identity twice within an image");

    auto* graph = app.add_subcommand("graph", "Build the co-occurrence graph");
    graph->add_option("resolution", s.input, "Resolution file (JSONL)")->required();

    auto* communities = app.add_subcommand("communities", "Louvain communities and statistics");
    communities->add_option("edges", s.input, "Edge list (CSV)")->required();
    communities->add_option("--resolution", s.resolution_file,
                            "Resolution file, to count isolates");
    add_louvain_flags(communities, s);

    auto* bench = app.add_subcommand("bench", "Scaling benchmark on synthetic archives");
    bench->add_option("--sizes", s.sizes, "Face counts, ascending")->capture_default_str();
    bench->add_option("--backends", s.backends, "naive, flat, ivfpq")->capture_default_str();
    bench->add_option("--faces-per-identity", s.faces_per_identity)->capture_default_str();
    bench->add_option("--min-faces", s.min_faces)->capture_default_str();
    bench->add_option("--max-faces", s.max_faces)->capture_default_str();
    bench->add_option("--noise", s.noise_radius)->capture_default_str();
    bench->add_option("--separation", s.separation)->capture_default_str();
    add_threshold(bench, s);
    add_index_flags(bench, s, false);

    auto* pipeline = app.add_subcommand("pipeline", "resolve, graph and communities in sequence");
    pipeline->add_option("manifest", s.input, "Manifest (JSONL)")->required();
    add_threshold(pipeline, s);
    add_index_flags(pipeline, s);
    pipeline->add_flag("--strict-dup-faces", s.strict_dup_faces,
                       "Never assign one identity twice within an image");
    add_louvain_flags(pipeline, s);

    auto* synth = app.add_subcommand("synth", "Write a planted-identity synthetic archive");
    synth->add_option("--identities", s.identities)->capture_default_str();
    synth->add_option("--images", s.images)->capture_default_str();
    synth->add_option("--min-faces", s.min_faces)->capture_default_str();
    synth->add_option("--max-faces", s.max_faces)->capture_default_str();
    synth->add_option("--noise", s.noise_radius)->capture_default_str();
    synth->add_option("--separation", s.separation)->capture_default_str();
    add_threshold(synth, s);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    const std::string command = app.get_subcommands().front()->get_name();
    if (s.config_dump) {
        try {
            out << config_json(command, s).dump(2) << '\n';
        } catch (const std::exception& e) {
            err << "facegraph " << command << ": error: " << e.what() << '\n';
            return 2;
        }
        return 0;
    }

    try {
        if (command == "resolve") do_resolve(s, out);
        else if (command == "graph") do_graph(s, out);
        else if (command == "communities") do_communities(s, out);
        else if (command == "bench") do_bench(s, out);
        else if (command == "pipeline") do_pipeline(s, out);
        else if (command == "synth") do_synth(s, out);
    } catch (const StageError& e) {
        err << "facegraph " << command << ": " << e.stage << " stage failed: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "facegraph " << command << ": error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace facegraph::cli
