#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kFixture = fs::path(FACEGRAPH_TEST_DATA) / "tiny_fixture.jsonl";

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "facegraph");
    std::ostringstream out, err;
    const int code = facegraph::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("facegraph_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("resolve the tiny fixture") {
    const auto dir = scratch("resolve");
    const auto r = run({"resolve", kFixture.string(), "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("3 identities") != std::string::npos);
    const auto res = slurp(dir / "resolution.jsonl");
    CHECK(res ==
          "{\"image\":\"img1\",\"identities\":[0,1]}\n"
          "{\"image\":\"img2\",\"identities\":[0,1,2]}\n"
          "{\"image\":\"img3\",\"identities\":[2]}\n"
          "{\"image\":\"img4\",\"identities\":[1,2]}\n"
          "{\"image\":\"img5\",\"identities\":[]}\n");
    std::istringstream reg(slurp(dir / "registry.jsonl"));
    std::string line;
    int lines = 0;
    while (std::getline(reg, line)) ++lines;
    CHECK(lines == 3);

    const auto ivf = scratch("resolve_ivf");
    CHECK(run({"resolve", kFixture.string(), "--backend", "ivfpq", "--out", ivf.string()}).code == 0);
    CHECK(slurp(ivf / "resolution.jsonl") == res);
}

TEST_CASE("invalid threshold is rejected before any work") {
    const auto dir = scratch("threshold");
    const auto r = run({"resolve", "/does/not/exist.jsonl", "--threshold", "0", "--out", (dir / "o").string()});
    CHECK(r.code != 0);
    CHECK(r.err.find("threshold") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "o"));
    CHECK(run({"resolve", kFixture.string(), "--threshold", "-0.5", "--out", dir.string()}).code != 0);
}

TEST_CASE("missing input names the path") {
    const auto r = run({"resolve", "/does/not/exist.jsonl", "--out", scratch("missing").string()});
    CHECK(r.code != 0);
    CHECK(r.err.find("/does/not/exist.jsonl") != std::string::npos);
    const auto g = run({"graph", "/nope/resolution.jsonl", "--out", scratch("missing2").string()});
    CHECK(g.code != 0);
    CHECK(g.err.find("/nope/resolution.jsonl") != std::string::npos);
}

TEST_CASE("graph on an empty resolution file") {
    const auto dir = scratch("empty");
    spit(dir / "resolution.jsonl", "");
    const auto r = run({"graph", (dir / "resolution.jsonl").string(), "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(slurp(dir / "edges.csv") == "source,target,weight,images\n");
    const auto gexf = slurp(dir / "graph.gexf");
    CHECK(gexf.find("<node ") == std::string::npos);
    CHECK(gexf.find("<nodes>") != std::string::npos);

    const auto c = run({"communities", (dir / "edges.csv").string(), "--out", dir.string()});
    CHECK(c.code == 0);
    const auto stats = nlohmann::json::parse(slurp(dir / "stats.json"));
    CHECK(stats["nodes"] == 0);
    CHECK(stats["communities"] == 0);
}

TEST_CASE("communities on a dyad-only graph") {
    const auto dir = scratch("dyads");
    spit(dir / "edges.csv", "source,target,weight,images\n0,1,1,a\n2,3,2,b;c\n4,5,1,d\n");
    const auto r = run({"communities", (dir / "edges.csv").string(), "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto stats = nlohmann::json::parse(slurp(dir / "stats.json"));
    CHECK(stats["communities"] == 3);
    CHECK(stats["two_node_communities"] == 3);
    REQUIRE(stats["size_histogram"].size() == 1);
    CHECK(stats["size_histogram"][0]["size"] == 2);
    CHECK(slurp(dir / "partition.csv") == "identity,community\n0,0\n1,0\n2,1\n3,1\n4,2\n5,2\n");
}

TEST_CASE("pipeline on the tiny fixture") {
    const auto dir = scratch("pipeline");
    const auto r = run({"pipeline", kFixture.string(), "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto stats = nlohmann::json::parse(slurp(dir / "stats.json"));
    CHECK(stats["identities"] == 3);
    CHECK(stats["nodes"] == 3);
    CHECK(stats["edges"] == 3);
    CHECK(stats["isolates"] == 0);
    CHECK(stats["total_weight"] == 5);
    CHECK(stats["communities"] == 1);
    const auto& w = stats["edge_weights"];
    REQUIRE(w.size() == 3);
    CHECK(w[0] == nlohmann::json({{"source", 0}, {"target", 1}, {"weight", 2}}));
    CHECK(w[1] == nlohmann::json({{"source", 0}, {"target", 2}, {"weight", 1}}));
    CHECK(w[2] == nlohmann::json({{"source", 1}, {"target", 2}, {"weight", 2}}));
    CHECK(slurp(dir / "edges.csv") == "source,target,weight,images\n0,1,2,img1;img2\n0,2,1,img2\n1,2,2,img2;img4\n");
    for (const char* f : {"resolution.jsonl", "registry.jsonl", "graph.gexf", "partition.csv", "communities.gexf"}) {
        CHECK(fs::exists(dir / f));
    }
}

TEST_CASE("commands are idempotent") {
    const auto a = scratch("idem_a"), b = scratch("idem_b");
    for (const auto& backend : {"flat", "ivfpq"}) {
        REQUIRE(run({"pipeline", kFixture.string(), "--backend", backend, "--seed", "9", "--out", a.string()}).code == 0);
        REQUIRE(run({"pipeline", kFixture.string(), "--backend", backend, "--seed", "9", "--out", b.string()}).code == 0);
        for (const auto& entry : fs::directory_iterator(a)) {
            CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
        }
    }
    // stages re-run on their own reproduce the pipeline's files
    const auto c = scratch("idem_c");
    REQUIRE(run({"graph", (a / "resolution.jsonl").string(), "--out", c.string()}).code == 0);
    CHECK(slurp(c / "edges.csv") == slurp(a / "edges.csv"));
    CHECK(slurp(c / "graph.gexf") == slurp(a / "graph.gexf"));
}

TEST_CASE("failing stage is named") {
    const auto dir = scratch("stage");
    spit(dir / "bad.jsonl", "{\"image\":\"x\",\"embeddings\":[[1,2,3]]}\n");
    const auto r = run({"pipeline", (dir / "bad.jsonl").string(), "--out", dir.string()});
    CHECK(r.code != 0);
    CHECK(r.err.find("resolve stage failed") != std::string::npos);
    CHECK(r.err.find("line 1") != std::string::npos);
}

TEST_CASE("synthetic archives feed the pipeline") {
    const auto dir = scratch("synth");
    REQUIRE(run({"synth", "--identities", "20", "--images", "60", "--out", dir.string()}).code == 0);
    const auto r = run({"pipeline", (dir / "manifest.jsonl").string(), "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto stats = nlohmann::json::parse(slurp(dir / "stats.json"));
    CHECK(stats["identities"] == 20);
}

TEST_CASE("version, config dump and usage errors") {
    const auto v = run({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find(facegraph::cli::kVersion) != std::string::npos);

    const auto d = run({"resolve", "m.jsonl", "--backend", "ivfpq", "--nprobe", "4", "--config-dump"});
    REQUIRE(d.code == 0);
    const auto cfg = nlohmann::json::parse(d.out);
    CHECK(cfg["command"] == "resolve");
    CHECK(cfg["threshold"] == 0.5);
    CHECK(cfg["index"]["backend"] == "ivfpq");
    CHECK(cfg["index"]["nlist"] == "auto");
    CHECK(cfg["index"]["nprobe"] == 4);
    CHECK(cfg["index"]["m"] == 8);

    CHECK(run({}).code != 0);
    CHECK(run({"resolve"}).code != 0);
    CHECK(run({"resolve", "x", "--backend", "hnsw"}).code != 0);
}

TEST_CASE("reference archive expectations are self-consistent") {
    const auto ref = nlohmann::json::parse(slurp(fs::path(FACEGRAPH_TEST_DATA) / "reference_archive_expectations.json"));
    const int nodes = ref["nodes"], edges = ref["edges"];
    CHECK(nodes <= ref["identities"].get<int>());
    CHECK(ref["two_node_communities"].get<int>() < ref["communities"].get<int>());
    CHECK(ref["largest_community"].get<double>() / nodes == doctest::Approx(ref["largest_community_fraction"].get<double>()).epsilon(0.05));
    CHECK(ref["top_image_edges"].get<double>() / edges == doctest::Approx(ref["top_image_edge_fraction"].get<double>()).epsilon(0.01));
    // every node has an edge: at least ceil(nodes / 2) edges
    CHECK(2 * edges >= nodes);
}
