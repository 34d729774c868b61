#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "facegraph/benchmark.hpp"
#include "facegraph/error.hpp"
#include "facegraph/manifest.hpp"
#include "facegraph/synthetic.hpp"

using namespace facegraph;

TEST_CASE("same seed, same archive") {
    SyntheticSpec spec;
    spec.identity_count = 20;
    spec.images = 50;
    spec.seed = 4;
    const auto a = generate_synthetic_archive(spec);
    const auto b = generate_synthetic_archive(spec);
    CHECK(a.manifest == b.manifest);
    CHECK(a.labels == b.labels);
    spec.seed = 5;
    CHECK_FALSE(generate_synthetic_archive(spec).manifest == a.manifest);
}

TEST_CASE("planted geometry holds") {
    SyntheticSpec spec;
    spec.identity_count = 30;
    spec.images = 120;
    const auto a = generate_synthetic_archive(spec);
    CHECK(a.distinct_labels() == 30);
    for (std::size_t i = 0; i < a.anchors.size(); ++i) {
        for (std::size_t j = i + 1; j < a.anchors.size(); ++j) {
            CHECK(euclidean_distance(a.anchors[i], a.anchors[j]) >= spec.separation);
        }
    }
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        const auto& faces = a.manifest.images()[i].faces;
        REQUIRE(faces.size() == a.labels[i].size());
        CHECK(faces.size() >= spec.min_faces);
        CHECK(faces.size() <= spec.max_faces);
        std::set<std::uint32_t> distinct(a.labels[i].begin(), a.labels[i].end());
        CHECK(distinct.size() == faces.size());
        for (std::size_t s = 0; s < faces.size(); ++s) {
            CHECK(euclidean_distance(faces[s], a.anchors[a.labels[i][s]]) <= spec.noise_radius);
        }
    }
}

TEST_CASE("one identity, three single-face images") {
    SyntheticSpec spec;
    spec.identity_count = 1;
    spec.images = 3;
    spec.min_faces = spec.max_faces = 1;
    const auto a = generate_synthetic_archive(spec);
    const auto& imgs = a.manifest.images();
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(euclidean_distance(imgs[i].faces[0], imgs[j].faces[0]) <= 2 * spec.noise_radius);
        }
    }
}

TEST_CASE("spec validation and infeasible placement") {
    SyntheticSpec spec;
    spec.max_faces = 11;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
    spec = {};
    spec.noise_radius = 0.3;  // 2r > threshold
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
    spec = {};
    spec.separation = 0.8;  // sep - 2r < threshold
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);

    spec = {};
    spec.identity_count = 50;
    spec.anchor_scale = 0.01;  // anchors crammed together
    spec.max_attempts = 20;
    CHECK_THROWS_AS(generate_synthetic_archive(spec), InfeasibleSpec);
}

TEST_CASE("labeling agreement") {
    using L = std::vector<std::vector<std::uint32_t>>;
    const L truth{{0, 1}, {0, 2}, {1}};
    CHECK(labeling_agreement(truth, truth) == 1.0);
    CHECK(labeling_agreement(L{{5, 6}, {5, 7}, {6}}, truth) == 1.0);  // renamed
    // identity 0 split in two: one of its two faces disagrees
    CHECK(labeling_agreement(L{{0, 1}, {3, 2}, {1}}, truth) == doctest::Approx(4.0 / 5.0));
    // 1 and 2 merged: the smaller group loses
    CHECK(labeling_agreement(L{{0, 1}, {0, 1}, {1}}, truth) == doctest::Approx(4.0 / 5.0));
    CHECK(labeling_agreement(L{}, L{}) == 1.0);
    CHECK_THROWS_AS(labeling_agreement(L{{0}}, L{{0, 1}}), InvalidArgument);
}

TEST_CASE("log-log slope") {
    const std::vector<double> x{1000, 2000, 4000, 8000};
    std::vector<double> y;
    for (double v : x) y.push_back(3e-7 * v * v);
    CHECK(loglog_slope(x, y) == doctest::Approx(2.0).epsilon(1e-12));
    for (auto& v : y) v = std::sqrt(v);
    CHECK(loglog_slope(x, y) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(loglog_slope(std::vector<double>{1}, std::vector<double>{1}), InvalidArgument);
}

TEST_CASE("small scaling run") {
    BenchmarkOptions opts;
    opts.sizes = {300, 600};
    opts.backends = {BenchBackend::Naive, BenchBackend::Flat, BenchBackend::IvfPq};
    opts.ivfpq.train_min = 256;
    opts.ivfpq.nlist = 16;
    opts.min_seconds = 0.0;
    const auto spec = scaling_spec(opts, 600, 1);
    CHECK(spec.identity_count == 200);
    CHECK(spec.images == 240);

    const auto records = run_scaling_benchmark(opts);
    REQUIRE(records.size() == 6);
    for (std::size_t i = 0; i < records.size(); i += 3) {
        CHECK(records[i].identities == records[i + 1].identities);
        CHECK(records[i].deviation() == 0);
        CHECK(records[i].label_agreement == 1.0);
        CHECK(records[i].faces == records[i + 1].faces);
        CHECK(records[i + 2].faces == records[i].faces);
        CHECK(records[i].seconds >= 0.0);
    }
    CHECK(records[0].faces < records[3].faces);

    std::ostringstream csv;
    write_series_csv(csv, records);
    CHECK(csv.str().rfind("backend,faces,seconds\nnaive,", 0) == 0);
    std::ostringstream svg;
    write_series_svg(svg, records);
    CHECK(svg.str().find("<polyline") != std::string::npos);

    opts.sizes = {600, 300};
    CHECK_THROWS_AS(run_scaling_benchmark(opts), InvalidArgument);
    CHECK(parse_bench_backend("naive") == BenchBackend::Naive);
    CHECK_THROWS_AS(parse_bench_backend("annoy"), InvalidArgument);
}
