#include "facegraph/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>

#include "facegraph/error.hpp"
#include "facegraph/identity_resolver.hpp"
#include "facegraph/naive_resolver.hpp"

namespace facegraph {

std::string to_string(BenchBackend backend) {
    switch (backend) {
        case BenchBackend::Naive: return "naive";
        case BenchBackend::Flat: return "flat";
        case BenchBackend::IvfPq: return "ivfpq";
    }
    return "unknown";
}

BenchBackend parse_bench_backend(const std::string& name) {
    if (name == "naive") return BenchBackend::Naive;
    if (name == "flat") return BenchBackend::Flat;
    if (name == "ivfpq") return BenchBackend::IvfPq;
    throw InvalidArgument("unknown benchmark backend '" + name + "' (naive, flat, ivfpq)");
}

SyntheticSpec scaling_spec(const BenchmarkOptions& options, std::size_t faces, std::uint64_t seed) {
    if (faces == 0) throw InvalidArgument("benchmark size must be >= 1");
    if (!(options.faces_per_identity > 0.0)) {
        throw InvalidArgument("faces_per_identity must be > 0");
    }
    SyntheticSpec spec;
    spec.min_faces = options.min_faces;
    spec.max_faces = options.max_faces;
    spec.noise_radius = options.noise_radius;
    spec.separation = options.separation;
    spec.threshold = options.threshold;
    spec.seed = seed;
    const double per_image = 0.5 * static_cast<double>(options.min_faces + options.max_faces);
    spec.images = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(static_cast<double>(faces) / std::max(per_image, 1.0))));
    spec.identity_count = std::max<std::size_t>(
        options.max_faces,
        static_cast<std::size_t>(std::llround(static_cast<double>(faces) / options.faces_per_identity)));
    return spec;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    std::size_t identities = 0;
    std::vector<std::vector<std::uint32_t>> labels;
};

Outcome run_once(BenchBackend backend, const SyntheticArchive& archive, const BenchmarkOptions& options) {
    Outcome out;
    std::vector<ResolvedImage> images;
    if (backend == BenchBackend::Naive) {
        auto res = naive_resolve(archive.manifest, options.threshold);
        out.identities = res.canonical.size();
        images = std::move(res.images);
    } else {
        IndexConfig cfg = options.ivfpq;
        if (backend == BenchBackend::Flat) {
            cfg = IndexConfig{};
            cfg.backend = Backend::Flat;
        } else {
            cfg.backend = Backend::IvfPq;
        }
        ResolveOptions ro;
        ro.threshold = options.threshold;
        auto res = resolve_archive(archive.manifest, cfg, ro);
        out.identities = res.registry.size();
        images = std::move(res.images);
    }
    out.labels.reserve(images.size());
    for (auto& img : images) out.labels.push_back(std::move(img.identities));
    return out;
}

}  // namespace

std::vector<TimingRecord> run_scaling_benchmark(const BenchmarkOptions& options) {
    if (options.sizes.empty()) throw InvalidArgument("no benchmark sizes");
    for (std::size_t i = 1; i < options.sizes.size(); ++i) {
        if (options.sizes[i] <= options.sizes[i - 1]) {
            throw InvalidArgument("benchmark sizes must be strictly ascending");
        }
    }
    if (options.max_repeats == 0) throw InvalidArgument("max_repeats must be >= 1");

    std::vector<TimingRecord> records;
    for (std::size_t si = 0; si < options.sizes.size(); ++si) {
        const auto spec = scaling_spec(options, options.sizes[si], options.seed + si);
        const auto archive = generate_synthetic_archive(spec);
        const std::size_t faces = archive.manifest.face_count();
        const std::size_t truth = archive.distinct_labels();

        for (auto backend : options.backends) {
            double best = std::numeric_limits<double>::infinity();
            Outcome outcome;
            for (std::size_t rep = 0; rep < options.max_repeats; ++rep) {
                const auto t0 = Clock::now();
                outcome = run_once(backend, archive, options);
                const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
                best = std::min(best, dt);
                if (dt >= options.min_seconds) break;
            }
            TimingRecord rec;
            rec.backend = backend;
            rec.images = archive.manifest.image_count();
            rec.faces = faces;
            rec.seconds = best;
            rec.identities = outcome.identities;
            rec.ground_truth = truth;
            rec.label_agreement = labeling_agreement(outcome.labels, archive.labels);
            records.push_back(rec);
        }
    }
    return records;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw InvalidArgument("slope needs at least two paired points");
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("log-log slope needs positive values");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw InvalidArgument("log-log slope needs distinct x values");
    return sxy / sxx;
}

double loglog_slope(std::span<const TimingRecord> records, BenchBackend backend) {
    std::vector<double> x, y;
    for (const auto& r : records) {
        if (r.backend != backend) continue;
        x.push_back(static_cast<double>(r.faces));
        y.push_back(r.seconds);
    }
    return loglog_slope(x, y);
}

void write_series_csv(std::ostream& out, std::span<const TimingRecord> records) {
    out << "backend,faces,seconds\n";
    char buf[64];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%.6f", r.seconds);
        out << to_string(r.backend) << ',' << r.faces << ',' << buf << '\n';
    }
}

void write_timing_table(std::ostream& out, std::span<const TimingRecord> records) {
    out << "backend,images,faces,seconds,identities,ground_truth,deviation,label_agreement\n";
    char secs[64], agree[64];
    for (const auto& r : records) {
        std::snprintf(secs, sizeof secs, "%.6f", r.seconds);
        std::snprintf(agree, sizeof agree, "%.6f", r.label_agreement);
        out << to_string(r.backend) << ',' << r.images << ',' << r.faces << ',' << secs << ','
            << r.identities << ',' << r.ground_truth << ',' << r.deviation() << ',' << agree << '\n';
    }
}

void write_series_svg(std::ostream& out, std::span<const TimingRecord> records) {
    const double W = 640, H = 420, L = 70, R = 130, T = 20, B = 50;
    std::map<BenchBackend, std::vector<std::pair<double, double>>> series;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& r : records) {
        if (r.faces == 0 || !(r.seconds > 0.0)) continue;
        const double lx = std::log10(static_cast<double>(r.faces));
        const double ly = std::log10(r.seconds);
        series[r.backend].emplace_back(lx, ly);
        xmin = std::min(xmin, lx);
        xmax = std::max(xmax, lx);
        ymin = std::min(ymin, ly);
        ymax = std::max(ymax, ly);
    }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (series.empty()) {
        out << "</svg>\n";
        return;
    }
    xmin = std::floor(xmin * 2) / 2;
    xmax = std::max(std::ceil(xmax * 2) / 2, xmin + 0.5);
    ymin = std::floor(ymin);
    ymax = std::max(std::ceil(ymax), ymin + 1);
    auto px = [&](double v) { return L + (v - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double v) { return H - B - (v - ymin) / (ymax - ymin) * (H - T - B); };
    char buf[160];

    out << "<g stroke=\"#ccc\">\n";
    for (double y = ymin; y <= ymax + 1e-9; y += 1) {
        std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\"/>\n",
                      L, py(y), W - R, py(y));
        out << buf;
    }
    out << "</g>\n";
    for (double y = ymin; y <= ymax + 1e-9; y += 1) {
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">1e%d s</text>\n",
                      L - 6, py(y) + 4, static_cast<int>(y));
        out << buf;
    }
    for (double x = xmin; x <= xmax + 1e-9; x += 0.5) {
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.0f</text>\n",
                      px(x), H - B + 18, std::pow(10.0, x));
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">faces</text>\n",
                  L + (W - L - R) / 2, H - 10);
    out << buf;

    const char* colors[] = {"#d62728", "#1f77b4", "#2ca02c"};
    int row = 0;
    for (const auto& [backend, pts] : series) {
        const char* color = colors[static_cast<int>(backend) % 3];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s%.1f,%.1f", i ? " " : "", px(pts[i].first), py(pts[i].second));
            out << buf;
        }
        out << "\"/>\n";
        for (const auto& p : pts) {
            std::snprintf(buf, sizeof buf, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"%s\"/>\n",
                          px(p.first), py(p.second), color);
            out << buf;
        }
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.1f\" fill=\"%s\">%s</text>\n", W - R + 12,
                      T + 16.0 + 18.0 * row++, color, to_string(backend).c_str());
        out << buf;
    }
    out << "</svg>\n";
}

}  // namespace facegraph
