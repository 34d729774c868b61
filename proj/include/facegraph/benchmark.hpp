#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "facegraph/synthetic.hpp"
#include "facegraph/vector_index.hpp"

namespace facegraph {

enum class BenchBackend { Naive, Flat, IvfPq };

std::string to_string(BenchBackend backend);
BenchBackend parse_bench_backend(const std::string& name);

struct TimingRecord {
    BenchBackend backend = BenchBackend::Naive;
    std::size_t images = 0;
    std::size_t faces = 0;
    double seconds = 0.0;
    std::size_t identities = 0;    // identities minted by the resolver
    std::size_t ground_truth = 0;  // planted identities present in the archive
    /// Fraction of faces whose resolved identity maps to the planted label
    /// under the majority mapping (1.0 = perfect recovery).
    double label_agreement = 0.0;

    long long deviation() const {
        return static_cast<long long>(identities) - static_cast<long long>(ground_truth);
    }
};

struct BenchmarkOptions {
    /// Target face counts, ascending.
    std::vector<std::size_t> sizes{1000, 2000, 4000, 8000, 16000};
    std::vector<BenchBackend> backends{BenchBackend::Naive, BenchBackend::Flat, BenchBackend::IvfPq};
    double faces_per_identity = 3.0;
    std::size_t min_faces = 1;
    std::size_t max_faces = 4;
    double noise_radius = 0.2;
    double separation = 1.2;
    double threshold = kDefaultMatchThreshold;
    /// Used for the IVFPQ backend (backend field is overridden).
    IndexConfig ivfpq;
    std::uint64_t seed = 1;
    /// A run shorter than this is repeated (up to max_repeats) and the fastest kept.
    double min_seconds = 0.25;
    std::size_t max_repeats = 3;
};

/// Synthetic archive spec whose face count lands near `faces`.
SyntheticSpec scaling_spec(const BenchmarkOptions& options, std::size_t faces, std::uint64_t seed);

/// Resolves a fresh synthetic archive per size with every backend and records
/// wall time. Throws InvalidArgument when sizes are not ascending.
std::vector<TimingRecord> run_scaling_benchmark(const BenchmarkOptions& options);

/// Least-squares slope of log(seconds) against log(faces) for one backend.
double loglog_slope(std::span<const TimingRecord> records, BenchBackend backend);
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// `backend,faces,seconds`
void write_series_csv(std::ostream& out, std::span<const TimingRecord> records);
/// Every field of each record.
void write_timing_table(std::ostream& out, std::span<const TimingRecord> records);
/// Log-log time-vs-faces chart, one line per backend.
void write_series_svg(std::ostream& out, std::span<const TimingRecord> records);

}  // namespace facegraph
