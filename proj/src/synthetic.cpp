#include "facegraph/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <map>
#include <unordered_set>

#include "facegraph/error.hpp"

namespace facegraph {

void SyntheticSpec::validate() const {
    if (identity_count == 0) throw InvalidArgument("identity_count must be >= 1");
    if (min_faces > max_faces) throw InvalidArgument("min_faces exceeds max_faces");
    if (max_faces > identity_count) {
        throw InvalidArgument("max_faces exceeds identity_count (faces in an image are distinct people)");
    }
    if (noise_radius < 0.0 || !(threshold > 0.0) || !(separation > 0.0)) {
        throw InvalidArgument("noise_radius must be >= 0, threshold and separation > 0");
    }
    if (!(2.0 * noise_radius < threshold)) {
        throw InvalidArgument("2 x noise_radius must be below the threshold");
    }
    if (!(separation - 2.0 * noise_radius >= threshold)) {
        throw InvalidArgument("separation must be at least threshold + 2 x noise_radius");
    }
    if (anchor_scale < 0.0) throw InvalidArgument("anchor_scale must be >= 0");
}

std::size_t SyntheticArchive::distinct_labels() const {
    std::unordered_set<std::uint32_t> seen;
    for (const auto& img : labels) seen.insert(img.begin(), img.end());
    return seen.size();
}

namespace {

using Point = std::array<double, kEmbeddingDim>;

bool far_enough(const Point& p, const std::vector<Point>& anchors, double min_sq) {
    for (const auto& a : anchors) {
        double s = 0;
        for (std::size_t d = 0; d < kEmbeddingDim; ++d) {
            const double diff = p[d] - a[d];
            s += diff * diff;
        }
        if (s < min_sq) return false;
    }
    return true;
}

std::vector<Point> place_anchors(const SyntheticSpec& spec, std::mt19937_64& rng) {
    const double scale = spec.anchor_scale > 0.0
                             ? spec.anchor_scale
                             : 1.5 * spec.separation / std::sqrt(2.0 * kEmbeddingDim);
    std::normal_distribution<double> normal(0.0, scale);
    // Anchors are stored as float, so leave a little headroom on the separation.
    const double min_sq = std::pow(spec.separation * (1.0 + 1e-6), 2);
    std::vector<Point> anchors;
    anchors.reserve(spec.identity_count);
    for (std::size_t i = 0; i < spec.identity_count; ++i) {
        bool placed = false;
        for (std::size_t attempt = 0; attempt < spec.max_attempts && !placed; ++attempt) {
            Point p;
            for (auto& v : p) v = static_cast<double>(static_cast<float>(normal(rng)));
            if (far_enough(p, anchors, min_sq)) {
                anchors.push_back(p);
                placed = true;
            }
        }
        if (!placed) {
            throw InfeasibleSpec("could not place anchor " + std::to_string(i) + " at separation " +
                                 std::to_string(spec.separation) + " within " +
                                 std::to_string(spec.max_attempts) + " attempts");
        }
    }
    return anchors;
}

FaceEmbedding noisy_face(const Point& anchor, double radius, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Point dir;
    double norm = 0;
    for (auto& v : dir) {
        v = normal(rng);
        norm += v * v;
    }
    norm = std::sqrt(norm);
    // Uniform in the ball; shrink slightly so float rounding cannot push past the radius.
    const double r = radius * std::pow(unit(rng), 1.0 / kEmbeddingDim) * (1.0 - 1e-5);
    std::array<double, kEmbeddingDim> values{};
    for (std::size_t d = 0; d < kEmbeddingDim; ++d) {
        values[d] = anchor[d] + (norm > 0 ? r * dir[d] / norm : 0.0);
    }
    return FaceEmbedding(std::span<const double>(values));
}

}  // namespace

SyntheticArchive generate_synthetic_archive(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);

    const auto anchors = place_anchors(spec, rng);
    SyntheticArchive out;
    out.anchors.reserve(anchors.size());
    for (const auto& a : anchors) out.anchors.emplace_back(std::span<const double>(a));

    std::vector<std::uint32_t> pending(spec.identity_count);
    for (std::uint32_t i = 0; i < pending.size(); ++i) pending[i] = i;
    std::shuffle(pending.begin(), pending.end(), rng);

    std::uniform_int_distribution<std::size_t> face_count(spec.min_faces, spec.max_faces);
    std::uniform_int_distribution<std::uint32_t> any_identity(
        0, static_cast<std::uint32_t>(spec.identity_count - 1));

    const int width = std::max<int>(6, static_cast<int>(std::to_string(spec.images).size()));
    for (std::size_t i = 0; i < spec.images; ++i) {
        const std::size_t f = face_count(rng);
        std::vector<std::uint32_t> chosen;
        while (chosen.size() < f) {
            std::uint32_t cand;
            if (!pending.empty() &&
                std::find(chosen.begin(), chosen.end(), pending.back()) == chosen.end()) {
                cand = pending.back();
                pending.pop_back();
            } else {
                cand = any_identity(rng);
                if (std::find(chosen.begin(), chosen.end(), cand) != chosen.end()) continue;
            }
            chosen.push_back(cand);
        }

        char name[64];
        std::snprintf(name, sizeof name, "synth_%0*zu", width, i);
        ImageRecord rec{name, {}};
        for (auto label : chosen) {
            rec.faces.push_back(noisy_face(anchors[label], spec.noise_radius, rng));
        }
        out.manifest.add(std::move(rec));
        out.labels.push_back(std::move(chosen));
    }
    return out;
}

double labeling_agreement(std::span<const std::vector<std::uint32_t>> a,
                          std::span<const std::vector<std::uint32_t>> b) {
    if (a.size() != b.size()) throw InvalidArgument("labelings cover different image counts");
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> joint;
    std::size_t faces = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) throw InvalidArgument("labelings differ in face count");
        for (std::size_t s = 0; s < a[i].size(); ++s) {
            ++joint[{a[i][s], b[i][s]}];
            ++faces;
        }
    }
    if (faces == 0) return 1.0;

    // Most frequent partner in each direction; ties go to the smaller label.
    std::map<std::uint32_t, std::pair<std::size_t, std::uint32_t>> best_ab, best_ba;
    for (const auto& [key, n] : joint) {
        auto consider = [n = n](auto& table, std::uint32_t from, std::uint32_t to) {
            auto [it, inserted] = table.try_emplace(from, n, to);
            if (!inserted && n > it->second.first) it->second = {n, to};
        };
        consider(best_ab, key.first, key.second);
        consider(best_ba, key.second, key.first);
    }
    std::size_t agree = 0;
    for (const auto& [key, n] : joint) {
        if (best_ab[key.first].second == key.second && best_ba[key.second].second == key.first) {
            agree += n;
        }
    }
    return static_cast<double>(agree) / static_cast<double>(faces);
}

}  // namespace facegraph
