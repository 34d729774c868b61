#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_set>
#include <vector>

#include "facegraph/embedding.hpp"

namespace facegraph {

struct ImageRecord {
    std::string image_id;
    std::vector<FaceEmbedding> faces;  // slot order
};

/// Ordered list of images and the faces detected in each. Order is the
/// processing order for identity resolution. Image ids are unique.
class ArchiveManifest {
public:
    ArchiveManifest() = default;

    /// Throws InvalidArgument if the image id is already present.
    void add(ImageRecord record);

    const std::vector<ImageRecord>& images() const noexcept { return images_; }
    std::size_t image_count() const noexcept { return images_.size(); }
    std::size_t face_count() const noexcept;
    bool contains(const std::string& image_id) const { return ids_.count(image_id) != 0; }

    bool operator==(const ArchiveManifest& other) const { return images_ == other.images_; }

private:
    std::vector<ImageRecord> images_;
    std::unordered_set<std::string> ids_;
};

inline bool operator==(const ImageRecord& a, const ImageRecord& b) {
    return a.image_id == b.image_id && a.faces == b.faces;
}

/// Parses line-delimited JSON records `{"image": ..., "embeddings": [[...128...], ...]}`.
/// Blank lines are skipped. Throws MalformedRecord carrying the 1-based line.
ArchiveManifest parse_manifest(std::istream& in);

/// Throws IoFailure when the file cannot be opened.
ArchiveManifest load_manifest(const std::filesystem::path& path);

void write_manifest(std::ostream& out, const ArchiveManifest& manifest);
void save_manifest(const std::filesystem::path& path, const ArchiveManifest& manifest);

/// JSON array text for one embedding, 9 significant digits per value so the
/// float survives a decimal round trip exactly.
std::string embedding_to_json(const FaceEmbedding& e);

}  // namespace facegraph
