#include "facegraph/manifest.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "facegraph/error.hpp"

namespace facegraph {

using nlohmann::json;

void ArchiveManifest::add(ImageRecord record) {
    if (!ids_.insert(record.image_id).second) {
        throw InvalidArgument("duplicate image id '" + record.image_id + "'");
    }
    images_.push_back(std::move(record));
}

std::size_t ArchiveManifest::face_count() const noexcept {
    std::size_t n = 0;
    for (const auto& img : images_) {
        n += img.faces.size();
    }
    return n;
}

namespace {

FaceEmbedding parse_embedding(const json& arr, std::size_t line, std::size_t slot) {
    if (!arr.is_array()) {
        throw MalformedRecord(line, "embedding " + std::to_string(slot) + " is not an array");
    }
    if (arr.size() != kEmbeddingDim) {
        throw MalformedRecord(line, "embedding " + std::to_string(slot) + " has " +
                                        std::to_string(arr.size()) + " values, expected " +
                                        std::to_string(kEmbeddingDim));
    }
    std::array<double, kEmbeddingDim> values{};
    for (std::size_t i = 0; i < kEmbeddingDim; ++i) {
        if (!arr[i].is_number()) {
            throw MalformedRecord(line, "embedding " + std::to_string(slot) + " value " +
                                            std::to_string(i) + " is not a number");
        }
        values[i] = arr[i].get<double>();
    }
    try {
        return FaceEmbedding(std::span<const double>(values));
    } catch (const InvalidEmbedding& e) {
        throw MalformedRecord(line, "embedding " + std::to_string(slot) + ": " + e.what());
    }
}

}  // namespace

ArchiveManifest parse_manifest(std::istream& in) {
    ArchiveManifest manifest;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json record;
        try {
            record = json::parse(text);
        } catch (const json::exception& e) {
            throw MalformedRecord(line, std::string("invalid JSON: ") + e.what());
        }
        if (!record.is_object()) {
            throw MalformedRecord(line, "record is not an object");
        }
        auto image = record.find("image");
        if (image == record.end() || !image->is_string()) {
            throw MalformedRecord(line, "missing string field 'image'");
        }
        auto embeddings = record.find("embeddings");
        if (embeddings == record.end() || !embeddings->is_array()) {
            throw MalformedRecord(line, "missing array field 'embeddings'");
        }
        ImageRecord rec{image->get<std::string>(), {}};
        if (rec.image_id.empty()) {
            throw MalformedRecord(line, "empty image id");
        }
        rec.faces.reserve(embeddings->size());
        for (std::size_t slot = 0; slot < embeddings->size(); ++slot) {
            rec.faces.push_back(parse_embedding((*embeddings)[slot], line, slot));
        }
        if (manifest.contains(rec.image_id)) {
            throw MalformedRecord(line, "duplicate image id '" + rec.image_id + "'");
        }
        manifest.add(std::move(rec));
    }
    if (in.bad()) {
        throw IoFailure("read error while parsing manifest");
    }
    return manifest;
}

ArchiveManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoFailure("cannot open manifest '" + path.string() + "'");
    }
    return parse_manifest(in);
}

std::string embedding_to_json(const FaceEmbedding& e) {
    std::string out = "[";
    char buf[32];
    for (std::size_t i = 0; i < kEmbeddingDim; ++i) {
        if (i) out += ',';
        auto res = std::to_chars(buf, buf + sizeof buf, e[i], std::chars_format::general, 9);
        out.append(buf, res.ptr);
    }
    out += ']';
    return out;
}

void write_manifest(std::ostream& out, const ArchiveManifest& manifest) {
    for (const auto& img : manifest.images()) {
        out << "{\"image\":" << json(img.image_id).dump() << ",\"embeddings\":[";
        for (std::size_t s = 0; s < img.faces.size(); ++s) {
            if (s) out << ',';
            out << embedding_to_json(img.faces[s]);
        }
        out << "]}\n";
    }
}

void save_manifest(const std::filesystem::path& path, const ArchiveManifest& manifest) {
    std::ofstream out(path);
    if (!out) {
        throw IoFailure("cannot write manifest '" + path.string() + "'");
    }
    write_manifest(out, manifest);
    if (!out) {
        throw IoFailure("write error on '" + path.string() + "'");
    }
}

}  // namespace facegraph
