#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "facegraph/identity_resolver.hpp"

namespace facegraph {

// Resolution file: one JSON object per line, {"image": str, "identities": [int, ...]}.

void write_resolution(std::ostream& out, std::span<const ResolvedImage> images);
/// Throws MalformedRecord with the 1-based line number.
std::vector<ResolvedImage> parse_resolution(std::istream& in);
void save_resolution(const std::filesystem::path& path, std::span<const ResolvedImage> images);
std::vector<ResolvedImage> load_resolution(const std::filesystem::path& path);

/// Number of identities implied by a resolution: max id + 1 (every identity
/// is founded by some face, so ids are dense).
std::size_t identity_count(std::span<const ResolvedImage> images);

// Registry file: one line per identity, ascending id:
// {"identity": int, "image": str, "slot": int, "embedding": [128 numbers]}.

struct RegistryEntry {
    IdentityId id = 0;
    Provenance first_seen;
    FaceEmbedding embedding;

    bool operator==(const RegistryEntry&) const = default;
};

void write_registry(std::ostream& out, const IdentityRegistry& registry);
std::vector<RegistryEntry> parse_registry(std::istream& in);
void save_registry(const std::filesystem::path& path, const IdentityRegistry& registry);

}  // namespace facegraph
