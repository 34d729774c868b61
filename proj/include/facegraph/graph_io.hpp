#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "facegraph/community.hpp"
#include "facegraph/graph_builder.hpp"

namespace facegraph {

/// CSV with header `source,target,weight,images`; images joined by ';'.
/// Throws InvalidArgument for image ids containing ';' or a line break.
void write_edge_list(std::ostream& out, const CoOccurrenceGraph& graph);
void save_edge_list(const std::filesystem::path& path, const CoOccurrenceGraph& graph);

/// Rebuilds the graph from an edge-list CSV. Throws MalformedRecord on bad rows
/// (including a weight that disagrees with the image count).
CoOccurrenceGraph parse_edge_list(std::istream& in,
                                  std::optional<std::size_t> registry_size = std::nullopt);
CoOccurrenceGraph load_edge_list(const std::filesystem::path& path,
                                 std::optional<std::size_t> registry_size = std::nullopt);

/// GEXF 1.3, undirected. Nodes carry a `community` attribute when a partition
/// is supplied; edges carry weight and an `images` attribute.
void write_gexf(std::ostream& out, const CoOccurrenceGraph& graph,
                const Partition* partition = nullptr);
void save_gexf(const std::filesystem::path& path, const CoOccurrenceGraph& graph,
               const Partition* partition = nullptr);

}  // namespace facegraph
