// Writes the tiny end-to-end fixture: three planted identities A, B, C over
// five images (A B | A B C | C | B C | no faces).
#include <iostream>
#include <map>

#include "facegraph/manifest.hpp"
#include "facegraph/synthetic.hpp"

using namespace facegraph;

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixtures <out.jsonl>\n";
        return 2;
    }
    SyntheticSpec spec;
    spec.identity_count = 3;
    spec.images = 30;
    spec.min_faces = 1;
    spec.max_faces = 1;
    spec.seed = 7;
    const auto pool = generate_synthetic_archive(spec);

    std::map<std::uint32_t, std::vector<FaceEmbedding>> faces;
    for (std::size_t i = 0; i < pool.labels.size(); ++i) {
        faces[pool.labels[i][0]].push_back(pool.manifest.images()[i].faces[0]);
    }
    std::map<std::uint32_t, std::size_t> used;
    auto take = [&](std::uint32_t label) { return faces.at(label).at(used[label]++); };

    const std::uint32_t A = 0, B = 1, C = 2;
    const std::vector<std::pair<std::string, std::vector<std::uint32_t>>> layout{
        {"img1", {A, B}}, {"img2", {A, B, C}}, {"img3", {C}}, {"img4", {B, C}}, {"img5", {}}};

    ArchiveManifest manifest;
    for (const auto& [id, labels] : layout) {
        ImageRecord rec{id, {}};
        for (auto l : labels) rec.faces.push_back(take(l));
        manifest.add(std::move(rec));
    }
    save_manifest(argv[1], manifest);
    return 0;
}
