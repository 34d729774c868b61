#include "facegraph/resolution_io.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "facegraph/error.hpp"
#include "facegraph/manifest.hpp"

namespace facegraph {

using nlohmann::json;

namespace {

template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        json record;
        try {
            record = json::parse(text);
        } catch (const json::exception& e) {
            throw MalformedRecord(line, std::string("invalid JSON: ") + e.what());
        }
        if (!record.is_object()) throw MalformedRecord(line, "record is not an object");
        fn(record, line);
    }
    if (in.bad()) throw IoFailure("read error");
}

IdentityId as_id(const json& v, std::size_t line, const char* field) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw MalformedRecord(line, std::string("field '") + field + "' must be a non-negative integer");
    }
    const auto raw = v.get<unsigned long long>();
    if (raw > 0xffffffffULL) throw MalformedRecord(line, std::string("field '") + field + "' too large");
    return static_cast<IdentityId>(raw);
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoFailure("cannot write '" + path.string() + "'");
    return out;
}

}  // namespace

void write_resolution(std::ostream& out, std::span<const ResolvedImage> images) {
    for (const auto& img : images) {
        out << "{\"image\":" << json(img.image_id).dump() << ",\"identities\":[";
        for (std::size_t i = 0; i < img.identities.size(); ++i) {
            if (i) out << ',';
            out << img.identities[i];
        }
        out << "]}\n";
    }
}

std::vector<ResolvedImage> parse_resolution(std::istream& in) {
    std::vector<ResolvedImage> out;
    for_each_record(in, [&](const json& rec, std::size_t line) {
        auto image = rec.find("image");
        auto ids = rec.find("identities");
        if (image == rec.end() || !image->is_string()) {
            throw MalformedRecord(line, "missing string field 'image'");
        }
        if (ids == rec.end() || !ids->is_array()) {
            throw MalformedRecord(line, "missing array field 'identities'");
        }
        ResolvedImage r{image->get<std::string>(), {}};
        for (const auto& v : *ids) r.identities.push_back(as_id(v, line, "identities"));
        out.push_back(std::move(r));
    });
    return out;
}

void save_resolution(const std::filesystem::path& path, std::span<const ResolvedImage> images) {
    auto out = open_out(path);
    write_resolution(out, images);
    if (!out) throw IoFailure("write error on '" + path.string() + "'");
}

std::vector<ResolvedImage> load_resolution(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open resolution file '" + path.string() + "'");
    return parse_resolution(in);
}

std::size_t identity_count(std::span<const ResolvedImage> images) {
    std::size_t n = 0;
    for (const auto& img : images) {
        for (auto id : img.identities) n = std::max<std::size_t>(n, std::size_t{id} + 1);
    }
    return n;
}

void write_registry(std::ostream& out, const IdentityRegistry& registry) {
    for (IdentityId id = 0; id < registry.size(); ++id) {
        const auto& p = registry.provenance(id);
        out << "{\"identity\":" << id << ",\"image\":" << json(p.image_id).dump()
            << ",\"slot\":" << p.slot << ",\"embedding\":" << embedding_to_json(registry.canonical(id))
            << "}\n";
    }
}

std::vector<RegistryEntry> parse_registry(std::istream& in) {
    std::vector<RegistryEntry> out;
    for_each_record(in, [&](const json& rec, std::size_t line) {
        RegistryEntry e;
        auto id = rec.find("identity");
        auto image = rec.find("image");
        auto slot = rec.find("slot");
        auto emb = rec.find("embedding");
        if (id == rec.end() || image == rec.end() || !image->is_string() || slot == rec.end() ||
            emb == rec.end() || !emb->is_array()) {
            throw MalformedRecord(line, "registry record needs identity, image, slot, embedding");
        }
        e.id = as_id(*id, line, "identity");
        e.first_seen = {image->get<std::string>(), as_id(*slot, line, "slot")};
        std::vector<double> values;
        for (const auto& v : *emb) {
            if (!v.is_number()) throw MalformedRecord(line, "embedding value is not a number");
            values.push_back(v.get<double>());
        }
        try {
            e.embedding = FaceEmbedding(std::span<const double>(values));
        } catch (const InvalidEmbedding& err) {
            throw MalformedRecord(line, err.what());
        }
        out.push_back(std::move(e));
    });
    return out;
}

void save_registry(const std::filesystem::path& path, const IdentityRegistry& registry) {
    auto out = open_out(path);
    write_registry(out, registry);
    if (!out) throw IoFailure("write error on '" + path.string() + "'");
}

}  // namespace facegraph
