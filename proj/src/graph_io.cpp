#include "facegraph/graph_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

#include "facegraph/error.hpp"

namespace facegraph {

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t lineno) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) throw MalformedRecord(lineno, "unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

std::size_t parse_count(const std::string& s, std::size_t lineno, const char* what) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw MalformedRecord(lineno, std::string("invalid ") + what + " '" + s + "'");
    }
    return v;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string join_images(const std::vector<std::string>& images) {
    std::string joined;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i].find_first_of(";\n\r") != std::string::npos) {
            throw InvalidArgument("image id '" + images[i] +
                                  "' contains ';' or a line break and cannot be exported");
        }
        if (i) joined += ';';
        joined += images[i];
    }
    return joined;
}

}  // namespace

void write_edge_list(std::ostream& out, const CoOccurrenceGraph& graph) {
    out << "source,target,weight,images\n";
    for (const auto& e : graph.edges()) {
        out << e.a << ',' << e.b << ',' << e.weight() << ',' << csv_field(join_images(e.images))
            << '\n';
    }
}

void save_edge_list(const std::filesystem::path& path, const CoOccurrenceGraph& graph) {
    std::ofstream out(path);
    if (!out) throw IoFailure("cannot write '" + path.string() + "'");
    write_edge_list(out, graph);
    if (!out) throw IoFailure("write error on '" + path.string() + "'");
}

CoOccurrenceGraph parse_edge_list(std::istream& in, std::optional<std::size_t> registry_size) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<EdgeRecord> records;
    std::vector<std::string> images;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (!header) {
            const auto fields = split_csv_line(line, lineno);
            if (fields != std::vector<std::string>{"source", "target", "weight", "images"}) {
                throw MalformedRecord(lineno, "expected header source,target,weight,images");
            }
            header = true;
            continue;
        }
        const auto fields = split_csv_line(line, lineno);
        if (fields.size() != 4) throw MalformedRecord(lineno, "expected 4 fields");
        const auto a = parse_count(fields[0], lineno, "source");
        const auto b = parse_count(fields[1], lineno, "target");
        const auto w = parse_count(fields[2], lineno, "weight");
        if (a == b) throw MalformedRecord(lineno, "self-loop");
        if (a > 0xffffffffULL || b > 0xffffffffULL) throw MalformedRecord(lineno, "id too large");
        std::vector<std::string> edge_images;
        if (!fields[3].empty()) {
            std::size_t start = 0;
            while (true) {
                const auto pos = fields[3].find(';', start);
                edge_images.push_back(fields[3].substr(start, pos - start));
                if (pos == std::string::npos) break;
                start = pos + 1;
            }
        }
        if (edge_images.size() != w) {
            throw MalformedRecord(lineno, "weight " + std::to_string(w) + " does not match " +
                                              std::to_string(edge_images.size()) + " images");
        }
        for (auto& img : edge_images) {
            records.push_back({static_cast<IdentityId>(a), static_cast<IdentityId>(b), img});
            images.push_back(std::move(img));
        }
    }
    if (in.bad()) throw IoFailure("read error on edge list");
    try {
        return aggregate_graph(records, registry_size, images);
    } catch (const InvalidArgument& e) {
        throw MalformedRecord(lineno, e.what());
    }
}

CoOccurrenceGraph load_edge_list(const std::filesystem::path& path,
                                 std::optional<std::size_t> registry_size) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open edge list '" + path.string() + "'");
    return parse_edge_list(in, registry_size);
}

void write_gexf(std::ostream& out, const CoOccurrenceGraph& graph, const Partition* partition) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<gexf xmlns=\"http://gexf.net/1.3\" version=\"1.3\">\n"
        << "  <graph mode=\"static\" defaultedgetype=\"undirected\">\n";
    if (partition) {
        out << "    <attributes class=\"node\">\n"
            << "      <attribute id=\"community\" title=\"community\" type=\"integer\"/>\n"
            << "    </attributes>\n";
    }
    out << "    <attributes class=\"edge\">\n"
        << "      <attribute id=\"images\" title=\"images\" type=\"string\"/>\n"
        << "    </attributes>\n";

    out << "    <nodes>\n";
    for (IdentityId id : graph.nodes()) {
        out << "      <node id=\"" << id << "\" label=\"identity " << id << "\"";
        if (partition) {
            auto it = partition->assignment.find(id);
            if (it == partition->assignment.end()) {
                throw InvalidArgument("partition does not cover identity " + std::to_string(id));
            }
            out << ">\n        <attvalues><attvalue for=\"community\" value=\"" << it->second
                << "\"/></attvalues>\n      </node>\n";
        } else {
            out << "/>\n";
        }
    }
    out << "    </nodes>\n    <edges>\n";
    std::size_t eid = 0;
    for (const auto& e : graph.edges()) {
        out << "      <edge id=\"" << eid++ << "\" source=\"" << e.a << "\" target=\"" << e.b
            << "\" weight=\"" << e.weight() << "\">\n"
            << "        <attvalues><attvalue for=\"images\" value=\""
            << xml_escape(join_images(e.images)) << "\"/></attvalues>\n      </edge>\n";
    }
    out << "    </edges>\n  </graph>\n</gexf>\n";
}

void save_gexf(const std::filesystem::path& path, const CoOccurrenceGraph& graph,
               const Partition* partition) {
    std::ofstream out(path);
    if (!out) throw IoFailure("cannot write '" + path.string() + "'");
    write_gexf(out, graph, partition);
    if (!out) throw IoFailure("write error on '" + path.string() + "'");
}

}  // namespace facegraph
