#ifndef DIRFORM_IO_HPP
#define DIRFORM_IO_HPP

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "json.hpp"

#include "dirform/network.hpp"
#include "dirform/report.hpp"
#include "dirform/spaces.hpp"

namespace dirform {

using Json = nlohmann::ordered_json;

/// Network file contents: the graph plus optional measures and geometry.
struct NetworkFile {
    ResistanceNetwork network;
    std::optional<MeasureVector> mu;
    std::optional<MeasureVector> m;
    std::optional<Json> geometry;
};

namespace detail {

inline std::string line_column(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

inline const Json& field(const Json& obj, const char* key, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end()) throw Error(ErrorCode::parse, where + ": missing field '" + key + "'");
    return *it;
}

inline double number(const Json& value, const std::string& where)
{
    if (!value.is_number()) throw Error(ErrorCode::parse, where + ": expected a number");
    return value.get<double>();
}

inline std::string text(const Json& value, const std::string& where)
{
    if (!value.is_string()) throw Error(ErrorCode::parse, where + ": expected a string");
    return value.get<std::string>();
}

}  // namespace detail

inline Json parse_json_text(const std::string& text, const std::string& source)
{
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::parse, source + ": malformed JSON at " + detail::line_column(text, e.byte));
    }
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::parse, path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline Json load_json_file(const std::string& path) { return parse_json_text(read_file(path), path); }

/// Measure given as {vertex: weight}; every vertex must appear exactly once.
inline MeasureVector measure_from_json(const ResistanceNetwork& net, const Json& obj, const std::string& where)
{
    if (!obj.is_object()) throw Error(ErrorCode::parse, where + ": expected an object {vertex: weight}");
    Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(net.num_vertices()), -1.0);
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string at = where + "." + it.key();
        if (!net.contains(it.key())) throw Error(ErrorCode::unknown_vertex, at + ": unknown vertex");
        w[static_cast<Eigen::Index>(net.index_of(it.key()))] = detail::number(it.value(), at);
    }
    for (std::size_t v = 0; v < net.num_vertices(); ++v)
        if (w[static_cast<Eigen::Index>(v)] < 0.0 && obj.find(net.id(v)) == obj.end())
            throw Error(ErrorCode::parse, where + ": no weight for vertex '" + net.id(v) + "'");
    try {
        return MeasureVector(std::move(w));
    } catch (const Error& e) {
        throw Error(ErrorCode::invalid_argument, where + ": " + e.what());
    }
}

inline NetworkFile network_from_json(const Json& doc, const std::string& source)
{
    if (!doc.is_object()) throw Error(ErrorCode::parse, source + ": top level must be an object");
    static const std::set<std::string> known{"vertices", "edges", "mu", "m", "geometry"};
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (!known.count(it.key())) throw Error(ErrorCode::parse, source + ": unknown field '" + it.key() + "'");

    NetworkDescription desc;
    const Json& vertices = detail::field(doc, "vertices", source);
    if (!vertices.is_array()) throw Error(ErrorCode::parse, source + ".vertices: expected an array");
    for (std::size_t i = 0; i < vertices.size(); ++i)
        desc.vertices.push_back(detail::text(vertices[i], source + ".vertices[" + std::to_string(i) + "]"));
    const Json& edges = detail::field(doc, "edges", source);
    if (!edges.is_array()) throw Error(ErrorCode::parse, source + ".edges: expected an array");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const std::string at = source + ".edges[" + std::to_string(i) + "]";
        const Json& e = edges[i];
        if (!e.is_object()) throw Error(ErrorCode::parse, at + ": expected an object");
        for (auto it = e.begin(); it != e.end(); ++it)
            if (it.key() != "u" && it.key() != "v" && it.key() != "c")
                throw Error(ErrorCode::parse, at + ": unknown field '" + it.key() + "'");
        desc.edges.push_back({detail::text(detail::field(e, "u", at), at + ".u"),
                              detail::text(detail::field(e, "v", at), at + ".v"),
                              detail::number(detail::field(e, "c", at), at + ".c")});
    }
    NetworkFile out{ResistanceNetwork::build(desc), std::nullopt, std::nullopt, std::nullopt};
    if (auto it = doc.find("mu"); it != doc.end()) out.mu = measure_from_json(out.network, *it, source + ".mu");
    if (auto it = doc.find("m"); it != doc.end()) out.m = measure_from_json(out.network, *it, source + ".m");
    if (auto it = doc.find("geometry"); it != doc.end()) out.geometry = *it;
    return out;
}

inline NetworkFile load_network_file(const std::string& path) { return network_from_json(load_json_file(path), path); }

/// A measure file is either {vertex: weight} or an object holding it under "mu" or "m".
inline MeasureVector load_measure_file(const ResistanceNetwork& net, const std::string& path)
{
    const Json doc = load_json_file(path);
    if (doc.is_object() && doc.size() == 1) {
        if (auto it = doc.find("mu"); it != doc.end() && it->is_object()) return measure_from_json(net, *it, path + ".mu");
        if (auto it = doc.find("m"); it != doc.end() && it->is_object()) return measure_from_json(net, *it, path + ".m");
    }
    return measure_from_json(net, doc, path);
}

inline Json measure_to_json(const ResistanceNetwork& net, const MeasureVector& m)
{
    Json out = Json::object();
    for (std::size_t v = 0; v < net.num_vertices(); ++v) out[net.id(v)] = m[v];
    return out;
}

inline Json network_to_json(const ResistanceNetwork& net)
{
    Json out;
    out["vertices"] = net.vertex_ids();
    Json edges = Json::array();
    for (const auto& e : net.edges()) edges.push_back({{"u", net.id(e.tail)}, {"v", net.id(e.head)}, {"c", e.conductance}});
    out["edges"] = std::move(edges);
    return out;
}

inline Json tree_geometry(const MetricTree& tree, const std::string& type)
{
    Json g;
    g["type"] = type;
    Json lengths = Json::array(), densities = Json::array();
    for (std::size_t e = 0; e < tree.network().num_edges(); ++e) {
        lengths.push_back(tree.edge_length(e));
        densities.push_back(tree.edge_density(e));
    }
    g["edge_lengths"] = std::move(lengths);
    g["densities"] = std::move(densities);
    Json terminals = Json::array();
    for (auto t : tree.terminals()) terminals.push_back(tree.network().id(t));
    g["terminals"] = std::move(terminals);
    return g;
}

inline Json gasket_geometry(const GasketApprox& g)
{
    Json out;
    out["type"] = "gasket";
    out["level"] = g.level;
    out["boundary"] = {g.network.id(g.boundary[0]), g.network.id(g.boundary[1]), g.network.id(g.boundary[2])};
    out["cells"] = g.cells.size();
    return out;
}

inline Json report_to_json(const Report& r)
{
    return {{"check", r.check}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"tolerance", r.tolerance}, {"pass", r.pass}};
}

inline Json reports_to_json(const std::vector<Report>& reports)
{
    Json out = Json::array();
    for (const auto& r : reports) out.push_back(report_to_json(r));
    return out;
}

inline Json vector_to_json(const Eigen::VectorXd& v)
{
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

/// Shortest decimal that round-trips.
inline std::string format_number(double x)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// Writes through a sibling temporary file and renames it into place, so a
/// failed run never leaves a partial artifact.
inline void atomic_write(const std::string& path, const std::string& content)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::invalid_argument, path + ": cannot open for writing");
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error(ErrorCode::invalid_argument, path + ": write failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::invalid_argument, path + ": rename failed");
    }
}

}  // namespace dirform

#endif
