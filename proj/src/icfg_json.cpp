#include <fstream>
#include <sstream>

#include <json.hpp>

#include "algoseek/icfg.hpp"

namespace algoseek::icfg {

using nlohmann::json;

SchemaError::SchemaError(std::string field, std::string reason)
    : Error("schema error at '" + field + "': " + reason),
      field_(std::move(field)) {}

namespace {

template <class Enum, std::size_t N>
Enum parse_enum(const std::string& text, const Enum (&values)[N],
                const std::string& field) {
  for (Enum v : values)
    if (to_string(v) == text) return v;
  throw SchemaError(field, "unknown value '" + text + "'");
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(where + "." + key, "missing");
  return *it;
}

template <class T>
T get_as(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw SchemaError(where + "." + key, "wrong type");
  }
}

const json& require_array(const json& obj, const char* key,
                          const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_array()) throw SchemaError(where + "." + key, "expected an array");
  return v;
}

constexpr NodeKind kNodeKinds[] = {NodeKind::Entry, NodeKind::Exit,
                                   NodeKind::Statement, NodeKind::Condition,
                                   NodeKind::CallSite};
constexpr PayloadKind kPayloadKinds[] = {
    PayloadKind::None, PayloadKind::MathText, PayloadKind::NlText,
    PayloadKind::CodeText};
constexpr EdgeKind kEdgeKinds[] = {EdgeKind::Flow, EdgeKind::FlowTrue,
                                   EdgeKind::FlowFalse, EdgeKind::Call,
                                   EdgeKind::Return};

json graph_to_json(const Icfg& g) {
  json nodes = json::array();
  for (const IcfgNode& n : g.nodes) {
    nodes.push_back({{"id", n.id},
                     {"kind", to_string(n.kind)},
                     {"payload_kind", to_string(n.payload)},
                     {"text", n.text},
                     {"file", n.loc.file},
                     {"line_start", n.loc.line_start},
                     {"line_end", n.loc.line_end},
                     {"function", n.function}});
  }
  json edges = json::array();
  for (const IcfgEdge& e : g.edges)
    edges.push_back(
        {{"src", e.src}, {"dst", e.dst}, {"kind", to_string(e.kind)}});
  return {{"graph_id", g.graph_id}, {"nodes", nodes}, {"edges", edges}};
}

Icfg graph_from_json(const json& obj, const std::string& where) {
  Icfg g;
  g.graph_id = get_as<std::string>(obj, "graph_id", where);
  const json& nodes = require_array(obj, "nodes", where);
  const json& edges = require_array(obj, "edges", where);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string at = where + ".nodes[" + std::to_string(i) + "]";
    const json& n = nodes[i];
    IcfgNode node;
    node.id = get_as<int>(n, "id", at);
    if (node.id != static_cast<int>(i))
      throw SchemaError(at + ".id", "node ids must be 0..n-1 in order");
    node.kind = parse_enum(get_as<std::string>(n, "kind", at), kNodeKinds,
                           at + ".kind");
    node.payload = parse_enum(get_as<std::string>(n, "payload_kind", at),
                              kPayloadKinds, at + ".payload_kind");
    node.text = get_as<std::string>(n, "text", at);
    node.loc.file = get_as<std::string>(n, "file", at);
    node.loc.line_start = get_as<int>(n, "line_start", at);
    node.loc.line_end = get_as<int>(n, "line_end", at);
    node.function = get_as<std::string>(n, "function", at);
    g.nodes.push_back(std::move(node));
  }
  const auto n = static_cast<int>(g.nodes.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string at = where + ".edges[" + std::to_string(i) + "]";
    IcfgEdge e;
    e.src = get_as<int>(edges[i], "src", at);
    e.dst = get_as<int>(edges[i], "dst", at);
    if (e.src < 0 || e.src >= n) throw SchemaError(at + ".src", "no such node");
    if (e.dst < 0 || e.dst >= n) throw SchemaError(at + ".dst", "no such node");
    e.kind = parse_enum(get_as<std::string>(edges[i], "kind", at), kEdgeKinds,
                        at + ".kind");
    g.edges.push_back(e);
  }
  return g;
}

}  // namespace

std::string to_json(std::span<const Icfg> graphs) {
  json arr = json::array();
  for (const Icfg& g : graphs) arr.push_back(graph_to_json(g));
  return arr.dump(1) + "\n";
}

std::vector<Icfg> from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", e.what());
  }
  if (!doc.is_array()) throw SchemaError("$", "expected an array of graphs");
  std::vector<Icfg> out;
  for (std::size_t i = 0; i < doc.size(); ++i)
    out.push_back(graph_from_json(doc[i], "$[" + std::to_string(i) + "]"));
  return out;
}

void write_icfg_json(std::span<const Icfg> graphs,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(graphs);
}

std::vector<Icfg> read_icfg_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace algoseek::icfg
