#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "algoseek/error.hpp"
#include "algoseek/plang.hpp"

// Interprocedural control-flow graphs shared by p-code queries and source
// code, their builders, and the JSON interchange format.
namespace algoseek::icfg {

using NodeId = int;

enum class NodeKind { Entry, Exit, Statement, Condition, CallSite };
enum class PayloadKind { None, MathText, NlText, CodeText };
enum class EdgeKind { Flow, FlowTrue, FlowFalse, Call, Return };

struct SourceLoc {
  std::string file;
  int line_start = 0;
  int line_end = 0;
  bool operator==(const SourceLoc&) const = default;
};

struct IcfgNode {
  NodeId id = 0;
  NodeKind kind = NodeKind::Statement;
  PayloadKind payload = PayloadKind::None;
  std::string text;
  SourceLoc loc;
  std::string function;
  bool operator==(const IcfgNode&) const = default;
};

struct IcfgEdge {
  NodeId src = 0;
  NodeId dst = 0;
  EdgeKind kind = EdgeKind::Flow;
  bool operator==(const IcfgEdge&) const = default;
};

// Node ids are dense: nodes[i].id == i.
struct Icfg {
  std::string graph_id;
  std::vector<IcfgNode> nodes;
  std::vector<IcfgEdge> edges;

  std::size_t size() const { return nodes.size(); }
  bool operator==(const Icfg&) const = default;
};

// Dense n x n 0/1 matrix, row-major. at(i, j) == 1 iff some edge i -> j.
struct Adjacency {
  std::size_t n = 0;
  std::vector<std::uint8_t> bits;
  std::uint8_t at(std::size_t i, std::size_t j) const { return bits[i * n + j]; }
};

Adjacency adjacency(const Icfg& g);

// Neighbour lists with edge direction ignored, sorted and deduplicated.
std::vector<std::vector<NodeId>> undirected_neighbors(const Icfg& g);

// Structural invariants (dense ids, one entry/exit per function, edge kinds
// legal for their endpoints, undirected reachability from an entry).
// Returns human-readable violations; empty when the graph is well formed.
std::vector<std::string> check_invariants(const Icfg& g);

std::string_view to_string(NodeKind k);
std::string_view to_string(PayloadKind k);
std::string_view to_string(EdgeKind k);

// ------------------------------------------------------------ p-code builder

Icfg build_pcode_icfg(const plang::PProgram& program,
                      std::string graph_id = "query",
                      std::string file = "<query>");

// ------------------------------------------------------- source extraction

enum class Language { C, Java };

struct SourceFile {
  std::string path;  // recorded verbatim in node locations
  Language language = Language::C;
  std::string text;
};

struct Extraction {
  std::vector<Icfg> graphs;
  std::vector<std::string> diagnostics;
};

class UnbalancedBraces : public Error {
 public:
  UnbalancedBraces(std::string file, int line);
  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_;
};

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("no functions found in the corpus") {}
};

// One graph per set of functions connected by resolved calls; a function
// nobody calls and that calls nothing in the corpus is a graph of its own.
// Files are processed in path order so results do not depend on input order.
Extraction extract_source_icfg(std::vector<SourceFile> files);

// Throws UnbalancedBraces if the file's braces do not pair up.
void validate_source(const SourceFile& file);

// Reads a file from disk, inferring the language from the extension
// (.c/.h -> C, .java -> Java). `recorded_path` goes into node locations.
SourceFile load_source_file(const std::filesystem::path& path,
                            std::string recorded_path);

// --------------------------------------------------------- shortest paths

inline constexpr int kInfinity = std::numeric_limits<int>::max();

class UnknownNode : public Error {
 public:
  explicit UnknownNode(NodeId id)
      : Error("unknown node id " + std::to_string(id)) {}
};

// Undirected hop count; kInfinity when disconnected.
int shortest_path_hops(const Icfg& g, NodeId x, NodeId y);

// Hop counts from `source` to every node (kInfinity where unreachable).
std::vector<int> bfs_hops(const std::vector<std::vector<NodeId>>& neighbors,
                          NodeId source);

// ------------------------------------------------------------------- JSON

class SchemaError : public Error {
 public:
  SchemaError(std::string field, std::string reason);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

std::string to_json(std::span<const Icfg> graphs);
std::vector<Icfg> from_json(std::string_view text);

void write_icfg_json(std::span<const Icfg> graphs,
                     const std::filesystem::path& path);
std::vector<Icfg> read_icfg_json(const std::filesystem::path& path);

}  // namespace algoseek::icfg
