#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "algoseek/error.hpp"
#include "algoseek/featenc.hpp"
#include "algoseek/gae.hpp"
#include "algoseek/icfg.hpp"
#include "algoseek/plang.hpp"

// Query pipeline: node matching by cosine similarity, complete-linkage
// grouping over ICFG hop distance, confidence scoring and fragment emission.
namespace algoseek::search {

class EmptyIndex : public Error {
 public:
  EmptyIndex() : Error("the vector index is empty") {}
};

class ConfigMismatch : public Error {
 public:
  ConfigMismatch(const std::string& index_hash, const std::string& model_hash);
};

class VectorDimensionMismatch : public Error {
 public:
  VectorDimensionMismatch(Eigen::Index expected, Eigen::Index actual);
};

struct IndexEntry {
  std::string graph_id;
  icfg::NodeId node_id = 0;
  Eigen::VectorXd vec;
  icfg::SourceLoc loc;  // empty file for entry/exit nodes
};

// Entries sorted by (graph_id, node_id). Immutable once built.
class VectorIndex {
 public:
  VectorIndex() = default;
  VectorIndex(std::vector<IndexEntry> entries, std::string config_hash);

  Eigen::Index dim() const { return dim_; }
  const std::string& config_hash() const { return config_hash_; }
  const std::vector<IndexEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  double norm(std::size_t i) const { return norms_[i]; }

  bool operator==(const VectorIndex& other) const;

 private:
  Eigen::Index dim_ = 0;
  std::string config_hash_;
  std::vector<IndexEntry> entries_;
  std::vector<double> norms_;
};

// u.v / (|u| |v|); 0 when either vector is zero.
double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

struct Match {
  icfg::NodeId query_node = 0;
  std::string graph_id;
  icfg::NodeId node_id = 0;
  double similarity = 0.0;
  bool operator==(const Match&) const = default;
};

inline constexpr std::size_t kDefaultTopK = 100;

// Exact scan. Similarity descending, ties by (graph_id, node_id).
std::vector<Match> top_k(const VectorIndex& index, const Eigen::VectorXd& query,
                         std::size_t k, icfg::NodeId query_node = 0);

struct Span {
  std::string file;
  int line_start = 0;
  int line_end = 0;
  bool operator==(const Span&) const = default;
};

struct CandidateGroup {
  std::string graph_id;
  std::vector<icfg::NodeId> members;  // sorted ascending
  int qc = 0;
  int distance = 0;  // diameter in hops; 0 for a singleton
  double gamma = 0.0;
  std::vector<Span> fragments;
  bool operator==(const CandidateGroup&) const = default;
};

// gamma = qc + 1 / max(1, distance).
double score_group(int qc, int distance);

// Number of distinct query nodes with a match inside the group.
int covered_query_nodes(const CandidateGroup& group, std::span<const Match> matches);

// Complete-linkage agglomeration per source graph. Every singleton and every
// merged group is a candidate; groups at infinite distance never merge, and
// among equally close pairs the lexicographically smaller union merges first.
// Candidates come back per graph (graph_id order) in creation order, with
// qc, distance and gamma filled in.
std::vector<CandidateGroup> group_nodes(std::span<const Match> matches,
                                        std::span<const icfg::Icfg> graphs);

inline constexpr int kDefaultGapLines = 2;

// Member locations merged per file into spans (gaps of at most `gap_lines`
// bridged). Groups with no located member are dropped. Sorted by gamma
// descending, then larger qc, fewer members, graph_id, members.
std::vector<CandidateGroup> emit_fragments(std::vector<CandidateGroup> groups,
                                           const VectorIndex& index,
                                           int gap_lines = kDefaultGapLines);

struct SearchOptions {
  std::size_t k = kDefaultTopK;
  int gap_lines = kDefaultGapLines;
  featenc::FeatureOptions features;
  bool use_graph = true;  // false: embeddings are X alone, Z zeroed
};

struct SearchResult {
  std::string query_id;
  std::vector<CandidateGroup> groups;
  bool operator==(const SearchResult&) const = default;
};

// Final embeddings (Z ‖ X) for every node of one graph.
Eigen::MatrixXd node_embeddings(const icfg::Icfg& graph, const gae::GaeModel& model,
                                const featenc::TextEncoder& encoder,
                                const SearchOptions& options);

// Embeds every graph; entry and exit nodes are indexed without a location.
VectorIndex build_index(std::span<const icfg::Icfg> graphs, const gae::GaeModel& model,
                        const featenc::TextEncoder& encoder, const SearchOptions& options);

SearchResult search(const plang::PProgram& query, std::string query_id,
                    const VectorIndex& index, std::span<const icfg::Icfg> graphs,
                    const gae::GaeModel& model, const featenc::TextEncoder& encoder,
                    const SearchOptions& options = {});

std::string to_json(const VectorIndex& index);
VectorIndex index_from_json(std::string_view text);
void write_index(const VectorIndex& index, const std::filesystem::path& path);
VectorIndex read_index(const std::filesystem::path& path);

std::string to_json(const SearchResult& result);
SearchResult result_from_json(std::string_view text);

}  // namespace algoseek::search
