#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "algoseek/error.hpp"
#include "algoseek/icfg.hpp"

// Initial node features: a text embedding concatenated with a log-scaled
// histogram of math operators.
namespace algoseek::featenc {

enum class OpCategory {
  AddSub,
  MultDiv,
  Deference,
  Modular,
  BitOperator,
  LogicalOperator,
  RelationalOperator,
};
inline constexpr int kCategories = 7;

std::string_view to_string(OpCategory c);

struct MathHistogram {
  std::array<int, kCategories> counts{};

  int operator[](OpCategory c) const { return counts[static_cast<int>(c)]; }
  int total() const;
  bool operator==(const MathHistogram&) const = default;
};

// Longest-match operator counts. Unicode ≤ ≥ ≠ × · ÷ and the words `mod`,
// `and`, `or`, `not` count as their ASCII counterparts; `->` is member access
// and counts as nothing.
MathHistogram math_histogram(std::string_view text);

// log(1 + count) per category.
std::array<double, kCategories> math_features(const MathHistogram& h);

// Lowercased identifier pieces: camelCase, snake_case, kebab-case and
// letter/digit boundaries all split.
std::vector<std::string> subtokens(std::string_view text);

class MissingSidecarVector : public Error {
 public:
  MissingSidecarVector(std::string graph_id, icfg::NodeId node_id);
};

class TextEncoder {
 public:
  enum class Kind { BuiltinHash, Sidecar };

  static TextEncoder builtin(int dim = 128, std::uint64_t seed = 42);
  // JSON lines of {"graph_id", "node_id", "vec"}; every vector must have the
  // same length.
  static TextEncoder sidecar(const std::filesystem::path& path);
  static TextEncoder sidecar_from_string(std::string_view jsonl);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }

  // Hashed subtoken and character-trigram embedding, L2-normalized; zero for
  // text with no subtokens.
  Eigen::VectorXd encode_text(std::string_view text) const;

  // Builtin: encode_text(node.text). Sidecar: the stored vector.
  Eigen::VectorXd encode(const icfg::Icfg& g, const icfg::IcfgNode& node) const;

 private:
  Kind kind_ = Kind::BuiltinHash;
  int dim_ = 0;
  std::uint64_t seed_ = 0;
  std::map<std::pair<std::string, icfg::NodeId>, Eigen::VectorXd> vectors_;
};

// Blocks to keep in X; a disabled block is zero-filled so dimensions stay fixed.
struct FeatureOptions {
  bool text = true;
  bool math = true;
};

// Row i is text(node i) ‖ log(1 + math histogram of node i). Only math-text
// and code-text payloads contribute operator counts.
Eigen::MatrixXd build_feature_matrix(const icfg::Icfg& g,
                                     const TextEncoder& encoder,
                                     FeatureOptions options = {});

}  // namespace algoseek::featenc
