#include "algoseek/featenc.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "algoseek/hash.hpp"

namespace algoseek::featenc {

std::string_view to_string(OpCategory c) {
  switch (c) {
    case OpCategory::AddSub: return "AddSub";
    case OpCategory::MultDiv: return "MultDiv";
    case OpCategory::Deference: return "Deference";
    case OpCategory::Modular: return "Modular";
    case OpCategory::BitOperator: return "BitOperator";
    case OpCategory::LogicalOperator: return "LogicalOperator";
    case OpCategory::RelationalOperator: return "RelationalOperator";
  }
  return "?";
}

int MathHistogram::total() const {
  int sum = 0;
  for (int c : counts) sum += c;
  return sum;
}

namespace {

struct OpSpelling {
  std::string_view text;
  int category;  // -1: recognised but not counted
};

constexpr int cat(OpCategory c) { return static_cast<int>(c); }

// Longest spellings first so a prefix never shadows a longer operator.
constexpr OpSpelling kOps[] = {
    {"\xE2\x89\xA4", cat(OpCategory::RelationalOperator)},  // ≤
    {"\xE2\x89\xA5", cat(OpCategory::RelationalOperator)},  // ≥
    {"\xE2\x89\xA0", cat(OpCategory::RelationalOperator)},  // ≠
    {"\xC3\x97", cat(OpCategory::MultDiv)},                 // ×
    {"\xC2\xB7", cat(OpCategory::MultDiv)},                 // ·
    {"\xC3\xB7", cat(OpCategory::MultDiv)},                 // ÷
    {"<<", cat(OpCategory::BitOperator)},
    {">>", cat(OpCategory::BitOperator)},
    {"<=", cat(OpCategory::RelationalOperator)},
    {">=", cat(OpCategory::RelationalOperator)},
    {"!=", cat(OpCategory::RelationalOperator)},
    {"==", cat(OpCategory::RelationalOperator)},
    {"&&", cat(OpCategory::LogicalOperator)},
    {"||", cat(OpCategory::LogicalOperator)},
    {"->", -1},
    {"+", cat(OpCategory::AddSub)},
    {"-", cat(OpCategory::AddSub)},
    {"*", cat(OpCategory::MultDiv)},
    {"/", cat(OpCategory::MultDiv)},
    {"[", cat(OpCategory::Deference)},
    {"]", cat(OpCategory::Deference)},
    {"%", cat(OpCategory::Modular)},
    {"!", cat(OpCategory::LogicalOperator)},
    {"<", cat(OpCategory::RelationalOperator)},
    {">", cat(OpCategory::RelationalOperator)},
};

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) || c == '_';
}

bool is_token_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace

MathHistogram math_histogram(std::string_view text) {
  MathHistogram h;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_word_byte(c)) {
      std::size_t j = i;
      while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
      const std::string_view word = text.substr(i, j - i);
      if (word == "mod") ++h.counts[cat(OpCategory::Modular)];
      if (word == "and" || word == "or" || word == "not")
        ++h.counts[cat(OpCategory::LogicalOperator)];
      i = j;
      continue;
    }
    bool matched = false;
    for (const OpSpelling& op : kOps) {
      if (text.substr(i).starts_with(op.text)) {
        if (op.category >= 0) ++h.counts[op.category];
        i += op.text.size();
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  return h;
}

std::array<double, kCategories> math_features(const MathHistogram& h) {
  std::array<double, kCategories> out{};
  for (int k = 0; k < kCategories; ++k) out[k] = std::log1p(h.counts[k]);
  return out;
}

std::vector<std::string> subtokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_token_byte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_token_byte(static_cast<unsigned char>(text[j]))) ++j;
    // Split the alphanumeric run [i, j) at case and digit boundaries.
    std::size_t start = i;
    for (std::size_t k = i + 1; k <= j; ++k) {
      bool cut = k == j;
      if (!cut) {
        const auto prev = static_cast<unsigned char>(text[k - 1]);
        const auto cur = static_cast<unsigned char>(text[k]);
        const bool next_lower =
            k + 1 < j && std::islower(static_cast<unsigned char>(text[k + 1]));
        cut = (std::islower(prev) && std::isupper(cur)) ||
              (std::isupper(prev) && std::isupper(cur) && next_lower) ||
              (std::isdigit(prev) != 0) != (std::isdigit(cur) != 0);
      }
      if (cut) {
        std::string piece(text.substr(start, k - start));
        for (char& ch : piece)
          ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        out.push_back(std::move(piece));
        start = k;
      }
    }
    i = j;
  }
  return out;
}

MissingSidecarVector::MissingSidecarVector(std::string graph_id,
                                           icfg::NodeId node_id)
    : Error("sidecar has no vector for node " + std::to_string(node_id) +
            " of graph '" + graph_id + "'") {}

TextEncoder TextEncoder::builtin(int dim, std::uint64_t seed) {
  if (dim <= 0) throw UsageError("encoder.dim must be positive");
  TextEncoder e;
  e.kind_ = Kind::BuiltinHash;
  e.dim_ = dim;
  e.seed_ = seed;
  return e;
}

TextEncoder TextEncoder::sidecar_from_string(std::string_view jsonl) {
  TextEncoder e;
  e.kind_ = Kind::Sidecar;
  e.dim_ = -1;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "sidecar line " + std::to_string(lineno);
    try {
      const auto obj = nlohmann::json::parse(line);
      const auto graph_id = obj.at("graph_id").get<std::string>();
      const auto node_id = obj.at("node_id").get<icfg::NodeId>();
      const auto vec = obj.at("vec").get<std::vector<double>>();
      if (e.dim_ < 0) e.dim_ = static_cast<int>(vec.size());
      if (static_cast<int>(vec.size()) != e.dim_)
        throw Error(where + ": vector length " + std::to_string(vec.size()) +
                    " differs from " + std::to_string(e.dim_));
      e.vectors_[{graph_id, node_id}] =
          Eigen::Map<const Eigen::VectorXd>(vec.data(), e.dim_);
    } catch (const nlohmann::json::exception& ex) {
      throw Error(where + ": " + ex.what());
    }
  }
  if (e.dim_ <= 0) throw Error("sidecar holds no vectors");
  return e;
}

TextEncoder TextEncoder::sidecar(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return sidecar_from_string(ss.str());
}

Eigen::VectorXd TextEncoder::encode_text(std::string_view text) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
  std::uint64_t salt = kFnvOffset;
  for (int b = 0; b < 8; ++b) {
    const char byte = static_cast<char>((seed_ >> (8 * b)) & 0xff);
    salt = fnv1a(std::string_view(&byte, 1), salt);
  }
  auto add = [&](std::string_view prefix, std::string_view feature) {
    const std::uint64_t h = fnv1a(feature, fnv1a(prefix, salt));
    const auto bucket = static_cast<Eigen::Index>((h & 0xffffffffULL) % dim_);
    v[bucket] += (h >> 63) ? -1.0 : 1.0;
  };
  for (const std::string& tok : subtokens(text)) {
    add("w:", tok);
    const std::string padded = "^" + tok + "$";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i)
      add("t:", std::string_view(padded).substr(i, 3));
  }
  const double norm = v.norm();
  if (norm > 0) v /= norm;
  return v;
}

Eigen::VectorXd TextEncoder::encode(const icfg::Icfg& g,
                                    const icfg::IcfgNode& node) const {
  if (kind_ == Kind::BuiltinHash) return encode_text(node.text);
  const auto it = vectors_.find({g.graph_id, node.id});
  if (it == vectors_.end()) throw MissingSidecarVector(g.graph_id, node.id);
  return it->second;
}

Eigen::MatrixXd build_feature_matrix(const icfg::Icfg& g,
                                     const TextEncoder& encoder,
                                     FeatureOptions options) {
  const auto n = static_cast<Eigen::Index>(g.size());
  const int d = encoder.dim();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, d + kCategories);
  for (Eigen::Index i = 0; i < n; ++i) {
    const icfg::IcfgNode& node = g.nodes[i];
    if (options.text) x.row(i).head(d) = encoder.encode(g, node).transpose();
    const bool counts = node.payload == icfg::PayloadKind::MathText ||
                        node.payload == icfg::PayloadKind::CodeText;
    if (options.math && counts) {
      const auto m = math_features(math_histogram(node.text));
      for (int k = 0; k < kCategories; ++k) x(i, d + k) = m[k];
    }
  }
  return x;
}

}  // namespace algoseek::featenc
