#include "algoseek/pseudoconv.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "algoseek/featenc.hpp"
#include "algoseek/hash.hpp"
#include "algoseek/plang.hpp"

namespace algoseek::pseudoconv {

namespace {

constexpr std::string_view kStopwords[] = {
    "a",        "about",   "above",  "after",   "again",   "against", "all",
    "am",       "an",      "and",    "any",     "are",     "as",      "at",
    "be",       "because", "been",   "before",  "being",   "below",   "between",
    "both",     "but",     "by",     "can",     "could",   "did",     "do",
    "does",     "doing",   "down",   "during",  "each",    "few",     "for",
    "from",     "further", "had",    "has",     "have",    "having",  "he",
    "her",      "here",    "hers",   "herself", "him",     "himself", "his",
    "how",      "i",       "if",     "in",      "into",    "is",      "it",
    "its",      "itself",  "just",   "me",      "more",    "most",    "my",
    "myself",   "no",      "nor",    "not",     "now",     "of",      "off",
    "on",       "once",    "only",   "or",      "other",   "our",     "ours",
    "out",      "over",    "own",    "same",    "she",     "should",  "so",
    "some",     "such",    "than",   "that",    "the",     "their",   "theirs",
    "them",     "then",    "there",  "these",   "they",    "this",    "those",
    "through",  "to",      "too",    "under",   "until",   "up",      "very",
    "was",      "we",      "were",   "what",    "when",    "where",   "which",
    "while",    "who",     "whom",   "why",     "will",    "with",    "would",
    "you",      "your",    "yours",  "yourself", "ourselves", "themselves",
    "whose",
};

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line))
    if (!trim(line).empty()) out.emplace_back(trim(line));
  return out;
}

std::string_view label_name(Label l) {
  return l == Label::Math ? "math" : "natural-language";
}

}  // namespace

bool is_stopword(std::string_view word) {
  return std::find(std::begin(kStopwords), std::end(kStopwords), word) !=
         std::end(kStopwords);
}

void PropagationConfig::validate() const {
  if (!(alpha > 0 && alpha < 1)) throw UsageError("alpha must lie in (0, 1)");
  if (!(sigma > 0)) throw UsageError("sigma must be positive");
  if (max_iterations <= 0) throw UsageError("max-iterations must be positive");
  if (!(epsilon > 0)) throw UsageError("epsilon must be positive");
}

MissingClass::MissingClass(Label missing)
    : Error("no labeled " + std::string(label_name(missing)) + " samples") {}

StructureError::StructureError(int line, const std::string& reason)
    : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}

Eigen::VectorXd featurize(std::string_view line) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kFeatureDim);
  // Statement terminators and block braces carry no signal that pseudo code
  // could share.
  line = trim(line);
  while (!line.empty() && (line.back() == ';' || line.back() == '{' || line.back() == '}'))
    line = trim(line.substr(0, line.size() - 1));
  while (!line.empty() && line.front() == '}') line = trim(line.substr(1));
  if (line.empty()) return v;

  const auto ops = featenc::math_features(featenc::math_histogram(line));
  for (int k = 0; k < featenc::kCategories; ++k) v[k] = ops[k];

  int digits = 0, visible = 0;
  for (unsigned char c : line) {
    if (std::isspace(c)) continue;
    ++visible;
    if (std::isdigit(c)) ++digits;
  }
  v[7] = visible ? static_cast<double>(digits) / visible : 0.0;

  int words = 0, stop = 0, tokens = 0;
  std::istringstream ws{std::string(line)};
  for (std::string tok; ws >> tok;) {
    ++tokens;
    const std::string w = lowercase(tok);
    if (std::all_of(w.begin(), w.end(),
                    [](unsigned char c) { return std::isalpha(c); })) {
      ++words;
      if (is_stopword(w)) ++stop;
    }
  }
  v[kStopwordIndex] = words ? static_cast<double>(stop) / words : 0.0;
  v[9] = std::log1p(tokens);

  const std::string padded = " " + lowercase(line) + " ";
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    const std::uint64_t h = fnv1a(std::string_view(padded).substr(i, 3));
    v[10 + static_cast<int>(h % kTrigramBuckets)] += 1.0;
  }
  return v / v.norm();
}

Eigen::MatrixXd affinity(const Eigen::MatrixXd& x, double sigma) {
  const Eigen::Index n = x.rows();
  const Eigen::VectorXd sq = x.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * x * x.transpose()).colwise() + sq;
  d2.rowwise() += sq.transpose();
  Eigen::MatrixXd w = (-d2.cwiseMax(0.0) / (2.0 * sigma * sigma)).array().exp();
  w.diagonal().setZero();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = w.row(i).sum();
    if (s > 0) w.row(i) /= s;
  }
  return w;
}

Eigen::MatrixXd seed_matrix(const std::vector<LineSample>& samples) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (samples[i].label == Label::Math) y(i, 0) = 1.0;
    if (samples[i].label == Label::NaturalLanguage) y(i, 1) = 1.0;
  }
  if (y.col(0).sum() == 0) throw MissingClass(Label::Math);
  if (y.col(1).sum() == 0) throw MissingClass(Label::NaturalLanguage);
  return y;
}

PropagationResult propagate(const std::vector<LineSample>& samples,
                            const PropagationConfig& config) {
  config.validate();
  const Eigen::MatrixXd y = seed_matrix(samples);
  const auto n = static_cast<Eigen::Index>(samples.size());
  const Eigen::Index dim = samples.front().features.size();
  Eigen::MatrixXd x(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (samples[i].features.size() != dim)
      throw Error("sample " + std::to_string(i) + " has feature dimension " +
                  std::to_string(samples[i].features.size()) + ", expected " +
                  std::to_string(dim));
    x.row(i) = samples[i].features.transpose();
  }
  const Eigen::MatrixXd s = affinity(x, config.sigma);
  const double a = config.alpha;
  const Eigen::MatrixXd base = (1.0 - a) * y;

  PropagationResult r;
  Eigen::MatrixXd f = y;
  while (r.iterations < config.max_iterations) {
    Eigen::MatrixXd next = a * (s * f) + base;
    const double delta = (next - f).cwiseAbs().maxCoeff();
    f.swap(next);
    ++r.iterations;
    if (a / (1.0 - a) * delta < config.epsilon) {
      r.converged = true;
      break;
    }
  }
  r.scores = f;
  r.labels.resize(samples.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Label given = samples[i].label;
    r.labels[i] = given != Label::Unlabeled ? given
                  : f(i, 0) >= f(i, 1)      ? Label::Math
                                            : Label::NaturalLanguage;
  }
  return r;
}

std::vector<Label> propagate_labels(const std::vector<LineSample>& samples,
                                    const PropagationConfig& config) {
  return propagate(samples, config).labels;
}

// ------------------------------------------------------------- classifier

StatementClassifier::StatementClassifier(std::vector<std::string> comment_lines,
                                         std::vector<std::string> code_lines,
                                         PropagationConfig config)
    : config_(config) {
  config_.validate();
  if (code_lines.empty()) throw MissingClass(Label::Math);
  if (comment_lines.empty()) throw MissingClass(Label::NaturalLanguage);
  for (auto& t : comment_lines)
    seeds_.push_back({t, Label::NaturalLanguage, featurize(t)});
  for (auto& t : code_lines) seeds_.push_back({t, Label::Math, featurize(t)});
}

StatementClassifier StatementClassifier::from_files(
    const std::filesystem::path& comments, const std::filesystem::path& code,
    PropagationConfig config) {
  return StatementClassifier(read_lines(comments), read_lines(code), config);
}

bool StatementClassifier::forced_math(std::string_view text) {
  if (featenc::math_histogram(text).total() > 0) return true;
  for (std::string_view sym : {"=", "\xE2\x86\x90" /* ← */, ":=",
                               "\xE2\x88\x88" /* ∈ */, "\xE2\x88\x89" /* ∉ */,
                               "\xE2\x88\xAA" /* ∪ */, "\xE2\x88\xA9" /* ∩ */,
                               "\xE2\x88\x85" /* ∅ */, "\xE2\x88\x9E" /* ∞ */,
                               "\xE2\x8C\x8A" /* ⌊ */, "\xE2\x8C\x88" /* ⌈ */})
    if (text.find(sym) != std::string_view::npos) return true;
  return false;
}

std::vector<Label> StatementClassifier::classify(
    const std::vector<std::string>& statements) const {
  std::vector<Label> out(statements.size(), Label::Math);
  std::vector<LineSample> samples = seeds_;
  std::vector<std::size_t> slot;
  for (std::size_t i = 0; i < statements.size(); ++i) {
    if (forced_math(statements[i])) continue;
    samples.push_back({statements[i], Label::Unlabeled, featurize(statements[i])});
    slot.push_back(i);
  }
  if (slot.empty()) return out;
  const auto labels = propagate_labels(samples, config_);
  for (std::size_t k = 0; k < slot.size(); ++k)
    out[slot[k]] = labels[seeds_.size() + k];
  return out;
}

// ---------------------------------------------------------------- convert

namespace {

using namespace plang;

struct SourceLine {
  int indent = 0;
  std::string text;
  int number = 0;  // 1-based line in the input
};

struct Block {
  SourceLine line;
  std::vector<Block> children;
};

int leading_columns(std::string_view s) {
  int col = 0;
  for (char c : s) {
    if (c == ' ') ++col;
    else if (c == '\t') col = (col / 4 + 1) * 4;
    else break;
  }
  return col;
}

std::string strip_comment(std::string_view s) {
  std::size_t cut = s.find("//");
  const std::size_t tri = s.find("\xE2\x96\xB7");  // ▷
  if (tri < cut) cut = tri;
  return std::string(s.substr(0, cut));
}

std::string strip_delimiters(std::string_view s) {
  std::string out;
  for (char c : s)
    if (c != '$' && c != '@') out += c;
  return out;
}

// Length of a leading line number followed by whitespace, or 0.
std::size_t line_number_prefix(std::string_view s) {
  const std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos || !std::isdigit(static_cast<unsigned char>(s[b])))
    return 0;
  std::size_t e = b;
  while (e < s.size() && std::isdigit(static_cast<unsigned char>(s[e]))) ++e;
  if (e >= s.size() || (s[e] != ' ' && s[e] != '\t')) return 0;
  if (trim(s.substr(e)).empty()) return 0;
  return e;
}

std::vector<SourceLine> split_lines(std::string_view pseudo) {
  std::vector<std::pair<int, std::string>> raw;
  std::size_t pos = 0;
  int number = 0;
  while (pos <= pseudo.size()) {
    std::size_t nl = pseudo.find('\n', pos);
    if (nl == std::string_view::npos) nl = pseudo.size();
    ++number;
    const std::string_view original = pseudo.substr(pos, nl - pos);
    std::string text = strip_comment(original);
    const std::string_view kept = trim(text);
    // A numbered line holding only a comment leaves its number behind.
    const bool bare_number =
        text.size() < original.size() && !kept.empty() &&
        std::all_of(kept.begin(), kept.end(),
                    [](unsigned char c) { return std::isdigit(c); });
    if (!kept.empty() && !bare_number) raw.emplace_back(number, std::move(text));
    pos = nl + 1;
  }
  // Textbook listings number every body line; strip the numbers only when
  // all lines after the first carry one.
  bool numbered = raw.size() > 1;
  for (std::size_t i = 1; i < raw.size() && numbered; ++i)
    numbered = line_number_prefix(raw[i].second) > 0;
  std::vector<SourceLine> out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::string text = raw[i].second;
    const std::size_t cut = numbered ? line_number_prefix(text) : 0;
    if (cut) text.replace(0, cut, std::string(cut, ' '));
    out.push_back({leading_columns(text), std::string(trim(text)), raw[i].first});
  }
  return out;
}

std::vector<Block> build_tree(const std::vector<SourceLine>& lines) {
  std::vector<Block> roots;
  if (lines.empty()) return roots;
  // Stack of (indent, list receiving lines at that indent).
  std::vector<std::pair<int, std::vector<Block>*>> stack{{lines[0].indent, &roots}};
  for (const SourceLine& l : lines) {
    if (l.indent > stack.back().first) {
      std::vector<Block>* list = stack.back().second;
      if (list->empty())
        throw StructureError(l.number, "indented line with nothing to nest under");
      stack.emplace_back(l.indent, &list->back().children);
    } else {
      while (l.indent < stack.back().first) {
        stack.pop_back();
        if (stack.empty() || l.indent > stack.back().first)
          throw StructureError(l.number, "dedent to an indentation level never opened");
      }
    }
    stack.back().second->push_back({l, {}});
  }
  return roots;
}

bool is_plain_name(std::string_view s) {
  try {
    const auto toks = tokenize(s);
    return toks.size() == 2 && toks[0].kind == TokenKind::Name &&
           toks[0].leading.empty() && toks[1].text.empty() &&
           toks[1].leading.empty();
  } catch (const Error&) {
    return false;
  }
}

// Splits `s` at top-level occurrences of `sep` (outside (), [] and {}).
std::vector<std::string> split_top(std::string_view s, std::string_view sep) {
  std::vector<std::string> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    else if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
    else if (depth == 0 && s.substr(i).starts_with(sep)) {
      parts.emplace_back(s.substr(start, i - start));
      i += sep.size() - 1;
      start = i + 1;
    }
  }
  parts.emplace_back(s.substr(start));
  return parts;
}

// First top-level position of the whole word `word` (case-insensitive), or npos.
std::size_t find_word(std::string_view s, std::string_view word) {
  const std::string lower = lowercase(s);
  int depth = 0;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    const char c = lower[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    else if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
    if (depth != 0 || !std::string_view(lower).substr(i).starts_with(word)) continue;
    const bool left = i == 0 || std::isspace(static_cast<unsigned char>(lower[i - 1]));
    const std::size_t e = i + word.size();
    const bool right = e == lower.size() || std::isspace(static_cast<unsigned char>(lower[e]));
    if (left && right) return i;
  }
  return std::string_view::npos;
}

// Drops a leading keyword of `n` bytes and surrounding space.
std::string after(std::string_view s, std::size_t n) {
  return std::string(trim(s.substr(std::min(n, s.size()))));
}

// Removes a trailing `then`, `do` or `:`.
std::string strip_trailer(std::string text) {
  for (;;) {
    std::string_view t = trim(text);
    if (t.ends_with(":")) {
      text = std::string(trim(t.substr(0, t.size() - 1)));
      continue;
    }
    bool stripped = false;
    for (std::string_view w : {"then", "do"}) {
      if (t.size() >= w.size() && lowercase(t.substr(t.size() - w.size())) == w &&
          (t.size() == w.size() ||
           std::isspace(static_cast<unsigned char>(t[t.size() - w.size() - 1])))) {
        text = std::string(trim(t.substr(0, t.size() - w.size())));
        stripped = true;
        break;
      }
    }
    if (!stripped) return std::string(t);
  }
}

// Splits "COND then STMT" into the condition and the inline statement.
std::pair<std::string, std::string> split_inline(std::string_view text,
                                                 std::string_view word) {
  const std::size_t at = find_word(text, word);
  if (at == std::string_view::npos) return {strip_trailer(std::string(text)), ""};
  return {strip_trailer(std::string(text.substr(0, at))),
          std::string(trim(text.substr(at + word.size())))};
}

enum class Head {
  If, ElseIf, Else, While, ForEach, For, Repeat, Until, Return, Other
};

struct HeadMatch {
  Head head = Head::Other;
  std::size_t length = 0;  // bytes of the keyword prefix
};

HeadMatch match_head(std::string_view text) {
  const std::string lower = lowercase(text);
  auto word_at = [&](std::string_view w) {
    return lower.starts_with(w) &&
           (lower.size() == w.size() ||
            !std::isalnum(static_cast<unsigned char>(lower[w.size()])));
  };
  auto two_words = [&](std::string_view a, std::string_view b) -> std::size_t {
    if (!word_at(a)) return 0;
    std::size_t i = a.size();
    while (i < lower.size() && (lower[i] == ' ' || lower[i] == '\t')) ++i;
    if (i == a.size()) return 0;
    if (!std::string_view(lower).substr(i).starts_with(b)) return 0;
    const std::size_t e = i + b.size();
    if (e < lower.size() && std::isalnum(static_cast<unsigned char>(lower[e]))) return 0;
    return e;
  };
  if (std::size_t n = two_words("else", "if")) return {Head::ElseIf, n};
  if (std::size_t n = two_words("for", "each")) return {Head::ForEach, n};
  for (auto [w, h] : {std::pair<std::string_view, Head>{"elseif", Head::ElseIf},
                      {"elsif", Head::ElseIf},
                      {"else-if", Head::ElseIf},
                      {"foreach", Head::ForEach},
                      {"if", Head::If},
                      {"else", Head::Else},
                      {"while", Head::While},
                      {"for", Head::For},
                      {"repeat", Head::Repeat},
                      {"until", Head::Until},
                      {"return", Head::Return}}) {
    if (word_at(w)) return {h, w.size()};
  }
  return {};
}

class Translator {
 public:
  enum class Mode { Collect, Build };

  Translator(Mode mode, std::vector<Label> labels = {})
      : mode_(mode), labels_(std::move(labels)) {}

  const std::vector<std::string>& pending() const { return pending_; }

  PProgram program(const std::vector<SourceLine>& lines) {
    PFunction fn;
    fn.name = "ALGORITHM";
    std::size_t body_from = 0;
    if (lines.size() > 1) {
      if (auto call = as_call(lines[0].text);
          call && lines[1].indent > lines[0].indent) {
        fn.name = call->name;
        fn.params = call->args;
        fn.line = lines[0].number;
        body_from = 1;
      }
    }
    std::vector<SourceLine> body(lines.begin() + static_cast<long>(body_from),
                                 lines.end());
    if (body.empty())
      throw StructureError(lines.empty() ? 1 : lines.back().number,
                           "no statements");
    fn.body = suite(build_tree(body), body.front().number);
    PProgram p;
    p.functions.push_back(std::move(fn));
    return p;
  }

 private:
  PExpr forced(std::string text) { return PExpr::math(strip_delimiters(text)); }

  PExpr classified(std::string text) {
    text = strip_delimiters(text);
    if (StatementClassifier::forced_math(text)) return PExpr::math(std::move(text));
    if (mode_ == Mode::Collect) {
      pending_.push_back(text);
      return PExpr::math(std::move(text));
    }
    const Label l = labels_.at(cursor_++);
    return l == Label::NaturalLanguage ? PExpr::nl(std::move(text))
                                       : PExpr::math(std::move(text));
  }

  std::optional<CallStmt> as_call(std::string_view text) {
    text = trim(text);
    if (!text.ends_with(")")) return std::nullopt;
    const std::size_t open = text.find('(');
    if (open == std::string_view::npos) return std::nullopt;
    const std::string name(trim(text.substr(0, open)));
    if (!is_plain_name(name) || is_keyword(name)) return std::nullopt;
    const std::string_view inner = text.substr(open + 1, text.size() - open - 2);
    // The parenthesis at `open` must close at the end of the line.
    int depth = 0;
    for (char c : inner) {
      if (c == '(') ++depth;
      if (c == ')' && --depth < 0) return std::nullopt;
    }
    if (depth != 0) return std::nullopt;
    CallStmt c;
    c.name = name;
    if (!trim(inner).empty()) {
      for (const std::string& a : split_top(inner, ",")) {
        const std::string arg = strip_delimiters(trim(a));
        if (is_plain_name(arg) && !is_keyword(arg))
          c.args.emplace_back(arg);
        else
          c.args.emplace_back(PExpr::math(arg));
      }
    }
    return c;
  }

  PTest test(std::string_view text) {
    const auto ors = split_top(text, " or ");
    if (ors.size() > 1) {
      PTest t = test(ors[0]);
      for (std::size_t i = 1; i < ors.size(); ++i) t = make_or(std::move(t), test(ors[i]));
      return t;
    }
    const auto ands = split_top(text, " and ");
    if (ands.size() > 1) {
      PTest t = test(ands[0]);
      for (std::size_t i = 1; i < ands.size(); ++i)
        t = make_and(std::move(t), test(ands[i]));
      return t;
    }
    const std::string_view t = trim(text);
    if (t.starts_with("not ")) return make_not(test(t.substr(4)));
    return leaf(classified(std::string(t)));
  }

  // Every descendant's text, in order, for lines that wrap a plain statement.
  static void flatten(const std::vector<Block>& blocks, std::string& out) {
    for (const Block& b : blocks) {
      out += " " + b.line.text;
      flatten(b.children, out);
    }
  }

  PStmt simple(const Block& b, std::string text) {
    flatten(b.children, text);
    PStmt s;
    s.line = b.line.number;
    if (auto c = as_call(text)) {
      s.node = std::move(*c);
    } else {
      s.node = ExprStmt{classified(text)};
    }
    return s;
  }

  Suite body_of(const Block& b, const std::string& inline_stmt) {
    std::vector<Block> children;
    if (!inline_stmt.empty()) children.push_back({{b.line.indent + 1, inline_stmt, b.line.number}, {}});
    children.insert(children.end(), b.children.begin(), b.children.end());
    if (children.empty())
      throw StructureError(b.line.number, "block has no statements");
    return suite(children, b.line.number);
  }

  Suite suite(const std::vector<Block>& blocks, int line) {
    Suite out;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const Block& b = blocks[i];
      const std::string& text = b.line.text;
      const HeadMatch h = match_head(text);
      PStmt s;
      s.line = b.line.number;
      switch (h.head) {
        case Head::If: {
          IfStmt st;
          auto [cond, rest] = split_inline(after(text, h.length), "then");
          st.test = test(cond);
          st.then_body = body_of(b, rest);
          while (i + 1 < blocks.size()) {
            const Block& nb = blocks[i + 1];
            const HeadMatch nh = match_head(nb.line.text);
            if (nh.head == Head::ElseIf) {
              auto [c, r] = split_inline(after(nb.line.text, nh.length), "then");
              ElseIf e;
              e.test = test(c);
              e.body = body_of(nb, r);
              e.line = nb.line.number;
              st.elifs.push_back(std::move(e));
              ++i;
            } else if (nh.head == Head::Else) {
              st.else_body = body_of(nb, strip_trailer(after(nb.line.text, nh.length)));
              ++i;
              break;
            } else {
              break;
            }
          }
          s.node = std::move(st);
          break;
        }
        case Head::ElseIf:
        case Head::Else:
          throw StructureError(b.line.number, "else without a matching if");
        case Head::While: {
          auto [cond, rest] = split_inline(after(text, h.length), "do");
          WhileStmt w;
          w.test = test(cond);
          w.body = body_of(b, rest);
          s.node = std::move(w);
          break;
        }
        case Head::ForEach:
        case Head::For: {
          auto [header, rest] = split_inline(after(text, h.length), "do");
          ForStmt f;
          f.each = h.head == Head::ForEach;
          const std::size_t to = f.each ? std::string::npos : find_word(header, "to");
          const std::size_t downto = f.each ? std::string::npos : find_word(header, "downto");
          const std::size_t at = std::min(to, downto);
          if (at == std::string::npos) {
            f.header = classified(header);
          } else {
            const bool down = at == downto;
            f.direction = down ? Direction::Downto : Direction::To;
            f.header = forced(std::string(trim(std::string_view(header).substr(0, at))));
            f.bound = forced(std::string(
                trim(std::string_view(header).substr(at + (down ? 6 : 2)))));
          }
          f.body = body_of(b, rest);
          s.node = std::move(f);
          break;
        }
        case Head::Repeat: {
          RepeatStmt r;
          r.body = body_of(b, after(text, h.length));
          if (i + 1 >= blocks.size() || match_head(blocks[i + 1].line.text).head != Head::Until)
            throw StructureError(b.line.number, "repeat without until");
          ++i;
          const Block& u = blocks[i];
          if (!u.children.empty())
            throw StructureError(u.children.front().line.number,
                                 "indented line under until");
          r.until = test(strip_trailer(after(u.line.text, match_head(u.line.text).length)));
          s.node = std::move(r);
          break;
        }
        case Head::Until:
          throw StructureError(b.line.number, "until without a matching repeat");
        case Head::Return: {
          std::string value = after(text, h.length);
          flatten(b.children, value);
          value = std::string(trim(value));
          ReturnStmt r;
          if (!value.empty()) {
            if (auto c = as_call(value))
              r.value = std::move(*c);
            else
              r.value = classified(value);
          }
          s.node = std::move(r);
          break;
        }
        case Head::Other:
          s = simple(b, text);
          break;
      }
      out.push_back(std::move(s));
    }
    if (out.empty()) throw StructureError(line, "block has no statements");
    return out;
  }

  Mode mode_;
  std::vector<Label> labels_;
  std::size_t cursor_ = 0;
  std::vector<std::string> pending_;
};

}  // namespace

std::string convert(std::string_view pseudo, const StatementClassifier& classifier) {
  const std::vector<SourceLine> lines = split_lines(pseudo);
  if (lines.empty()) throw StructureError(1, "no statements");
  Translator collect(Translator::Mode::Collect);
  collect.program(lines);
  Translator build(Translator::Mode::Build, classifier.classify(collect.pending()));
  return pretty_print(build.program(lines));
}

}  // namespace algoseek::pseudoconv
