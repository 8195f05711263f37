// Token-level ICFG extraction for a C/Java subset. Braces and semicolons
// drive the statement structure; expressions are never parsed.

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "algoseek/icfg.hpp"
#include "graph_builder.hpp"

namespace algoseek::icfg {

UnbalancedBraces::UnbalancedBraces(std::string file, int line)
    : Error("unbalanced braces in " + file + " at line " +
            std::to_string(line)),
      file_(std::move(file)),
      line_(line) {}

namespace {

using detail::GraphBuilder;
using detail::Pending;

enum class Tok { Ident, Number, Punct, Literal };

struct Token {
  Tok kind;
  std::string text;
  std::size_t begin;  // byte offsets into the cleaned text
  std::size_t end;
  int line;
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$'; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$'; }

// Blanks comments, preprocessor lines, Java annotations and the inside of
// string/char literals, keeping every newline so offsets map to lines.
std::string clean_source(const std::string& src, Language lang) {
  std::string out = src;
  const std::size_t n = src.size();
  auto blank = [&](std::size_t from, std::size_t to) {
    for (std::size_t k = from; k < to && k < n; ++k)
      if (out[k] != '\n') out[k] = ' ';
  };
  bool line_start = true;
  std::size_t i = 0;
  while (i < n) {
    const char c = src[i];
    if (c == '\n') {
      line_start = true;
      ++i;
      continue;
    }
    if (line_start && c == '#') {
      std::size_t j = i;
      while (j < n && !(src[j] == '\n' && src[j - 1] != '\\')) ++j;
      blank(i, j);
      i = j;
      continue;
    }
    if (c != ' ' && c != '\t' && c != '\r') line_start = false;
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      std::size_t j = src.find('\n', i);
      if (j == std::string::npos) j = n;
      blank(i, j);
      i = j;
    } else if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      std::size_t j = src.find("*/", i + 2);
      j = j == std::string::npos ? n : j + 2;
      blank(i, j);
      i = j;
    } else if (c == '"' || c == '\'') {
      std::size_t j = i + 1;
      while (j < n && src[j] != c && src[j] != '\n') j += src[j] == '\\' ? 2 : 1;
      blank(i + 1, std::min(j, n));
      i = j + 1;
    } else if (lang == Language::Java && c == '@' && i + 1 < n &&
               ident_start(static_cast<unsigned char>(src[i + 1]))) {
      std::size_t j = i + 1;
      while (j < n && (ident_char(static_cast<unsigned char>(src[j])) ||
                       src[j] == '.'))
        ++j;
      std::size_t k = j;
      while (k < n && (src[k] == ' ' || src[k] == '\t')) ++k;
      if (k < n && src[k] == '(') {
        int depth = 0;
        for (; k < n; ++k) {
          if (src[k] == '(') ++depth;
          if (src[k] == ')' && --depth == 0) break;
        }
        j = std::min(k + 1, n);
      }
      blank(i, j);
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

constexpr std::array<std::string_view, 25> kMultiPunct = {
    ">>>=", "<<=", ">>=", ">>>", "->", "++", "--", "&&", "||",
    "==",   "!=",  "<=",  ">=",  "<<", ">>", "+=", "-=", "*=",
    "/=",   "%=",  "&=",  "|=",  "^=", "::", "..."};

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> toks;
  int line = 1;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const unsigned char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    Tok kind = Tok::Punct;
    if (ident_start(c)) {
      while (j < n && ident_char(static_cast<unsigned char>(text[j]))) ++j;
      kind = Tok::Ident;
    } else if (std::isdigit(c)) {
      while (j < n && (std::isalnum(static_cast<unsigned char>(text[j])) ||
                       text[j] == '.'))
        ++j;
      kind = Tok::Number;
    } else if (c == '"' || c == '\'') {
      while (j < n && text[j] != static_cast<char>(c) && text[j] != '\n') ++j;
      j = std::min(j + 1, n);
      kind = Tok::Literal;
    } else {
      for (std::string_view p : kMultiPunct) {
        if (text.compare(i, p.size(), p) == 0) {
          j = i + p.size();
          break;
        }
      }
    }
    toks.push_back({kind, text.substr(i, j - i), i, j, line});
    i = j;
  }
  return toks;
}

bool is(const Token& t, std::string_view s) { return t.text == s; }

const std::set<std::string_view> kNotCallees = {
    "if",     "while", "for",   "switch",       "return", "sizeof",
    "catch",  "do",    "else",  "synchronized", "try",    "case",
    "throw",  "new",   "super", "this",         "int",    "long",
    "double", "float", "char",  "void",         "assert", "typeof"};

const std::set<std::string_view> kNotFunctions = {
    "if", "while", "for", "switch", "catch", "synchronized", "return",
    "sizeof", "do", "else", "try", "new"};

const std::set<std::string_view> kSignatureTail = {
    "const", "noexcept", "override", "final", "volatile"};

struct FunctionSpan {
  std::string name;
  std::size_t body_open;   // token index of '{'
  std::size_t body_close;  // token index of matching '}'
  int line_start;
  int line_end;
};

struct ParsedFile {
  SourceFile file;
  std::string clean;
  std::vector<Token> toks;
  std::vector<long> match;  // matching bracket index, -1 if none
  std::vector<FunctionSpan> functions;
};

// Pairs up (), [] and {}; braces must balance, the rest is best effort.
// A closing brace discards any ( or [ left open inside its block.
std::vector<long> match_brackets(const std::vector<Token>& toks,
                                 const std::string& path) {
  std::vector<long> match(toks.size(), -1);
  std::vector<std::pair<std::size_t, char>> stack;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const std::string& t = toks[i].text;
    if (toks[i].kind != Tok::Punct || t.size() != 1) continue;
    const char c = t[0];
    if (c == '{' || c == '(' || c == '[') {
      stack.emplace_back(i, c);
      continue;
    }
    const char open = c == '}' ? '{' : c == ')' ? '(' : c == ']' ? '[' : 0;
    if (!open) continue;
    if (c == '}') {
      while (!stack.empty() && stack.back().second != '{') stack.pop_back();
      if (stack.empty()) throw UnbalancedBraces(path, toks[i].line);
    } else if (stack.empty() || stack.back().second != open) {
      continue;
    }
    match[i] = static_cast<long>(stack.back().first);
    match[stack.back().first] = static_cast<long>(i);
    stack.pop_back();
  }
  for (auto it = stack.rbegin(); it != stack.rend(); ++it)
    if (it->second == '{') throw UnbalancedBraces(path, toks[it->first].line);
  return match;
}

// Index of the function-name token if the '{' at `open` starts a function
// body, or -1.
long function_name_before(const ParsedFile& pf, std::size_t open) {
  const auto& toks = pf.toks;
  long i = static_cast<long>(open) - 1;
  while (i >= 0 && toks[i].kind == Tok::Ident && kSignatureTail.count(toks[i].text))
    --i;
  // Java `throws A, b.C`
  {
    long j = i;
    while (j >= 0 && (toks[j].kind == Tok::Ident || is(toks[j], ",") ||
                      is(toks[j], ".")) &&
           !is(toks[j], "throws"))
      --j;
    if (j >= 0 && is(toks[j], "throws")) i = j - 1;
  }
  if (i < 0 || !is(toks[i], ")") || pf.match[i] < 0) return -1;
  const long name = pf.match[i] - 1;
  if (name < 0 || toks[name].kind != Tok::Ident) return -1;
  if (kNotFunctions.count(toks[name].text)) return -1;
  if (name > 0 && is(toks[name - 1], "new")) return -1;
  if (name > 0 && (is(toks[name - 1], ".") || is(toks[name - 1], "=")))
    return -1;
  return name;
}

void find_functions(ParsedFile& pf, std::size_t from, std::size_t to) {
  for (std::size_t i = from; i < to; ++i) {
    if (!is(pf.toks[i], "{")) continue;
    const auto close = static_cast<std::size_t>(pf.match[i]);
    const long name = function_name_before(pf, i);
    if (name >= 0) {
      pf.functions.push_back({pf.toks[name].text, i, close,
                              pf.toks[name].line, pf.toks[close].line});
    } else {
      find_functions(pf, i + 1, close);
    }
    i = close;
  }
}

// ------------------------------------------------------- function lowering

struct FunctionGraph {
  Icfg graph;  // local ids
  NodeId entry = 0;
  NodeId exit = 0;
  std::vector<std::pair<NodeId, std::vector<std::string>>> call_sites;
};

class BodyLowering {
 public:
  BodyLowering(const ParsedFile& pf, const FunctionSpan& fn,
               std::string function_label)
      : pf_(pf), toks_(pf.toks), fn_(fn), label_(std::move(function_label)),
        b_("") {}

  FunctionGraph run() {
    FunctionGraph out;
    out.entry = b_.add(NodeKind::Entry, PayloadKind::None, "",
                       loc(fn_.line_start, fn_.line_start), label_);
    Pending preds = block(fn_.body_open + 1, fn_.body_close,
                          {{out.entry, EdgeKind::Flow}});
    out.exit = b_.add(NodeKind::Exit, PayloadKind::None, "",
                      loc(fn_.line_end, fn_.line_end), label_);
    b_.connect(preds, out.exit);
    b_.connect(returns_, out.exit);
    out.call_sites = std::move(call_sites_);
    out.graph = b_.take();
    return out;
  }

 private:
  struct Jumps {
    Pending breaks;
    Pending continues;
    bool is_switch = false;
  };

  SourceLoc loc(int a, int b) const { return {pf_.file.path, a, b}; }

  std::size_t match(std::size_t i) const {
    return static_cast<std::size_t>(pf_.match[i]);
  }
  bool has_match(std::size_t i) const { return pf_.match[i] >= 0; }

  std::string text(std::size_t first, std::size_t last) const {
    if (first > last) return "";
    const std::string raw = pf_.clean.substr(
        toks_[first].begin, toks_[last].end - toks_[first].begin);
    std::string out;
    bool space = false;
    for (char c : raw) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        space = !out.empty();
      } else {
        if (space) out += ' ';
        space = false;
        out += c;
      }
    }
    return out;
  }

  std::vector<std::string> callees(std::size_t first, std::size_t end) const {
    std::vector<std::string> out;
    for (std::size_t i = first; i + 1 < end; ++i) {
      if (toks_[i].kind == Tok::Ident && is(toks_[i + 1], "(") &&
          !kNotCallees.count(toks_[i].text))
        out.push_back(toks_[i].text);
    }
    return out;
  }

  // Statement or call-site node over tokens [first, end).
  NodeId simple(std::size_t first, std::size_t end) {
    std::vector<std::string> calls = callees(first, end);
    const NodeKind kind = calls.empty() ? NodeKind::Statement : NodeKind::CallSite;
    const NodeId id = b_.add(kind, PayloadKind::CodeText, text(first, end - 1),
                             loc(toks_[first].line, toks_[end - 1].line), label_);
    if (!calls.empty()) call_sites_.emplace_back(id, std::move(calls));
    return id;
  }

  NodeId condition(std::size_t first, std::size_t end, int line_start,
                   int line_end) {
    return b_.add(NodeKind::Condition, PayloadKind::CodeText,
                  first < end ? text(first, end - 1) : "",
                  loc(line_start, line_end), label_);
  }

  // First `;` at bracket depth zero in [i, end), or end.
  std::size_t statement_end(std::size_t i, std::size_t end) const {
    while (i < end && !is(toks_[i], ";")) {
      if ((is(toks_[i], "{") || is(toks_[i], "(") || is(toks_[i], "[")) &&
          has_match(i) && match(i) < end)
        i = match(i);
      ++i;
    }
    return i;
  }

  Pending block(std::size_t i, std::size_t end, Pending preds) {
    while (i < end) preds = statement(i, end, std::move(preds));
    return preds;
  }

  Jumps* innermost_loop() {
    for (auto it = jumps_.rbegin(); it != jumps_.rend(); ++it)
      if (!(*it)->is_switch) return *it;
    return nullptr;
  }

  // Parenthesised header starting at `open`; returns the close index.
  std::size_t paren_close(std::size_t open, std::size_t end) const {
    if (open >= end || !is(toks_[open], "(") || !has_match(open) ||
        match(open) >= end)
      return std::string::npos;
    return match(open);
  }

  Pending loop_body(std::size_t& i, std::size_t end, Pending preds,
                    Jumps& jumps) {
    jumps_.push_back(&jumps);
    Pending outs = i < end ? statement(i, end, std::move(preds)) : preds;
    jumps_.pop_back();
    return outs;
  }

  Pending statement(std::size_t& i, std::size_t end, Pending preds) {
    const Token& t = toks_[i];
    if (is(t, "{")) {
      const std::size_t close = has_match(i) ? std::min(match(i), end) : end;
      Pending outs = block(i + 1, close, std::move(preds));
      i = close + 1;
      return outs;
    }
    if (is(t, ";")) {
      ++i;
      return preds;
    }
    if (t.kind == Tok::Ident) {
      const std::string& kw = t.text;
      if (kw == "if") return if_stmt(i, end, std::move(preds));
      if (kw == "while") return while_stmt(i, end, std::move(preds));
      if (kw == "for") return for_stmt(i, end, std::move(preds));
      if (kw == "do") return do_stmt(i, end, std::move(preds));
      if (kw == "switch") return switch_stmt(i, end, std::move(preds));
      if (kw == "try") return try_stmt(i, end, std::move(preds));
      if (kw == "else") {  // stray
        ++i;
        return preds;
      }
      if (kw == "synchronized") {
        const std::size_t close = paren_close(i + 1, end);
        i = close == std::string::npos ? i + 1 : close + 1;
        return i < end ? statement(i, end, std::move(preds)) : preds;
      }
      if (kw == "break" || kw == "continue") {
        const std::size_t stop = statement_end(i, end);
        Jumps* target = kw == "break"
                            ? (jumps_.empty() ? nullptr : jumps_.back())
                            : innermost_loop();
        i = stop + 1;
        if (!target) return preds;
        Pending& dest = kw == "break" ? target->breaks : target->continues;
        dest.insert(dest.end(), preds.begin(), preds.end());
        return {};
      }
      if (kw == "return" || kw == "throw") {
        const std::size_t stop = statement_end(i, end);
        const NodeId id = simple(i, stop);
        b_.connect(preds, id);
        returns_.emplace_back(id, EdgeKind::Flow);
        i = stop + 1;
        return {};
      }
      // `label:` (but not `a ? b : c` or `Foo::bar`)
      if (i + 1 < end && is(toks_[i + 1], ":") && kw != "default") {
        i += 2;
        return preds;
      }
    }
    const std::size_t stop = statement_end(i, end);
    const NodeId id = simple(i, std::min(stop, end));
    b_.connect(preds, id);
    i = stop + 1;
    return {{id, EdgeKind::Flow}};
  }

  Pending if_stmt(std::size_t& i, std::size_t end, Pending preds) {
    const std::size_t open = i + 1;
    const std::size_t close = paren_close(open, end);
    if (close == std::string::npos) return fallback(i, end, std::move(preds));
    const NodeId cond =
        condition(open + 1, close, toks_[i].line, toks_[close].line);
    b_.connect(preds, cond);
    i = close + 1;
    Pending outs = i < end ? statement(i, end, {{cond, EdgeKind::FlowTrue}})
                           : Pending{{cond, EdgeKind::FlowTrue}};
    if (i < end && is(toks_[i], "else")) {
      ++i;
      Pending other = i < end
                          ? statement(i, end, {{cond, EdgeKind::FlowFalse}})
                          : Pending{{cond, EdgeKind::FlowFalse}};
      outs.insert(outs.end(), other.begin(), other.end());
    } else {
      outs.emplace_back(cond, EdgeKind::FlowFalse);
    }
    return outs;
  }

  Pending while_stmt(std::size_t& i, std::size_t end, Pending preds) {
    const std::size_t close = paren_close(i + 1, end);
    if (close == std::string::npos) return fallback(i, end, std::move(preds));
    const NodeId cond =
        condition(i + 2, close, toks_[i].line, toks_[close].line);
    b_.connect(preds, cond);
    i = close + 1;
    Jumps jumps;
    b_.connect(loop_body(i, end, {{cond, EdgeKind::FlowTrue}}, jumps), cond);
    b_.connect(jumps.continues, cond);
    Pending outs{{cond, EdgeKind::FlowFalse}};
    outs.insert(outs.end(), jumps.breaks.begin(), jumps.breaks.end());
    return outs;
  }

  Pending for_stmt(std::size_t& i, std::size_t end, Pending preds) {
    const std::size_t open = i + 1;
    const std::size_t close = paren_close(open, end);
    if (close == std::string::npos) return fallback(i, end, std::move(preds));
    const int line = toks_[i].line, close_line = toks_[close].line;
    std::vector<std::size_t> semis;
    for (std::size_t k = open + 1; k < close; ++k) {
      if (is(toks_[k], ";")) semis.push_back(k);
      if ((is(toks_[k], "(") || is(toks_[k], "{")) && has_match(k) &&
          match(k) < close)
        k = match(k);
    }
    NodeId cond;
    std::size_t update_first = 0, update_end = 0;
    if (semis.size() == 2) {
      if (semis[0] > open + 1) {
        const NodeId init = simple(open + 1, semis[0]);
        b_.connect(preds, init);
        preds = {{init, EdgeKind::Flow}};
      }
      cond = semis[1] > semis[0] + 1
                 ? condition(semis[0] + 1, semis[1], toks_[semis[0]].line,
                             toks_[semis[1]].line)
                 : condition(0, 0, line, close_line);
      update_first = semis[1] + 1;
      update_end = close;
    } else {
      cond = condition(open + 1, close, line, close_line);  // for-each form
    }
    b_.connect(preds, cond);
    i = close + 1;
    Jumps jumps;
    Pending body = loop_body(i, end, {{cond, EdgeKind::FlowTrue}}, jumps);
    body.insert(body.end(), jumps.continues.begin(), jumps.continues.end());
    if (update_end > update_first) {
      const NodeId update = simple(update_first, update_end);
      b_.connect(body, update);
      b_.edge(update, cond, EdgeKind::Flow);
    } else {
      b_.connect(body, cond);
    }
    Pending outs{{cond, EdgeKind::FlowFalse}};
    outs.insert(outs.end(), jumps.breaks.begin(), jumps.breaks.end());
    return outs;
  }

  Pending do_stmt(std::size_t& i, std::size_t end, Pending preds) {
    const NodeId body_start = b_.next_id();
    ++i;
    Jumps jumps;
    Pending body = loop_body(i, end, std::move(preds), jumps);
    if (i >= end || !is(toks_[i], "while")) {
      body.insert(body.end(), jumps.breaks.begin(), jumps.breaks.end());
      return body;
    }
    const std::size_t close = paren_close(i + 1, end);
    if (close == std::string::npos) return fallback(i, end, std::move(body));
    const NodeId cond =
        condition(i + 2, close, toks_[i].line, toks_[close].line);
    b_.connect(body, cond);
    b_.connect(jumps.continues, cond);
    b_.edge(cond, body_start, EdgeKind::FlowTrue);
    i = close + 1;
    if (i < end && is(toks_[i], ";")) ++i;
    Pending outs{{cond, EdgeKind::FlowFalse}};
    outs.insert(outs.end(), jumps.breaks.begin(), jumps.breaks.end());
    return outs;
  }

  Pending switch_stmt(std::size_t& i, std::size_t end, Pending preds) {
    const std::size_t close = paren_close(i + 1, end);
    if (close == std::string::npos || close + 1 >= end ||
        !is(toks_[close + 1], "{") || !has_match(close + 1))
      return fallback(i, end, std::move(preds));
    const NodeId cond =
        condition(i + 2, close, toks_[i].line, toks_[close].line);
    b_.connect(preds, cond);
    const std::size_t body_end = match(close + 1);
    Jumps jumps;
    jumps.is_switch = true;
    jumps_.push_back(&jumps);
    Pending current;  // statements before the first label are unreachable
    std::size_t k = close + 2;
    while (k < body_end) {
      if (is(toks_[k], "case") || is(toks_[k], "default")) {
        std::size_t colon = k + 1;
        while (colon < body_end && !is(toks_[colon], ":") &&
               !is(toks_[colon], "->"))
          ++colon;
        current.emplace_back(cond, EdgeKind::FlowTrue);
        k = colon + 1;
        continue;
      }
      current = statement(k, body_end, std::move(current));
    }
    jumps_.pop_back();
    i = body_end + 1;
    Pending outs = std::move(current);
    outs.insert(outs.end(), jumps.breaks.begin(), jumps.breaks.end());
    outs.emplace_back(cond, EdgeKind::FlowFalse);
    return outs;
  }

  // try { } catch (...) { } finally { }: each handler may start from the
  // state before the try; no exceptional edges are modelled.
  Pending try_stmt(std::size_t& i, std::size_t end, Pending preds) {
    ++i;
    if (i < end && is(toks_[i], "(")) {  // try-with-resources
      const std::size_t close = paren_close(i, end);
      if (close != std::string::npos) {
        const NodeId res = simple(i + 1, close);
        b_.connect(preds, res);
        preds = {{res, EdgeKind::Flow}};
        i = close + 1;
      }
    }
    const Pending before = preds;
    Pending outs = i < end ? statement(i, end, std::move(preds)) : preds;
    while (i < end && is(toks_[i], "catch")) {
      const std::size_t close = paren_close(i + 1, end);
      i = close == std::string::npos ? i + 1 : close + 1;
      if (i < end) {
        Pending handler = statement(i, end, before);
        outs.insert(outs.end(), handler.begin(), handler.end());
      }
    }
    if (i < end && is(toks_[i], "finally")) {
      ++i;
      if (i < end) outs = statement(i, end, std::move(outs));
    }
    return outs;
  }

  // Malformed control header: treat the rest as a plain statement.
  Pending fallback(std::size_t& i, std::size_t end, Pending preds) {
    const std::size_t stop = statement_end(i, end);
    const NodeId id = simple(i, std::min(stop, end));
    b_.connect(preds, id);
    i = stop + 1;
    return {{id, EdgeKind::Flow}};
  }

  const ParsedFile& pf_;
  const std::vector<Token>& toks_;
  const FunctionSpan& fn_;
  std::string label_;
  GraphBuilder b_;
  Pending returns_;
  std::vector<Jumps*> jumps_;
  std::vector<std::pair<NodeId, std::vector<std::string>>> call_sites_;
};

ParsedFile parse_file(SourceFile file) {
  ParsedFile pf;
  pf.clean = clean_source(file.text, file.language);
  pf.toks = lex(pf.clean);
  pf.match = match_brackets(pf.toks, file.path);
  pf.file = std::move(file);
  find_functions(pf, 0, pf.toks.size());
  return pf;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

void validate_source(const SourceFile& file) {
  match_brackets(lex(clean_source(file.text, file.language)), file.path);
}

Extraction extract_source_icfg(std::vector<SourceFile> files) {
  std::sort(files.begin(), files.end(),
            [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
  std::vector<ParsedFile> parsed;
  for (SourceFile& f : files) parsed.push_back(parse_file(std::move(f)));

  struct Fn {
    std::size_t file;
    std::size_t index;
    std::string label;
    FunctionGraph graph;
  };
  std::vector<Fn> fns;
  for (std::size_t fi = 0; fi < parsed.size(); ++fi) {
    std::map<std::string, int> seen;
    for (std::size_t k = 0; k < parsed[fi].functions.size(); ++k) {
      const FunctionSpan& span = parsed[fi].functions[k];
      const int dup = ++seen[span.name];
      std::string label =
          dup == 1 ? span.name : span.name + "#" + std::to_string(dup);
      FunctionGraph fg = BodyLowering(parsed[fi], span, label).run();
      fns.push_back({fi, k, std::move(label), std::move(fg)});
    }
  }
  if (fns.empty()) throw EmptyCorpus();

  Extraction out;
  std::map<std::string, std::vector<std::size_t>> by_name;
  for (std::size_t f = 0; f < fns.size(); ++f)
    by_name[parsed[fns[f].file].functions[fns[f].index].name].push_back(f);

  // Resolve calls: first definition in path order wins.
  std::set<std::string> reported;
  UnionFind uf(fns.size());
  std::vector<std::vector<std::pair<NodeId, std::size_t>>> resolved(fns.size());
  for (std::size_t f = 0; f < fns.size(); ++f) {
    for (const auto& [site, names] : fns[f].graph.call_sites) {
      for (const std::string& name : names) {
        const auto it = by_name.find(name);
        if (it == by_name.end()) continue;
        const std::size_t target = it->second.front();
        if (it->second.size() > 1 && reported.insert(name).second) {
          out.diagnostics.push_back(
              "ambiguous call '" + name + "' (" +
              std::to_string(it->second.size()) + " definitions); using " +
              parsed[fns[target].file].file.path + "::" + fns[target].label);
        }
        resolved[f].emplace_back(site, target);
        uf.unite(f, target);
      }
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t f = 0; f < fns.size(); ++f) components[uf.find(f)].push_back(f);

  for (const auto& [root, members] : components) {
    Icfg g;
    g.graph_id = parsed[fns[root].file].file.path + "::" + fns[root].label;
    std::map<std::size_t, NodeId> offset;
    for (std::size_t f : members) {
      const auto base = static_cast<NodeId>(g.nodes.size());
      offset[f] = base;
      for (IcfgNode node : fns[f].graph.graph.nodes) {
        node.id += base;
        g.nodes.push_back(std::move(node));
      }
      for (IcfgEdge e : fns[f].graph.graph.edges) {
        e.src += base;
        e.dst += base;
        g.edges.push_back(e);
      }
    }
    std::set<std::tuple<NodeId, NodeId, int>> seen;
    for (const IcfgEdge& e : g.edges) seen.emplace(e.src, e.dst, static_cast<int>(e.kind));
    auto add = [&](NodeId s, NodeId d, EdgeKind k) {
      if (seen.emplace(s, d, static_cast<int>(k)).second) g.edges.push_back({s, d, k});
    };
    for (std::size_t f : members) {
      const NodeId base = offset[f];
      for (const auto& [site, target] : resolved[f]) {
        const NodeId gsite = base + site;
        const NodeId entry = offset[target] + fns[target].graph.entry;
        const NodeId exit = offset[target] + fns[target].graph.exit;
        add(gsite, entry, EdgeKind::Call);
        for (const IcfgEdge& e : fns[f].graph.graph.edges)
          if (e.src == site && e.kind == EdgeKind::Flow)
            add(exit, base + e.dst, EdgeKind::Return);
      }
    }
    out.graphs.push_back(std::move(g));
  }
  return out;
}

SourceFile load_source_file(const std::filesystem::path& path,
                            std::string recorded_path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  SourceFile f;
  f.path = std::move(recorded_path);
  f.language = path.extension() == ".java" ? Language::Java : Language::C;
  f.text = ss.str();
  return f;
}

}  // namespace algoseek::icfg
