#include "algoseek/plang.hpp"

#include <array>
#include <cctype>
#include <set>
#include <sstream>

namespace algoseek::plang {

UnbalancedDelimiter::UnbalancedDelimiter(int line)
    : Error("unbalanced delimiter opened on line " + std::to_string(line)),
      line_(line) {}

NestedDelimiter::NestedDelimiter(int line)
    : Error("nested delimiter on line " + std::to_string(line)),
      line_(line) {}

SyntaxError::SyntaxError(int line, std::string expected, std::string found)
    : Error("line " + std::to_string(line) + ": expected " + expected +
            ", found '" + found + "'"),
      line_(line),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

bool ElseIf::operator==(const ElseIf& o) const {
  return test == o.test && body == o.body;
}
bool IfStmt::operator==(const IfStmt& o) const {
  return test == o.test && then_body == o.then_body && elifs == o.elifs &&
         else_body == o.else_body;
}
bool WhileStmt::operator==(const WhileStmt& o) const {
  return test == o.test && body == o.body;
}
bool ForStmt::operator==(const ForStmt& o) const {
  return each == o.each && header == o.header && bound == o.bound &&
         direction == o.direction && body == o.body;
}
bool RepeatStmt::operator==(const RepeatStmt& o) const {
  return body == o.body && until == o.until;
}

PTest leaf(PExpr e) { return PTest{std::move(e)}; }
PTest make_and(PTest a, PTest b) {
  return PTest{AndTest{std::move(a), std::move(b)}};
}
PTest make_or(PTest a, PTest b) {
  return PTest{OrTest{std::move(a), std::move(b)}};
}
PTest make_not(PTest a) { return PTest{NotTest{std::move(a)}}; }

namespace {

constexpr std::array<std::string_view, 13> kKeywords = {
    "if",     "elseif", "else", "while", "for", "to",    "downto",
    "repeat", "until",  "and",  "or",    "not", "return"};

bool is_name_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c >= 0x80;
}
bool is_name_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c >= 0x80;
}

// Byte length of the UTF-8 sequence starting with `lead`.
std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  if ((lead >> 3) == 0x1e) return 4;
  return 1;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<PToken> run() {
    std::string leading;
    while (pos_ < src_.size()) {
      const unsigned char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        leading += static_cast<char>(c);
        advance();
        continue;
      }
      if (c == '$' || c == '@') {
        delimited(c, std::move(leading));
      } else if (is_name_start(c)) {
        word(std::move(leading));
      } else {
        const std::size_t len = std::min(utf8_length(c), src_.size() - pos_);
        PToken tok{TokenKind::Punct, std::string(src_.substr(pos_, len)),
                   line_, col_, std::move(leading)};
        for (std::size_t i = 0; i < len; ++i) advance();
        out_.push_back(std::move(tok));
      }
      leading.clear();
    }
    out_.push_back({TokenKind::End, "", line_, col_, std::move(leading)});
    return std::move(out_);
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void delimited(unsigned char delim, std::string leading) {
    const TokenKind kind =
        delim == '$' ? TokenKind::MathDelim : TokenKind::NlDelim;
    const char other = delim == '$' ? '@' : '$';
    const int open_line = line_;
    out_.push_back({kind, std::string(1, static_cast<char>(delim)), line_,
                    col_, std::move(leading)});
    advance();
    PToken body{TokenKind::RawText, "", line_, col_, ""};
    const std::size_t start = pos_;
    while (pos_ < src_.size() && src_[pos_] != static_cast<char>(delim)) {
      if (src_[pos_] == other) throw NestedDelimiter(line_);
      advance();
    }
    if (pos_ >= src_.size()) throw UnbalancedDelimiter(open_line);
    body.text = std::string(src_.substr(start, pos_ - start));
    out_.push_back(std::move(body));
    out_.push_back({kind, std::string(1, static_cast<char>(delim)), line_,
                    col_, ""});
    advance();
  }

  void word(std::string leading) {
    const int line = line_, col = col_;
    const std::size_t start = pos_;
    while (pos_ < src_.size()) {
      const unsigned char c = src_[pos_];
      if (is_name_char(c)) {
        advance();
      } else if (c == '-' && pos_ + 1 < src_.size() &&
                 is_name_char(static_cast<unsigned char>(src_[pos_ + 1]))) {
        advance();
      } else {
        break;
      }
    }
    std::string text(src_.substr(start, pos_ - start));
    TokenKind kind = is_keyword(text) ? TokenKind::Keyword : TokenKind::Name;
    if (text == "for") {
      // `for each` is one keyword; the gap may be spaces or tabs only.
      std::size_t p = pos_;
      while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t')) ++p;
      if (p > pos_ && src_.substr(p, 4) == "each" &&
          (p + 4 == src_.size() ||
           !is_name_char(static_cast<unsigned char>(src_[p + 4])))) {
        while (pos_ < p + 4) advance();
        text = std::string(src_.substr(start, pos_ - start));
      }
    }
    out_.push_back({kind, std::move(text), line, col, std::move(leading)});
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  std::vector<PToken> out_;
};

// Keyword text with internal whitespace collapsed (`for \t each` -> `for each`).
std::string keyword_of(const PToken& tok) {
  if (tok.kind != TokenKind::Keyword) return {};
  if (tok.text.size() > 3 && tok.text.compare(0, 3, "for") == 0)
    return "for each";
  return tok.text;
}

std::string describe(const PToken& tok) {
  switch (tok.kind) {
    case TokenKind::End:
      return "end of input";
    case TokenKind::RawText:
      return "text";
    default:
      return tok.text;
  }
}

class Parser {
 public:
  explicit Parser(const std::vector<PToken>& toks) : toks_(toks) {
    if (toks_.empty() || toks_.back().kind != TokenKind::End)
      throw Error("token stream must end with an End token");
  }

  PProgram program() {
    PProgram prog;
    std::set<std::string> names;
    do {
      const PToken& name_tok = peek();
      PFunction fn = function();
      if (!names.insert(fn.name).second)
        throw SyntaxError(name_tok.line, "unique function name", fn.name);
      prog.functions.push_back(std::move(fn));
    } while (peek().kind != TokenKind::End);
    return prog;
  }

 private:
  const PToken& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const PToken& take() {
    const PToken& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  [[noreturn]] void fail(const std::string& expected) const {
    throw SyntaxError(peek().line, expected, describe(peek()));
  }
  bool at_punct(std::string_view p) const {
    return peek().kind == TokenKind::Punct && peek().text == p;
  }
  bool at_keyword(std::string_view kw) const { return keyword_of(peek()) == kw; }
  void expect_punct(std::string_view p) {
    if (!at_punct(p)) fail("'" + std::string(p) + "'");
    take();
  }
  bool at_expr() const {
    return peek().kind == TokenKind::MathDelim ||
           peek().kind == TokenKind::NlDelim;
  }
  bool at_call() const {
    return peek().kind == TokenKind::Name &&
           peek(1).kind == TokenKind::Punct && peek(1).text == "(";
  }

  PFunction function() {
    if (peek().kind != TokenKind::Name) fail("function name");
    PFunction fn;
    fn.line = peek().line;
    fn.name = take().text;
    fn.params = parameters();
    fn.body = suite();
    return fn;
  }

  std::vector<Param> parameters() {
    expect_punct("(");
    std::vector<Param> out;
    if (at_punct(")")) {
      take();
      return out;
    }
    for (;;) {
      if (peek().kind == TokenKind::Name) {
        out.emplace_back(take().text);
      } else if (at_expr()) {
        out.emplace_back(expr());
      } else {
        fail("parameter");
      }
      if (at_punct(",")) {
        take();
        continue;
      }
      expect_punct(")");
      return out;
    }
  }

  PExpr expr() {
    const TokenKind delim = peek().kind;
    if (delim != TokenKind::MathDelim && delim != TokenKind::NlDelim)
      fail("expression");
    take();
    std::string raw = take().text;  // the lexer guarantees RawText + closer
    take();
    return delim == TokenKind::MathDelim ? PExpr::math(std::move(raw))
                                         : PExpr::nl(std::move(raw));
  }

  Suite suite() {
    expect_punct("{");
    Suite body;
    do {
      body.push_back(statement());
    } while (!at_punct("}"));
    take();
    return body;
  }

  CallStmt call() {
    CallStmt c;
    c.name = take().text;
    c.args = parameters();
    return c;
  }

  PStmt statement() {
    PStmt st;
    st.line = peek().line;
    const std::string kw = keyword_of(peek());
    if (kw == "if") {
      st.node = if_stmt();
    } else if (kw == "while") {
      take();
      WhileStmt w;
      w.test = test();
      w.body = suite();
      st.node = std::move(w);
    } else if (kw == "for" || kw == "for each") {
      st.node = for_stmt();
    } else if (kw == "repeat") {
      take();
      RepeatStmt r;
      r.body = suite();
      if (!at_keyword("until")) fail("'until'");
      take();
      r.until = test();
      st.node = std::move(r);
    } else if (kw == "return") {
      const int line = take().line;
      ReturnStmt r;
      // The value must start on the `return` line; otherwise the next
      // statement would be indistinguishable from a return value.
      if (peek().line == line) {
        if (at_expr()) {
          r.value = expr();
        } else if (at_call()) {
          r.value = call();
        }
      }
      st.node = std::move(r);
    } else if (at_call()) {
      st.node = call();
    } else if (at_expr()) {
      st.node = ExprStmt{expr()};
    } else {
      fail("statement");
    }
    return st;
  }

  IfStmt if_stmt() {
    take();
    IfStmt s;
    s.test = test();
    s.then_body = suite();
    while (at_keyword("elseif")) {
      ElseIf e;
      e.line = take().line;
      e.test = test();
      e.body = suite();
      s.elifs.push_back(std::move(e));
    }
    if (at_keyword("else")) {
      take();
      s.else_body = suite();
    }
    return s;
  }

  ForStmt for_stmt() {
    ForStmt f;
    f.each = keyword_of(take()) == "for each";
    f.header = expr();
    if (!f.each && (at_keyword("to") || at_keyword("downto"))) {
      f.direction = keyword_of(take()) == "to" ? Direction::To
                                               : Direction::Downto;
      f.bound = expr();
    }
    f.body = suite();
    return f;
  }

  PTest test() {
    PTest lhs = and_test();
    while (at_keyword("or")) {
      take();
      lhs = make_or(std::move(lhs), and_test());
    }
    return lhs;
  }

  PTest and_test() {
    PTest lhs = not_test();
    while (at_keyword("and")) {
      take();
      lhs = make_and(std::move(lhs), not_test());
    }
    return lhs;
  }

  PTest not_test() {
    if (at_keyword("not")) {
      take();
      return make_not(not_test());
    }
    if (at_punct("(")) {
      take();
      PTest inner = test();
      expect_punct(")");
      return inner;
    }
    if (!at_expr()) fail("test expression");
    return leaf(expr());
  }

  const std::vector<PToken>& toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------- printing

std::string render_expr(const PExpr& e) {
  const char d = e.kind == PExpr::Kind::Math ? '$' : '@';
  return d + e.raw + d;
}

enum class Style { Delimited, Plain };

std::string render(const PTest& t, Style style) {
  struct Visitor {
    Style style;
    std::string wrap(const PTest& t, bool parens) const {
      std::string s = render(t, style);
      return parens ? "(" + s + ")" : s;
    }
    std::string operator()(const PExpr& e) const {
      return style == Style::Delimited ? render_expr(e) : e.raw;
    }
    std::string operator()(const AndTest& a) const {
      const bool lp = std::holds_alternative<OrTest>(a.lhs->node);
      const bool rp = std::holds_alternative<OrTest>(a.rhs->node) ||
                      std::holds_alternative<AndTest>(a.rhs->node);
      return wrap(*a.lhs, lp) + " and " + wrap(*a.rhs, rp);
    }
    std::string operator()(const OrTest& o) const {
      const bool rp = std::holds_alternative<OrTest>(o.rhs->node);
      return wrap(*o.lhs, false) + " or " + wrap(*o.rhs, rp);
    }
    std::string operator()(const NotTest& n) const {
      const bool p = std::holds_alternative<AndTest>(n.operand->node) ||
                     std::holds_alternative<OrTest>(n.operand->node);
      return "not " + wrap(*n.operand, p);
    }
  };
  return std::visit(Visitor{style}, t.node);
}

std::string render_param(const Param& p) {
  if (const auto* name = std::get_if<std::string>(&p)) return *name;
  return render_expr(std::get<PExpr>(p));
}

std::string render_params(const std::vector<Param>& ps) {
  std::string out = "(";
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) out += ", ";
    out += render_param(ps[i]);
  }
  return out + ")";
}

class Printer {
 public:
  std::string program(const PProgram& p) {
    for (std::size_t i = 0; i < p.functions.size(); ++i) {
      if (i) out_ << '\n';
      const PFunction& fn = p.functions[i];
      out_ << fn.name << render_params(fn.params) << " {\n";
      suite(fn.body, 1);
      out_ << "}\n";
    }
    return out_.str();
  }

 private:
  void indent(int depth) { out_ << std::string(2 * depth, ' '); }

  void suite(const Suite& body, int depth) {
    for (const PStmt& s : body) stmt(s, depth);
  }

  void stmt(const PStmt& s, int depth) {
    indent(depth);
    std::visit([&](const auto& node) { emit(node, depth); }, s.node);
  }

  void emit(const ExprStmt& e, int) { out_ << render_expr(e.expr) << '\n'; }
  void emit(const CallStmt& c, int) {
    out_ << c.name << render_params(c.args) << '\n';
  }
  void emit(const ReturnStmt& r, int) {
    out_ << "return";
    if (r.value) {
      if (const auto* e = std::get_if<PExpr>(&*r.value)) {
        out_ << ' ' << render_expr(*e);
      } else {
        const auto& c = std::get<CallStmt>(*r.value);
        out_ << ' ' << c.name << render_params(c.args);
      }
    }
    out_ << '\n';
  }
  void emit(const IfStmt& s, int depth) {
    out_ << "if " << render_test(s.test) << " {\n";
    suite(s.then_body, depth + 1);
    for (const ElseIf& e : s.elifs) {
      indent(depth);
      out_ << "} elseif " << render_test(e.test) << " {\n";
      suite(e.body, depth + 1);
    }
    if (s.else_body) {
      indent(depth);
      out_ << "} else {\n";
      suite(*s.else_body, depth + 1);
    }
    indent(depth);
    out_ << "}\n";
  }
  void emit(const WhileStmt& w, int depth) {
    out_ << "while " << render_test(w.test) << " {\n";
    suite(w.body, depth + 1);
    indent(depth);
    out_ << "}\n";
  }
  void emit(const ForStmt& f, int depth) {
    out_ << (f.each ? "for each " : "for ") << render_expr(f.header);
    if (f.bound) {
      out_ << (f.direction == Direction::Downto ? " downto " : " to ")
           << render_expr(*f.bound);
    }
    out_ << " {\n";
    suite(f.body, depth + 1);
    indent(depth);
    out_ << "}\n";
  }
  void emit(const RepeatStmt& r, int depth) {
    out_ << "repeat {\n";
    suite(r.body, depth + 1);
    indent(depth);
    out_ << "} until " << render_test(r.until) << '\n';
  }

  std::ostringstream out_;
};

}  // namespace

bool is_keyword(std::string_view word) {
  for (std::string_view k : kKeywords)
    if (k == word) return true;
  return false;
}

std::vector<PToken> tokenize(std::string_view source) {
  return Lexer(source).run();
}

PProgram parse(const std::vector<PToken>& tokens) {
  return Parser(tokens).program();
}

PProgram parse_source(std::string_view source) {
  return parse(tokenize(source));
}

std::string pretty_print(const PProgram& program) {
  return Printer().program(program);
}

std::string render_test(const PTest& test) {
  return render(test, Style::Delimited);
}

std::string plain_test(const PTest& test) { return render(test, Style::Plain); }

std::size_t test_leaf_count(const PTest& test) {
  struct Visitor {
    std::size_t operator()(const PExpr&) const { return 1; }
    std::size_t operator()(const AndTest& a) const {
      return test_leaf_count(*a.lhs) + test_leaf_count(*a.rhs);
    }
    std::size_t operator()(const OrTest& o) const {
      return test_leaf_count(*o.lhs) + test_leaf_count(*o.rhs);
    }
    std::size_t operator()(const NotTest& n) const {
      return test_leaf_count(*n.operand);
    }
  };
  return std::visit(Visitor{}, test.node);
}

bool test_has_math(const PTest& test) {
  struct Visitor {
    bool operator()(const PExpr& e) const {
      return e.kind == PExpr::Kind::Math;
    }
    bool operator()(const AndTest& a) const {
      return test_has_math(*a.lhs) || test_has_math(*a.rhs);
    }
    bool operator()(const OrTest& o) const {
      return test_has_math(*o.lhs) || test_has_math(*o.rhs);
    }
    bool operator()(const NotTest& n) const {
      return test_has_math(*n.operand);
    }
  };
  return std::visit(Visitor{}, test.node);
}

}  // namespace algoseek::plang
