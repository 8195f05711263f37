#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "algoseek/error.hpp"

// Lexer, parser, AST and printer for the p-language: pseudo code whose
// control flow is spelled with keywords and whose leaf statements are either
// `$math$` or `@natural language@`.
namespace algoseek::plang {

enum class TokenKind {
  Keyword,
  Name,
  MathDelim,  // `$`
  NlDelim,    // `@`
  Punct,      // ( ) { } , and any stray character
  RawText,    // verbatim content between a delimiter pair
  End,        // carries trailing whitespace; always last
};

struct PToken {
  TokenKind kind;
  std::string text;
  int line = 1;
  int col = 1;
  // Whitespace between the previous token and this one. Concatenating
  // leading + text over all tokens reproduces the source exactly.
  std::string leading;
};

class UnbalancedDelimiter : public Error {
 public:
  explicit UnbalancedDelimiter(int line);
  int line() const { return line_; }

 private:
  int line_;
};

// A `$` inside `@...@` or an `@` inside `$...$`.
class NestedDelimiter : public Error {
 public:
  explicit NestedDelimiter(int line);
  int line() const { return line_; }

 private:
  int line_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(int line, std::string expected, std::string found);
  int line() const { return line_; }
  const std::string& expected() const { return expected_; }
  const std::string& found() const { return found_; }

 private:
  int line_;
  std::string expected_;
  std::string found_;
};

// Heap cell with value semantics, for the recursive test tree.
template <class T>
class Box {
 public:
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  const T& operator*() const { return *ptr_; }
  const T* operator->() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a == *b; }

 private:
  std::unique_ptr<T> ptr_;
};

struct PExpr {
  enum class Kind { Math, NaturalLanguage };
  Kind kind;
  std::string raw;

  static PExpr math(std::string raw) { return {Kind::Math, std::move(raw)}; }
  static PExpr nl(std::string raw) {
    return {Kind::NaturalLanguage, std::move(raw)};
  }
  bool operator==(const PExpr&) const = default;
};

struct PTest;

struct AndTest {
  Box<PTest> lhs, rhs;
  bool operator==(const AndTest&) const = default;
};
struct OrTest {
  Box<PTest> lhs, rhs;
  bool operator==(const OrTest&) const = default;
};
struct NotTest {
  Box<PTest> operand;
  bool operator==(const NotTest&) const = default;
};

struct PTest {
  std::variant<PExpr, AndTest, OrTest, NotTest> node;
  bool operator==(const PTest&) const = default;
};

PTest leaf(PExpr e);
PTest make_and(PTest a, PTest b);
PTest make_or(PTest a, PTest b);
PTest make_not(PTest a);

// A call argument or function parameter: bare NAME or an expression.
using Param = std::variant<std::string, PExpr>;

struct CallStmt {
  std::string name;
  std::vector<Param> args;
  bool operator==(const CallStmt&) const = default;
};

struct PStmt;
using Suite = std::vector<PStmt>;

struct ExprStmt {
  PExpr expr;
  bool operator==(const ExprStmt&) const = default;
};

struct ReturnStmt {
  std::optional<std::variant<PExpr, CallStmt>> value;
  bool operator==(const ReturnStmt&) const = default;
};

struct ElseIf {
  PTest test;
  Suite body;
  int line = 0;
  bool operator==(const ElseIf& o) const;  // ignores line
};

struct IfStmt {
  PTest test;
  Suite then_body;
  std::vector<ElseIf> elifs;
  std::optional<Suite> else_body;
  bool operator==(const IfStmt&) const;
};

struct WhileStmt {
  PTest test;
  Suite body;
  bool operator==(const WhileStmt&) const;
};

enum class Direction { None, To, Downto };

struct ForStmt {
  bool each = false;  // `for each`: no bound, no direction
  PExpr header;
  std::optional<PExpr> bound;
  Direction direction = Direction::None;
  Suite body;
  bool operator==(const ForStmt&) const;
};

struct RepeatStmt {
  Suite body;
  PTest until;
  bool operator==(const RepeatStmt&) const;
};

struct PStmt {
  std::variant<ExprStmt, CallStmt, ReturnStmt, IfStmt, WhileStmt, ForStmt,
               RepeatStmt>
      node;
  int line = 0;  // source line of the first token; not part of equality

  bool operator==(const PStmt& o) const { return node == o.node; }
};

struct PFunction {
  std::string name;
  std::vector<Param> params;
  Suite body;
  int line = 0;

  bool operator==(const PFunction& o) const {
    return name == o.name && params == o.params && body == o.body;
  }
};

struct PProgram {
  std::vector<PFunction> functions;
  bool operator==(const PProgram&) const = default;
};

std::vector<PToken> tokenize(std::string_view source);

PProgram parse(const std::vector<PToken>& tokens);

// tokenize + parse.
PProgram parse_source(std::string_view source);

std::string pretty_print(const PProgram& program);

// Single-line rendering of a test with delimiters, e.g. `$a < b$ and @ok@`.
std::string render_test(const PTest& test);

// Delimiter-free rendering used as ICFG node text, e.g. `a < b and ok`.
std::string plain_test(const PTest& test);

// Number of expression leaves in a test.
std::size_t test_leaf_count(const PTest& test);

// True if any leaf is Math.
bool test_has_math(const PTest& test);

bool is_keyword(std::string_view word);

}  // namespace algoseek::plang
