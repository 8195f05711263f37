#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>

#include "algoseek/icfg.hpp"
#include "algoseek/random.hpp"
#include "support/ast_gen.hpp"

using namespace algoseek::icfg;
namespace plang = algoseek::plang;

namespace {

int count_kind(const Icfg& g, NodeKind k) {
  return static_cast<int>(std::count_if(
      g.nodes.begin(), g.nodes.end(),
      [k](const IcfgNode& n) { return n.kind == k; }));
}

int count_edges(const Icfg& g, EdgeKind k) {
  return static_cast<int>(std::count_if(
      g.edges.begin(), g.edges.end(),
      [k](const IcfgEdge& e) { return e.kind == k; }));
}

bool has_edge(const Icfg& g, NodeId s, NodeId d, EdgeKind k) {
  return std::find(g.edges.begin(), g.edges.end(), IcfgEdge{s, d, k}) !=
         g.edges.end();
}

NodeId find_text(const Icfg& g, const std::string& text) {
  for (const auto& n : g.nodes)
    if (n.text == text) return n.id;
  return -1;
}

Icfg pcode(const std::string& src) {
  return build_pcode_icfg(plang::parse_source(src));
}

Extraction extract_c(const std::string& text) {
  return extract_source_icfg({{"a.c", Language::C, text}});
}

// Conditions an AST walk predicts: one per if/elseif/while/for/repeat test.
int expected_conditions(const plang::Suite& body) {
  int n = 0;
  for (const auto& s : body) {
    if (const auto* i = std::get_if<plang::IfStmt>(&s.node)) {
      n += 1 + static_cast<int>(i->elifs.size()) + expected_conditions(i->then_body);
      for (const auto& e : i->elifs) n += expected_conditions(e.body);
      if (i->else_body) n += expected_conditions(*i->else_body);
    } else if (const auto* w = std::get_if<plang::WhileStmt>(&s.node)) {
      n += 1 + expected_conditions(w->body);
    } else if (const auto* f = std::get_if<plang::ForStmt>(&s.node)) {
      n += 1 + expected_conditions(f->body);
    } else if (const auto* r = std::get_if<plang::RepeatStmt>(&s.node)) {
      n += 1 + expected_conditions(r->body);
    }
  }
  return n;
}

// Floyd-Warshall over undirected hops.
std::vector<std::vector<long>> all_pairs(const Icfg& g) {
  const std::size_t n = g.size();
  const long inf = 1L << 40;
  std::vector<std::vector<long>> d(n, std::vector<long>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& e : g.edges) {
    if (e.src == e.dst) continue;
    d[e.src][e.dst] = d[e.dst][e.src] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

Icfg random_graph(algoseek::Rng& rng, int n, int m) {
  Icfg g;
  g.graph_id = "r";
  for (int i = 0; i < n; ++i)
    g.nodes.push_back({i, NodeKind::Statement, PayloadKind::CodeText, "", {}, "f"});
  for (int k = 0; k < m; ++k) {
    const auto s = static_cast<NodeId>(algoseek::uniform_index(rng, n));
    const auto d = static_cast<NodeId>(algoseek::uniform_index(rng, n));
    g.edges.push_back({s, d, EdgeKind::Flow});
  }
  return g;
}

}  // namespace

// ------------------------------------------------------------ p-code builder

TEST(PcodeIcfg, SingleStatement) {
  Icfg g = pcode("F() { $x = 1$ }");
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g.nodes[0].kind, NodeKind::Entry);
  EXPECT_EQ(g.nodes[1].kind, NodeKind::Statement);
  EXPECT_EQ(g.nodes[1].payload, PayloadKind::MathText);
  EXPECT_EQ(g.nodes[2].kind, NodeKind::Exit);
  EXPECT_EQ(g.edges.size(), 2u);
  EXPECT_EQ(count_edges(g, EdgeKind::Flow), 2);
}

TEST(PcodeIcfg, WhileLowering) {
  Icfg g = pcode("F() { while $i<n$ { $i=i+1$ } }");
  const NodeId cond = find_text(g, "i<n");
  const NodeId body = find_text(g, "i=i+1");
  const NodeId exit = 3;
  ASSERT_EQ(g.nodes[exit].kind, NodeKind::Exit);
  EXPECT_EQ(g.nodes[cond].kind, NodeKind::Condition);
  EXPECT_TRUE(has_edge(g, cond, body, EdgeKind::FlowTrue));
  EXPECT_TRUE(has_edge(g, cond, exit, EdgeKind::FlowFalse));
  EXPECT_TRUE(has_edge(g, body, cond, EdgeKind::Flow));
}

TEST(PcodeIcfg, CountedForLowersLikeSource) {
  Icfg g = pcode("F(n) { for $i = 1$ to $n$ { $s = s + i$ } }");
  const NodeId init = find_text(g, "i = 1"), cond = find_text(g, "i \u2264 n");
  const NodeId body = find_text(g, "s = s + i"), update = find_text(g, "i = i + 1");
  ASSERT_GE(init, 0);
  ASSERT_GE(cond, 0);
  ASSERT_GE(update, 0);
  EXPECT_EQ(g.nodes[init].kind, NodeKind::Statement);
  EXPECT_EQ(g.nodes[cond].kind, NodeKind::Condition);
  EXPECT_EQ(g.nodes[cond].payload, PayloadKind::MathText);
  EXPECT_EQ(g.nodes[update].kind, NodeKind::Statement);
  EXPECT_TRUE(has_edge(g, init, cond, EdgeKind::Flow));
  EXPECT_TRUE(has_edge(g, cond, body, EdgeKind::FlowTrue));
  EXPECT_TRUE(has_edge(g, body, update, EdgeKind::Flow));
  EXPECT_TRUE(has_edge(g, update, cond, EdgeKind::Flow));
  const auto exit = std::find_if(g.nodes.begin(), g.nodes.end(),
                                 [](const IcfgNode& n) { return n.kind == NodeKind::Exit; });
  ASSERT_NE(exit, g.nodes.end());
  EXPECT_TRUE(has_edge(g, cond, exit->id, EdgeKind::FlowFalse));
  EXPECT_EQ(count_kind(g, NodeKind::Condition), 1);
}

TEST(PcodeIcfg, DowntoCountsDown) {
  Icfg g = pcode("F(n) { for $k \u2190 n$ downto $1$ { $x = k$ } }");
  EXPECT_GE(find_text(g, "k \u2265 1"), 0);
  EXPECT_GE(find_text(g, "k = k - 1"), 0);
}

TEST(PcodeIcfg, UncountedForKeepsOneHeaderNode) {
  for (const char* src : {"F(V) { for each $v in V$ { $x = v$ } }",
                          "F(n) { for $i \u2264 n$ to $n$ { $x$ } }"}) {
    Icfg g = pcode(src);
    EXPECT_EQ(count_kind(g, NodeKind::Condition), 1) << src;
    EXPECT_EQ(count_kind(g, NodeKind::Statement), 1) << src;
  }
}

TEST(PcodeIcfg, InterproceduralCall) {
  Icfg g = pcode("A() { B() \n $after$ }\nB() { @work@ }");
  const NodeId site = find_text(g, "B()");
  const NodeId after = find_text(g, "after");
  ASSERT_GE(site, 0);
  EXPECT_EQ(g.nodes[site].kind, NodeKind::CallSite);
  NodeId b_entry = -1, b_exit = -1;
  for (const auto& n : g.nodes) {
    if (n.function == "B" && n.kind == NodeKind::Entry) b_entry = n.id;
    if (n.function == "B" && n.kind == NodeKind::Exit) b_exit = n.id;
  }
  EXPECT_TRUE(has_edge(g, site, b_entry, EdgeKind::Call));
  EXPECT_TRUE(has_edge(g, b_exit, after, EdgeKind::Return));
  EXPECT_TRUE(check_invariants(g).empty());
}

TEST(PcodeIcfg, UnresolvedCallHasNoCallEdge) {
  Icfg g = pcode("A() { MAKE-SET(v) }");
  EXPECT_EQ(count_kind(g, NodeKind::CallSite), 1);
  EXPECT_EQ(count_edges(g, EdgeKind::Call), 0);
}

TEST(PcodeIcfg, RepeatUntilLowering) {
  Icfg g = pcode("F() { repeat { $a$ \n $b$ } until $done$ }");
  const NodeId a = find_text(g, "a"), b = find_text(g, "b");
  const NodeId cond = find_text(g, "done");
  EXPECT_TRUE(has_edge(g, a, b, EdgeKind::Flow));
  EXPECT_TRUE(has_edge(g, b, cond, EdgeKind::Flow));
  EXPECT_TRUE(has_edge(g, cond, a, EdgeKind::FlowFalse));
  EXPECT_TRUE(has_edge(g, cond, 4, EdgeKind::FlowTrue));  // exit
}

TEST(PcodeIcfg, ElseifChain) {
  Icfg g = pcode("F() { if $a$ { $x$ } elseif $b$ { $y$ } else { $z$ } }");
  const NodeId ca = find_text(g, "a"), cb = find_text(g, "b");
  EXPECT_TRUE(has_edge(g, ca, cb, EdgeKind::FlowFalse));
  EXPECT_TRUE(has_edge(g, cb, find_text(g, "z"), EdgeKind::FlowFalse));
  EXPECT_EQ(count_kind(g, NodeKind::Condition), 2);
}

TEST(PcodeIcfg, ReturnJumpsToExit) {
  Icfg g = pcode("F() { if $a$ { return $r$ } \n $tail$ }");
  const NodeId r = find_text(g, "r");
  const NodeId exit = static_cast<NodeId>(g.size() - 1);
  EXPECT_TRUE(has_edge(g, r, exit, EdgeKind::Flow));
  EXPECT_FALSE(has_edge(g, r, find_text(g, "tail"), EdgeKind::Flow));
}

TEST(PcodeIcfg, RandomProgramsSatisfyInvariants) {
  algoseek::testing::AstGenerator gen(3);
  for (int i = 0; i < 200; ++i) {
    plang::PProgram p = gen.program();
    Icfg g = build_pcode_icfg(p);
    const auto problems = check_invariants(g);
    ASSERT_TRUE(problems.empty()) << problems.front();
    int expected = 0;
    for (const auto& fn : p.functions) expected += expected_conditions(fn.body);
    EXPECT_EQ(count_kind(g, NodeKind::Condition), expected);
    for (const auto& n : g.nodes) {
      if (n.kind == NodeKind::Statement || n.kind == NodeKind::Condition) {
        EXPECT_TRUE(n.payload == PayloadKind::MathText ||
                    n.payload == PayloadKind::NlText);
      }
    }
    const Adjacency a = adjacency(g);
    ASSERT_EQ(a.n, g.size());
    std::size_t ones = std::count(a.bits.begin(), a.bits.end(), 1);
    std::set<std::pair<NodeId, NodeId>> distinct;
    for (const auto& e : g.edges) {
      EXPECT_EQ(a.at(e.src, e.dst), 1);
      distinct.emplace(e.src, e.dst);
    }
    EXPECT_EQ(ones, distinct.size());
  }
}

// ------------------------------------------------------- source extraction

TEST(SourceIcfg, StraightLine) {
  Extraction ex = extract_c("void f(){ int x; x=1; }");
  ASSERT_EQ(ex.graphs.size(), 1u);
  const Icfg& g = ex.graphs[0];
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g.nodes[1].text, "int x");
  EXPECT_EQ(g.nodes[2].text, "x=1");
  EXPECT_EQ(g.nodes[1].payload, PayloadKind::CodeText);
  EXPECT_EQ(g.edges.size(), 3u);
  EXPECT_EQ(g.graph_id, "a.c::f");
}

TEST(SourceIcfg, IfElseDiamond) {
  Extraction ex = extract_c("void f(int a,int b){ int x; if (a<b) { x=1; } else { x=2; } }");
  const Icfg& g = ex.graphs[0];
  const NodeId cond = find_text(g, "a<b");
  const NodeId t = find_text(g, "x=1"), e = find_text(g, "x=2");
  const NodeId exit = static_cast<NodeId>(g.size() - 1);
  EXPECT_EQ(g.nodes[cond].kind, NodeKind::Condition);
  EXPECT_TRUE(has_edge(g, cond, t, EdgeKind::FlowTrue));
  EXPECT_TRUE(has_edge(g, cond, e, EdgeKind::FlowFalse));
  EXPECT_TRUE(has_edge(g, t, exit, EdgeKind::Flow));
  EXPECT_TRUE(has_edge(g, e, exit, EdgeKind::Flow));
  EXPECT_EQ(shortest_path_hops(g, t, e), 2);
}

TEST(SourceIcfg, ResolvedCallLinksGraphs) {
  Extraction ex = extract_c("void f(){ g(); }\nint g(){ return 1; }\nint h(){ return 2; }");
  ASSERT_EQ(ex.graphs.size(), 2u);  // {f, g} and {h}
  const Icfg& g = ex.graphs[0];
  const NodeId site = find_text(g, "g()");
  NodeId g_entry = -1;
  for (const auto& n : g.nodes)
    if (n.function == "g" && n.kind == NodeKind::Entry) g_entry = n.id;
  EXPECT_EQ(g.nodes[site].kind, NodeKind::CallSite);
  EXPECT_TRUE(has_edge(g, site, g_entry, EdgeKind::Call));
  EXPECT_EQ(count_edges(g, EdgeKind::Return), 1);
  EXPECT_TRUE(check_invariants(g).empty());
  EXPECT_EQ(ex.graphs[1].graph_id, "a.c::h");
}

TEST(SourceIcfg, ForLoweringInitConditionBodyUpdate) {
  Extraction ex = extract_c(
      "int s(int n){ int t=0; for (int i=0; i<n; i++) { t+=i; } return t; }");
  const Icfg& g = ex.graphs[0];
  const NodeId init = find_text(g, "int i=0"), cond = find_text(g, "i<n");
  const NodeId body = find_text(g, "t+=i"), update = find_text(g, "i++");
  EXPECT_TRUE(has_edge(g, init, cond, EdgeKind::Flow));
  EXPECT_TRUE(has_edge(g, cond, body, EdgeKind::FlowTrue));
  EXPECT_TRUE(has_edge(g, body, update, EdgeKind::Flow));
  EXPECT_TRUE(has_edge(g, update, cond, EdgeKind::Flow));
  EXPECT_TRUE(has_edge(g, cond, find_text(g, "return t"), EdgeKind::FlowFalse));
}

TEST(SourceIcfg, BreakContinueAndDoWhile) {
  Extraction ex = extract_c(
      "void f(){ while (a) { if (b) break; if (c) continue; d(); }\n"
      " do { e(); } while (x); }");
  const Icfg& g = ex.graphs[0];
  EXPECT_TRUE(check_invariants(g).empty());
  const NodeId loop = find_text(g, "a"), b = find_text(g, "b");
  const NodeId c = find_text(g, "c"), e = find_text(g, "e()");
  const NodeId x = find_text(g, "x");
  EXPECT_TRUE(has_edge(g, b, e, EdgeKind::FlowTrue));  // break jumps past the loop
  EXPECT_TRUE(has_edge(g, c, loop, EdgeKind::FlowTrue));
  EXPECT_TRUE(has_edge(g, x, e, EdgeKind::FlowTrue));
  EXPECT_TRUE(has_edge(g, loop, e, EdgeKind::FlowFalse));
}

TEST(SourceIcfg, SwitchFansOut) {
  Extraction ex = extract_c(
      "void f(int k){ switch (k) { case 1: a(); break; case 2: b(); default: c(); } d(); }");
  const Icfg& g = ex.graphs[0];
  const NodeId sw = find_text(g, "k"), a = find_text(g, "a()");
  const NodeId b = find_text(g, "b()"), c = find_text(g, "c()");
  const NodeId d = find_text(g, "d()");
  EXPECT_TRUE(has_edge(g, sw, a, EdgeKind::FlowTrue));
  EXPECT_TRUE(has_edge(g, sw, b, EdgeKind::FlowTrue));
  EXPECT_TRUE(has_edge(g, sw, c, EdgeKind::FlowTrue));
  EXPECT_TRUE(has_edge(g, b, c, EdgeKind::Flow));  // fall-through
  EXPECT_TRUE(has_edge(g, a, d, EdgeKind::Flow));  // break
  EXPECT_TRUE(has_edge(g, sw, d, EdgeKind::FlowFalse));
}

TEST(SourceIcfg, CommentsStringsAndPreprocessorIgnored) {
  Extraction ex = extract_c(
      "#include <stdio.h>\n#define MAX(a,b) \\\n  ((a)>(b)?(a):(b))\n"
      "/* void fake() { } */\n"
      "int main() {\n  // a comment { \n  printf(\"{ %d\", 1);\n  return 0;\n}\n");
  ASSERT_EQ(ex.graphs.size(), 1u);
  const Icfg& g = ex.graphs[0];
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g.nodes[1].loc.line_start, 7);
  EXPECT_EQ(g.nodes[0].loc.line_start, 5);
  EXPECT_EQ(g.nodes[3].loc.line_start, 9);
  EXPECT_EQ(g.nodes[1].kind, NodeKind::CallSite);
}

TEST(SourceIcfg, JavaMethodsAnnotationsAndOverloads) {
  const std::string java =
      "public class Sorter {\n"
      "  @Override\n"
      "  public String toString() { return \"S\"; }\n"
      "  static void sort(int[] a) throws Exception { sort(a, 0, a.length); }\n"
      "  static void sort(int[] a, int lo, int hi) {\n"
      "    for (int x : a) { lo += x; }\n"
      "  }\n"
      "}\n";
  Extraction ex = extract_source_icfg({{"S.java", Language::Java, java}});
  // Calls resolve to the first definition, so the overload stands alone:
  // {toString}, {sort (recursive)}, {sort#2}.
  ASSERT_EQ(ex.graphs.size(), 3u);
  EXPECT_EQ(ex.diagnostics.size(), 1u);  // `sort` is ambiguous
  const Icfg& first = ex.graphs[1];
  const Icfg& overload = ex.graphs[2];
  EXPECT_TRUE(check_invariants(first).empty());
  EXPECT_TRUE(check_invariants(overload).empty());
  EXPECT_EQ(count_edges(first, EdgeKind::Call), 1);
  EXPECT_NE(find_text(overload, "int x : a"), -1);
  EXPECT_EQ(overload.nodes[0].function, "sort#2");
  EXPECT_EQ(overload.graph_id, "S.java::sort#2");
  EXPECT_EQ(ex.graphs[0].graph_id, "S.java::toString");
}

TEST(SourceIcfg, UnbalancedBracesReported) {
  try {
    extract_c("void f() {\n  if (x) {\n    y;\n}\n");
    FAIL() << "expected UnbalancedBraces";
  } catch (const UnbalancedBraces& e) {
    EXPECT_EQ(e.file(), "a.c");
    EXPECT_GE(e.line(), 1);
  }
  EXPECT_THROW(extract_c("void f() { } }"), UnbalancedBraces);
}

TEST(SourceIcfg, EmptyCorpus) {
  EXPECT_THROW(extract_source_icfg({}), EmptyCorpus);
  EXPECT_THROW(extract_c("int x;\nstruct s { int a; };\n"), EmptyCorpus);
}

TEST(SourceIcfg, OrderIndependentOfInput) {
  SourceFile a{"a.c", Language::C, "void f(){ x(); }"};
  SourceFile b{"b.c", Language::C, "void x(){ y=1; }"};
  EXPECT_EQ(extract_source_icfg({a, b}).graphs, extract_source_icfg({b, a}).graphs);
}

// --------------------------------------------------------- shortest paths

TEST(ShortestPath, PathGraph) {
  Icfg g = pcode("F() { $a$ \n $b$ \n $c$ }");
  EXPECT_EQ(shortest_path_hops(g, find_text(g, "a"), find_text(g, "c")), 2);
  EXPECT_EQ(shortest_path_hops(g, 1, 1), 0);
}

TEST(ShortestPath, DisjointFunctionsAreInfinitelyFar) {
  Icfg g = pcode("F() { $a$ }\nG() { $b$ }");
  EXPECT_EQ(shortest_path_hops(g, find_text(g, "a"), find_text(g, "b")), kInfinity);
}

TEST(ShortestPath, DiamondSiblings) {
  Icfg g = pcode("F() { if $c$ { $t$ } else { $e$ } }");
  EXPECT_EQ(shortest_path_hops(g, find_text(g, "t"), find_text(g, "e")), 2);
}

TEST(ShortestPath, UnknownNode) {
  Icfg g = pcode("F() { $a$ }");
  EXPECT_THROW(shortest_path_hops(g, 0, 99), UnknownNode);
  EXPECT_THROW(shortest_path_hops(g, -1, 0), UnknownNode);
}

TEST(ShortestPath, MetricAgainstAllPairsOracle) {
  algoseek::Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(algoseek::uniform_index(rng, 14));
    Icfg g = random_graph(rng, n, static_cast<int>(algoseek::uniform_index(rng, 2 * n)));
    const auto oracle = all_pairs(g);
    std::vector<std::vector<int>> sp(n, std::vector<int>(n));
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        sp[x][y] = shortest_path_hops(g, x, y);
        const long want = oracle[x][y] >= (1L << 40) ? kInfinity : oracle[x][y];
        ASSERT_EQ(sp[x][y], want);
      }
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        EXPECT_EQ(sp[x][y], sp[y][x]);
        for (int z = 0; z < n; ++z) {
          if (sp[x][y] == kInfinity || sp[y][z] == kInfinity) continue;
          EXPECT_LE(sp[x][z], sp[x][y] + sp[y][z]);
        }
      }
  }
}

// ------------------------------------------------------------------- JSON

TEST(IcfgJson, RoundTripBuilderOutput) {
  algoseek::testing::AstGenerator gen(9);
  std::vector<Icfg> graphs;
  for (int i = 0; i < 5; ++i) graphs.push_back(build_pcode_icfg(gen.program(), "q" + std::to_string(i)));
  graphs.push_back(extract_c("void f(){ if (a) b(); }\nvoid b(){ c; }").graphs[0]);
  EXPECT_EQ(from_json(to_json(graphs)), graphs);

  const auto path = std::filesystem::temp_directory_path() / "algoseek_icfg_test.json";
  write_icfg_json(graphs, path);
  EXPECT_EQ(read_icfg_json(path), graphs);
  std::filesystem::remove(path);
}

TEST(IcfgJson, MissingEdgesIsSchemaError) {
  try {
    from_json(R"([{"graph_id":"g","nodes":[]}])");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(e.field().find("edges"), std::string::npos);
  }
  EXPECT_THROW(from_json("{}"), SchemaError);
  EXPECT_THROW(from_json("not json"), SchemaError);
  EXPECT_THROW(from_json(R"([{"graph_id":"g","nodes":[],"edges":[{"src":0,"dst":1,"kind":"flow"}]}])"),
               SchemaError);
}

TEST(IcfgJson, HandWrittenThreeNodes) {
  const char* doc = R"([{"graph_id":"hand","nodes":[
    {"id":0,"kind":"entry","payload_kind":"none","text":"","file":"x.c","line_start":1,"line_end":1,"function":"f"},
    {"id":1,"kind":"statement","payload_kind":"code-text","text":"x=1","file":"x.c","line_start":2,"line_end":2,"function":"f"},
    {"id":2,"kind":"exit","payload_kind":"none","text":"","file":"x.c","line_start":3,"line_end":3,"function":"f"}],
    "edges":[{"src":0,"dst":1,"kind":"flow"},{"src":1,"dst":2,"kind":"flow"}]}])";
  const auto graphs = from_json(doc);
  ASSERT_EQ(graphs.size(), 1u);
  const Adjacency a = adjacency(graphs[0]);
  const std::vector<std::uint8_t> want = {0, 1, 0, 0, 0, 1, 0, 0, 0};
  EXPECT_EQ(a.bits, want);
  EXPECT_EQ(graphs[0].nodes[1].text, "x=1");
}
