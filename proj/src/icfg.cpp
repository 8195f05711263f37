#include "algoseek/icfg.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <string_view>

#include "graph_builder.hpp"

namespace algoseek::icfg {

std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Entry: return "entry";
    case NodeKind::Exit: return "exit";
    case NodeKind::Statement: return "statement";
    case NodeKind::Condition: return "condition";
    case NodeKind::CallSite: return "call-site";
  }
  return "?";
}

std::string_view to_string(PayloadKind k) {
  switch (k) {
    case PayloadKind::None: return "none";
    case PayloadKind::MathText: return "math-text";
    case PayloadKind::NlText: return "nl-text";
    case PayloadKind::CodeText: return "code-text";
  }
  return "?";
}

std::string_view to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::Flow: return "flow";
    case EdgeKind::FlowTrue: return "flow-true";
    case EdgeKind::FlowFalse: return "flow-false";
    case EdgeKind::Call: return "call";
    case EdgeKind::Return: return "return";
  }
  return "?";
}

Adjacency adjacency(const Icfg& g) {
  Adjacency a;
  a.n = g.size();
  a.bits.assign(a.n * a.n, 0);
  for (const IcfgEdge& e : g.edges)
    a.bits[static_cast<std::size_t>(e.src) * a.n + e.dst] = 1;
  return a;
}

std::vector<std::vector<NodeId>> undirected_neighbors(const Icfg& g) {
  std::vector<std::vector<NodeId>> nb(g.size());
  for (const IcfgEdge& e : g.edges) {
    if (e.src == e.dst) continue;
    nb[e.src].push_back(e.dst);
    nb[e.dst].push_back(e.src);
  }
  for (auto& list : nb) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return nb;
}

std::vector<int> bfs_hops(const std::vector<std::vector<NodeId>>& neighbors,
                          NodeId source) {
  std::vector<int> dist(neighbors.size(), kInfinity);
  std::deque<NodeId> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : neighbors[u]) {
      if (dist[v] == kInfinity) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

int shortest_path_hops(const Icfg& g, NodeId x, NodeId y) {
  const auto n = static_cast<NodeId>(g.size());
  if (x < 0 || x >= n) throw UnknownNode(x);
  if (y < 0 || y >= n) throw UnknownNode(y);
  if (x == y) return 0;
  return bfs_hops(undirected_neighbors(g), x)[y];
}

std::vector<std::string> check_invariants(const Icfg& g) {
  std::vector<std::string> out;
  const auto n = static_cast<NodeId>(g.size());
  std::map<std::pair<std::string, std::string>, std::pair<int, int>> entry_exit;
  for (NodeId i = 0; i < n; ++i) {
    const IcfgNode& node = g.nodes[i];
    if (node.id != i) out.push_back("node " + std::to_string(i) + " has id " +
                                    std::to_string(node.id));
    auto& [entries, exits] = entry_exit[{node.loc.file, node.function}];
    if (node.kind == NodeKind::Entry) ++entries;
    if (node.kind == NodeKind::Exit) ++exits;
  }
  for (const auto& [fn, counts] : entry_exit) {
    if (counts.first != 1 || counts.second != 1)
      out.push_back("function '" + fn.first + "::" + fn.second + "' has " +
                    std::to_string(counts.first) + " entries and " +
                    std::to_string(counts.second) + " exits");
  }
  for (const IcfgEdge& e : g.edges) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
      out.push_back("edge out of range");
      continue;
    }
    const NodeKind sk = g.nodes[e.src].kind, dk = g.nodes[e.dst].kind;
    const bool ok =
        ((e.kind == EdgeKind::FlowTrue || e.kind == EdgeKind::FlowFalse)
             ? sk == NodeKind::Condition
             : true) &&
        (e.kind == EdgeKind::Call
             ? sk == NodeKind::CallSite && dk == NodeKind::Entry
             : true) &&
        (e.kind == EdgeKind::Return ? sk == NodeKind::Exit : true);
    if (!ok)
      out.push_back("illegal " + std::string(to_string(e.kind)) + " edge " +
                    std::to_string(e.src) + "->" + std::to_string(e.dst));
  }
  const auto nb = undirected_neighbors(g);
  std::vector<bool> seen(n, false);
  std::deque<NodeId> queue;
  for (NodeId i = 0; i < n; ++i) {
    if (g.nodes[i].kind == NodeKind::Entry) {
      seen[i] = true;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : nb[u]) {
      if (!seen[v]) {
        seen[v] = true;
        queue.push_back(v);
      }
    }
  }
  for (NodeId i = 0; i < n; ++i)
    if (!seen[i])
      out.push_back("node " + std::to_string(i) + " unreachable from entries");
  return out;
}

// ------------------------------------------------------------ p-code builder

namespace {

using detail::GraphBuilder;
using detail::Pending;
using namespace plang;

PayloadKind payload_of(const PExpr& e) {
  return e.kind == PExpr::Kind::Math ? PayloadKind::MathText
                                     : PayloadKind::NlText;
}

struct CountedLoop {
  std::string test;
  std::string update;
  PayloadKind payload;
};

// `for $v = a$ to $b$` (or downto) as the counted loop it abbreviates:
// test `v ≤ b` / `v ≥ b`, update `v = v + 1` / `v = v - 1`. Other headers
// have no loop variable to step.
std::optional<CountedLoop> counted_loop(const ForStmt& f) {
  if (!f.bound || f.direction == Direction::None ||
      f.header.kind != PExpr::Kind::Math)
    return std::nullopt;
  const std::string& h = f.header.raw;
  std::size_t split = std::string::npos, width = 0;
  for (std::string_view op : {":=", "\xE2\x86\x90", "="}) {  // := ← =
    const std::size_t at = h.find(op);
    if (at != std::string::npos && at < split) {
      split = at;
      width = op.size();
    }
  }
  if (split == std::string::npos) return std::nullopt;
  const auto first = h.find_first_not_of(" \t");
  const auto last = h.find_last_not_of(" \t", split == 0 ? 0 : split - 1);
  if (first >= split || last == std::string::npos || last < first) return std::nullopt;
  const std::string var = h.substr(first, last - first + 1);
  if (split + width < h.size() && h[split + width] == '=') return std::nullopt;  // ==
  if (width == 1 && split > 0 && std::string_view("!<>").find(h[split - 1]) != std::string_view::npos)
    return std::nullopt;
  const bool up = f.direction == Direction::To;
  return CountedLoop{var + (up ? " \xE2\x89\xA4 " : " \xE2\x89\xA5 ") + f.bound->raw,
                     var + " = " + var + (up ? " + 1" : " - 1"),
                     f.bound->kind == PExpr::Kind::Math ? PayloadKind::MathText
                                                         : PayloadKind::NlText};
}

int line_span(const std::string& raw) {
  return static_cast<int>(std::count(raw.begin(), raw.end(), '\n'));
}

std::string plain_params(const std::vector<Param>& ps) {
  std::string out = "(";
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) out += ", ";
    if (const auto* s = std::get_if<std::string>(&ps[i]))
      out += *s;
    else
      out += std::get<PExpr>(ps[i]).raw;
  }
  return out + ")";
}

class PcodeLowering {
 public:
  PcodeLowering(std::string graph_id, std::string file)
      : b_(std::move(graph_id)), file_(std::move(file)) {}

  Icfg run(const PProgram& program) {
    std::map<std::string, std::pair<NodeId, NodeId>> bounds;
    for (const PFunction& fn : program.functions) {
      fn_ = fn.name;
      returns_.clear();
      const NodeId entry = b_.add(NodeKind::Entry, PayloadKind::None, "",
                                  loc(fn.line, fn.line), fn_);
      Pending outs = suite(fn.body, {{entry, EdgeKind::Flow}});
      const NodeId exit = b_.add(NodeKind::Exit, PayloadKind::None, "",
                                 loc(fn.line, fn.line), fn_);
      b_.connect(outs, exit);
      b_.connect(returns_, exit);
      bounds[fn.name] = {entry, exit};
    }
    for (const auto& [site, callee] : calls_) {
      const auto it = bounds.find(callee);
      if (it == bounds.end()) continue;
      const auto [entry, exit] = it->second;
      for (NodeId succ : b_.successors(site))
        b_.edge(exit, succ, EdgeKind::Return);
      b_.edge(site, entry, EdgeKind::Call);
    }
    return b_.take();
  }

 private:
  SourceLoc loc(int start, int end) const { return {file_, start, end}; }

  NodeId node(NodeKind kind, PayloadKind payload, std::string text, int line,
              int extra_lines = 0) {
    return b_.add(kind, payload, std::move(text), loc(line, line + extra_lines),
                  fn_);
  }

  Pending suite(const Suite& body, Pending preds) {
    for (const PStmt& s : body) preds = stmt(s, std::move(preds));
    return preds;
  }

  NodeId call_site(const CallStmt& c, int line) {
    const NodeId id = node(NodeKind::CallSite, PayloadKind::NlText,
                           c.name + plain_params(c.args), line);
    calls_.emplace_back(id, c.name);
    return id;
  }

  NodeId condition(const PTest& t, int line) {
    const std::string text = plain_test(t);
    return node(NodeKind::Condition,
                test_has_math(t) ? PayloadKind::MathText : PayloadKind::NlText,
                text, line, line_span(text));
  }

  Pending stmt(const PStmt& s, Pending preds) {
    const int line = s.line;
    if (const auto* e = std::get_if<ExprStmt>(&s.node)) {
      const NodeId id = node(NodeKind::Statement, payload_of(e->expr),
                             e->expr.raw, line, line_span(e->expr.raw));
      b_.connect(preds, id);
      return {{id, EdgeKind::Flow}};
    }
    if (const auto* c = std::get_if<CallStmt>(&s.node)) {
      const NodeId id = call_site(*c, line);
      b_.connect(preds, id);
      return {{id, EdgeKind::Flow}};
    }
    if (const auto* r = std::get_if<ReturnStmt>(&s.node)) {
      NodeId id;
      if (!r->value) {
        id = node(NodeKind::Statement, PayloadKind::NlText, "return", line);
      } else if (const auto* e = std::get_if<PExpr>(&*r->value)) {
        id = node(NodeKind::Statement, payload_of(*e), e->raw, line,
                  line_span(e->raw));
      } else {
        id = call_site(std::get<CallStmt>(*r->value), line);
      }
      b_.connect(preds, id);
      returns_.emplace_back(id, EdgeKind::Flow);
      return {};
    }
    if (const auto* i = std::get_if<IfStmt>(&s.node)) {
      NodeId cond = condition(i->test, line);
      b_.connect(preds, cond);
      Pending outs = suite(i->then_body, {{cond, EdgeKind::FlowTrue}});
      for (const ElseIf& e : i->elifs) {
        const NodeId next = condition(e.test, e.line);
        b_.edge(cond, next, EdgeKind::FlowFalse);
        cond = next;
        Pending branch = suite(e.body, {{cond, EdgeKind::FlowTrue}});
        outs.insert(outs.end(), branch.begin(), branch.end());
      }
      if (i->else_body) {
        Pending branch = suite(*i->else_body, {{cond, EdgeKind::FlowFalse}});
        outs.insert(outs.end(), branch.begin(), branch.end());
      } else {
        outs.emplace_back(cond, EdgeKind::FlowFalse);
      }
      return outs;
    }
    if (const auto* w = std::get_if<WhileStmt>(&s.node)) {
      const NodeId cond = condition(w->test, line);
      b_.connect(preds, cond);
      b_.connect(suite(w->body, {{cond, EdgeKind::FlowTrue}}), cond);
      return {{cond, EdgeKind::FlowFalse}};
    }
    if (const auto* f = std::get_if<ForStmt>(&s.node)) {
      if (auto counted = counted_loop(*f)) {
        const NodeId init = node(NodeKind::Statement, PayloadKind::MathText,
                                 f->header.raw, line, line_span(f->header.raw));
        b_.connect(preds, init);
        const NodeId cond = node(NodeKind::Condition, counted->payload,
                                 counted->test, line, line_span(counted->test));
        b_.edge(init, cond, EdgeKind::Flow);
        Pending body = suite(f->body, {{cond, EdgeKind::FlowTrue}});
        const NodeId update = node(NodeKind::Statement, PayloadKind::MathText,
                                   counted->update, line);
        b_.connect(body, update);
        b_.edge(update, cond, EdgeKind::Flow);
        return {{cond, EdgeKind::FlowFalse}};
      }
      std::string text = f->header.raw;
      PayloadKind payload = payload_of(f->header);
      if (f->bound) {
        text += f->direction == Direction::Downto ? " downto " : " to ";
        text += f->bound->raw;
        if (f->bound->kind == PExpr::Kind::Math)
          payload = PayloadKind::MathText;
      }
      const NodeId cond =
          node(NodeKind::Condition, payload, text, line, line_span(text));
      b_.connect(preds, cond);
      b_.connect(suite(f->body, {{cond, EdgeKind::FlowTrue}}), cond);
      return {{cond, EdgeKind::FlowFalse}};
    }
    const auto& r = std::get<RepeatStmt>(s.node);
    const NodeId body_start = b_.next_id();
    Pending outs = suite(r.body, std::move(preds));
    const NodeId cond = condition(r.until, line);
    b_.connect(outs, cond);
    // `until` exits the loop when its test holds.
    b_.edge(cond, body_start, EdgeKind::FlowFalse);
    return {{cond, EdgeKind::FlowTrue}};
  }

  GraphBuilder b_;
  std::string file_;
  std::string fn_;
  Pending returns_;
  std::vector<std::pair<NodeId, std::string>> calls_;
};

}  // namespace

Icfg build_pcode_icfg(const PProgram& program, std::string graph_id,
                      std::string file) {
  return PcodeLowering(std::move(graph_id), std::move(file)).run(program);
}

}  // namespace algoseek::icfg
