#pragma once

#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "algoseek/icfg.hpp"

namespace algoseek::icfg::detail {

// Dangling control-flow exits waiting for their successor node, each with
// the edge kind it will be connected by.
using Pending = std::vector<std::pair<NodeId, EdgeKind>>;

class GraphBuilder {
 public:
  explicit GraphBuilder(std::string graph_id) { g_.graph_id = std::move(graph_id); }

  NodeId add(NodeKind kind, PayloadKind payload, std::string text,
             SourceLoc loc, std::string function) {
    const NodeId id = static_cast<NodeId>(g_.nodes.size());
    g_.nodes.push_back({id, kind, payload, std::move(text), std::move(loc),
                        std::move(function)});
    return id;
  }

  void edge(NodeId src, NodeId dst, EdgeKind kind) {
    if (!seen_.emplace(src, dst, static_cast<int>(kind)).second) return;
    g_.edges.push_back({src, dst, kind});
  }

  void connect(const Pending& preds, NodeId dst) {
    for (const auto& [src, kind] : preds) edge(src, dst, kind);
  }

  std::vector<NodeId> successors(NodeId n) const {
    std::vector<NodeId> out;
    for (const IcfgEdge& e : g_.edges)
      if (e.src == n && e.kind == EdgeKind::Flow) out.push_back(e.dst);
    return out;
  }

  NodeId next_id() const { return static_cast<NodeId>(g_.nodes.size()); }
  Icfg& graph() { return g_; }
  Icfg take() { return std::move(g_); }

 private:
  Icfg g_;
  std::set<std::tuple<NodeId, NodeId, int>> seen_;
};

}  // namespace algoseek::icfg::detail
