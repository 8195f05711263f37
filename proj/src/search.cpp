#include "algoseek/search.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace algoseek::search {

ConfigMismatch::ConfigMismatch(const std::string& index_hash, const std::string& model_hash)
    : Error("index config hash " + index_hash + " does not match model config hash " +
            model_hash + "; rebuild the index with the current model") {}

VectorDimensionMismatch::VectorDimensionMismatch(Eigen::Index expected, Eigen::Index actual)
    : Error("vector dimension " + std::to_string(actual) + ", expected " +
            std::to_string(expected)) {}

namespace {

bool entry_less(const IndexEntry& a, const IndexEntry& b) {
  if (a.graph_id != b.graph_id) return a.graph_id < b.graph_id;
  return a.node_id < b.node_id;
}

const IndexEntry* find_entry(const VectorIndex& index, const std::string& graph_id,
                             icfg::NodeId node) {
  const auto& es = index.entries();
  IndexEntry probe;
  probe.graph_id = graph_id;
  probe.node_id = node;
  auto it = std::lower_bound(es.begin(), es.end(), probe, entry_less);
  if (it == es.end() || it->graph_id != graph_id || it->node_id != node) return nullptr;
  return &*it;
}

}  // namespace

VectorIndex::VectorIndex(std::vector<IndexEntry> entries, std::string config_hash)
    : config_hash_(std::move(config_hash)), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), entry_less);
  for (std::size_t i = 1; i < entries_.size(); ++i)
    if (!entry_less(entries_[i - 1], entries_[i]))
      throw Error("duplicate index entry " + entries_[i].graph_id + ":" +
                  std::to_string(entries_[i].node_id));
  if (!entries_.empty()) dim_ = entries_.front().vec.size();
  norms_.reserve(entries_.size());
  for (const IndexEntry& e : entries_) {
    if (e.vec.size() != dim_) throw VectorDimensionMismatch(dim_, e.vec.size());
    norms_.push_back(e.vec.norm());
  }
}

bool VectorIndex::operator==(const VectorIndex& other) const {
  if (dim_ != other.dim_ || config_hash_ != other.config_hash_ ||
      entries_.size() != other.entries_.size())
    return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const IndexEntry& a = entries_[i];
    const IndexEntry& b = other.entries_[i];
    if (a.graph_id != b.graph_id || a.node_id != b.node_id || a.loc != b.loc || a.vec != b.vec)
      return false;
  }
  return true;
}

double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) throw VectorDimensionMismatch(u.size(), v.size());
  const double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

std::vector<Match> top_k(const VectorIndex& index, const Eigen::VectorXd& query,
                         std::size_t k, icfg::NodeId query_node) {
  if (index.size() == 0) throw EmptyIndex();
  if (query.size() != index.dim()) throw VectorDimensionMismatch(index.dim(), query.size());
  if (k == 0) throw UsageError("k must be at least 1");
  const double qn = query.norm();
  std::vector<std::pair<double, std::size_t>> scored(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    const double d = qn * index.norm(i);
    const double s = d == 0.0 ? 0.0 : std::clamp(query.dot(index.entries()[i].vec) / d, -1.0, 1.0);
    scored[i] = {s, i};
  }
  // Entries are already in (graph_id, node_id) order, so the position breaks ties.
  auto better = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(take), scored.end(), better);
  std::vector<Match> out;
  out.reserve(take);
  for (std::size_t r = 0; r < take; ++r) {
    const IndexEntry& e = index.entries()[scored[r].second];
    out.push_back({query_node, e.graph_id, e.node_id, scored[r].first});
  }
  return out;
}

double score_group(int qc, int distance) {
  return static_cast<double>(qc) + 1.0 / static_cast<double>(std::max(1, distance));
}

int covered_query_nodes(const CandidateGroup& group, std::span<const Match> matches) {
  std::set<icfg::NodeId> covered;
  for (const Match& m : matches)
    if (m.graph_id == group.graph_id &&
        std::binary_search(group.members.begin(), group.members.end(), m.node_id))
      covered.insert(m.query_node);
  return static_cast<int>(covered.size());
}

namespace {

// Complete linkage within one graph over the distinct matched nodes.
std::vector<CandidateGroup> agglomerate(const icfg::Icfg& graph,
                                        const std::vector<icfg::NodeId>& nodes) {
  const auto neighbors = icfg::undirected_neighbors(graph);
  const std::size_t m = nodes.size();
  std::vector<std::vector<int>> d(m, std::vector<int>(m, 0));
  for (std::size_t a = 0; a < m; ++a) {
    const std::vector<int> hops = icfg::bfs_hops(neighbors, nodes[a]);
    for (std::size_t b = 0; b < m; ++b) d[a][b] = hops[static_cast<std::size_t>(nodes[b])];
  }

  struct Cluster {
    std::vector<icfg::NodeId> members;
    int diameter = 0;
    bool active = true;
  };
  std::vector<Cluster> clusters;
  std::vector<CandidateGroup> out;
  for (icfg::NodeId n : nodes) {
    clusters.push_back({{n}, 0, true});
    out.push_back({graph.graph_id, {n}, 0, 0, 0.0, {}});
  }

  auto merged = [&](std::size_t a, std::size_t b) {
    std::vector<icfg::NodeId> u;
    std::merge(clusters[a].members.begin(), clusters[a].members.end(),
               clusters[b].members.begin(), clusters[b].members.end(), std::back_inserter(u));
    return u;
  };

  while (true) {
    int best = icfg::kInfinity;
    std::size_t ba = 0, bb = 0;
    std::vector<icfg::NodeId> best_union;
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      if (!clusters[a].active) continue;
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        if (!clusters[b].active || d[a][b] > best || d[a][b] == icfg::kInfinity) continue;
        if (d[a][b] < best) {
          best = d[a][b];
          ba = a;
          bb = b;
          best_union.clear();
          continue;
        }
        if (best_union.empty()) best_union = merged(ba, bb);
        std::vector<icfg::NodeId> u = merged(a, b);
        if (u < best_union) {
          ba = a;
          bb = b;
          best_union = std::move(u);
        }
      }
    }
    if (best == icfg::kInfinity) break;
    if (best_union.empty()) best_union = merged(ba, bb);
    // The union takes slot ba; linkage to every other cluster is the max.
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      d[ba][c] = d[c][ba] = std::max(d[ba][c], d[bb][c]);
    }
    d[ba][ba] = 0;
    clusters[ba].members = best_union;
    clusters[ba].diameter = std::max({clusters[ba].diameter, clusters[bb].diameter, best});
    clusters[bb].active = false;
    out.push_back({graph.graph_id, std::move(best_union), 0, clusters[ba].diameter, 0.0, {}});
  }
  return out;
}

}  // namespace

std::vector<CandidateGroup> group_nodes(std::span<const Match> matches,
                                        std::span<const icfg::Icfg> graphs) {
  std::map<std::string, const icfg::Icfg*> by_id;
  for (const icfg::Icfg& g : graphs) by_id.emplace(g.graph_id, &g);

  std::map<std::string, std::set<icfg::NodeId>> matched;
  for (const Match& m : matches) matched[m.graph_id].insert(m.node_id);

  std::vector<CandidateGroup> out;
  for (const auto& [graph_id, nodes] : matched) {
    auto it = by_id.find(graph_id);
    if (it == by_id.end()) throw Error("match refers to unknown graph '" + graph_id + "'");
    for (icfg::NodeId n : nodes)
      if (n < 0 || static_cast<std::size_t>(n) >= it->second->size()) throw icfg::UnknownNode(n);
    std::vector<CandidateGroup> groups =
        agglomerate(*it->second, std::vector<icfg::NodeId>(nodes.begin(), nodes.end()));
    for (CandidateGroup& g : groups) {
      g.qc = covered_query_nodes(g, matches);
      g.gamma = score_group(g.qc, g.distance);
      out.push_back(std::move(g));
    }
  }
  return out;
}

std::vector<CandidateGroup> emit_fragments(std::vector<CandidateGroup> groups,
                                           const VectorIndex& index, int gap_lines) {
  std::vector<CandidateGroup> kept;
  for (CandidateGroup& g : groups) {
    std::map<std::string, std::vector<std::pair<int, int>>> per_file;
    for (icfg::NodeId n : g.members) {
      const IndexEntry* e = find_entry(index, g.graph_id, n);
      if (e == nullptr) throw Error("group member " + g.graph_id + ":" + std::to_string(n) +
                                    " is not in the index");
      if (e->loc.file.empty() || e->loc.line_start <= 0) continue;
      per_file[e->loc.file].emplace_back(e->loc.line_start, e->loc.line_end);
    }
    g.fragments.clear();
    for (auto& [file, ranges] : per_file) {
      std::sort(ranges.begin(), ranges.end());
      Span cur{file, ranges[0].first, ranges[0].second};
      for (std::size_t i = 1; i < ranges.size(); ++i) {
        if (ranges[i].first - cur.line_end - 1 <= gap_lines) {
          cur.line_end = std::max(cur.line_end, ranges[i].second);
        } else {
          g.fragments.push_back(cur);
          cur = {file, ranges[i].first, ranges[i].second};
        }
      }
      g.fragments.push_back(cur);
    }
    if (!g.fragments.empty()) kept.push_back(std::move(g));
  }
  std::sort(kept.begin(), kept.end(), [](const CandidateGroup& a, const CandidateGroup& b) {
    if (a.gamma != b.gamma) return a.gamma > b.gamma;
    if (a.qc != b.qc) return a.qc > b.qc;
    if (a.members.size() != b.members.size()) return a.members.size() < b.members.size();
    if (a.graph_id != b.graph_id) return a.graph_id < b.graph_id;
    return a.members < b.members;
  });
  return kept;
}

Eigen::MatrixXd node_embeddings(const icfg::Icfg& graph, const gae::GaeModel& model,
                                const featenc::TextEncoder& encoder,
                                const SearchOptions& options) {
  gae::Embedding e =
      gae::embed(model, gae::graph_input(graph, featenc::build_feature_matrix(
                                                    graph, encoder, options.features)));
  if (!options.use_graph) e.final.leftCols(model.h).setZero();
  return e.final;
}

VectorIndex build_index(std::span<const icfg::Icfg> graphs, const gae::GaeModel& model,
                        const featenc::TextEncoder& encoder, const SearchOptions& options) {
  std::vector<IndexEntry> entries;
  for (const icfg::Icfg& g : graphs) {
    const Eigen::MatrixXd emb = node_embeddings(g, model, encoder, options);
    for (const icfg::IcfgNode& n : g.nodes) {
      IndexEntry e;
      e.graph_id = g.graph_id;
      e.node_id = n.id;
      e.vec = emb.row(n.id).transpose();
      if (n.kind != icfg::NodeKind::Entry && n.kind != icfg::NodeKind::Exit) e.loc = n.loc;
      entries.push_back(std::move(e));
    }
  }
  return VectorIndex(std::move(entries), model.config_hash);
}

SearchResult search(const plang::PProgram& query, std::string query_id,
                    const VectorIndex& index, std::span<const icfg::Icfg> graphs,
                    const gae::GaeModel& model, const featenc::TextEncoder& encoder,
                    const SearchOptions& options) {
  if (index.config_hash() != model.config_hash)
    throw ConfigMismatch(index.config_hash(), model.config_hash);
  if (index.size() == 0) throw EmptyIndex();
  const icfg::Icfg q = icfg::build_pcode_icfg(query, query_id);
  const Eigen::MatrixXd emb = node_embeddings(q, model, encoder, options);
  std::vector<Match> matches;
  for (const icfg::IcfgNode& n : q.nodes) {
    if (n.kind == icfg::NodeKind::Entry || n.kind == icfg::NodeKind::Exit) continue;
    std::vector<Match> m = top_k(index, emb.row(n.id).transpose(), options.k, n.id);
    matches.insert(matches.end(), m.begin(), m.end());
  }
  SearchResult r;
  r.query_id = std::move(query_id);
  r.groups = emit_fragments(group_nodes(matches, graphs), index, options.gap_lines);
  return r;
}

// --------------------------------------------------------------------- JSON

std::string to_json(const VectorIndex& index) {
  nlohmann::json entries = nlohmann::json::array();
  for (const IndexEntry& e : index.entries()) {
    entries.push_back({{"graph_id", e.graph_id},
                       {"node_id", e.node_id},
                       {"vec", std::vector<double>(e.vec.data(), e.vec.data() + e.vec.size())},
                       {"file", e.loc.file},
                       {"line_start", e.loc.line_start},
                       {"line_end", e.loc.line_end}});
  }
  nlohmann::json j = {{"version", 1},
                      {"dim", index.dim()},
                      {"config_hash", index.config_hash()},
                      {"entries", std::move(entries)}};
  return j.dump() + "\n";
}

VectorIndex index_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("version").get<int>() != 1)
      throw Error("unsupported index version " + j.at("version").dump());
    const auto dim = j.at("dim").get<Eigen::Index>();
    std::vector<IndexEntry> entries;
    for (const auto& je : j.at("entries")) {
      IndexEntry e;
      e.graph_id = je.at("graph_id").get<std::string>();
      e.node_id = je.at("node_id").get<int>();
      const auto v = je.at("vec").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(v.size()) != dim)
        throw VectorDimensionMismatch(dim, static_cast<Eigen::Index>(v.size()));
      e.vec = Eigen::Map<const Eigen::VectorXd>(v.data(), dim);
      e.loc = {je.at("file").get<std::string>(), je.at("line_start").get<int>(),
               je.at("line_end").get<int>()};
      entries.push_back(std::move(e));
    }
    return VectorIndex(std::move(entries), j.at("config_hash").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed index file: ") + e.what());
  }
}

void write_index(const VectorIndex& index, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(index);
}

VectorIndex read_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read index " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return index_from_json(ss.str());
}

std::string to_json(const SearchResult& result) {
  nlohmann::json groups = nlohmann::json::array();
  int rank = 0;
  for (const CandidateGroup& g : result.groups) {
    nlohmann::json frags = nlohmann::json::array();
    for (const Span& s : g.fragments)
      frags.push_back({{"file", s.file}, {"line_start", s.line_start}, {"line_end", s.line_end}});
    groups.push_back({{"rank", ++rank},
                      {"gamma", g.gamma},
                      {"qc", g.qc},
                      {"distance", g.distance},
                      {"graph_id", g.graph_id},
                      {"members", g.members},
                      {"fragments", std::move(frags)}});
  }
  return groups.dump(1) + "\n";
}

SearchResult result_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SearchResult r;
    for (const auto& jg : j) {
      CandidateGroup g;
      g.gamma = jg.at("gamma").get<double>();
      g.qc = jg.at("qc").get<int>();
      g.distance = jg.at("distance").get<int>();
      g.graph_id = jg.value("graph_id", std::string());
      g.members = jg.value("members", std::vector<icfg::NodeId>());
      for (const auto& f : jg.at("fragments"))
        g.fragments.push_back({f.at("file").get<std::string>(), f.at("line_start").get<int>(),
                               f.at("line_end").get<int>()});
      r.groups.push_back(std::move(g));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed search result: ") + e.what());
  }
}

}  // namespace algoseek::search
