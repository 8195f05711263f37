#include "algoseek/evalkit.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace algoseek::evalkit {

std::string to_string(FRank rank, int cutoff) {
  return rank ? std::to_string(*rank) : ">" + std::to_string(cutoff);
}

bool is_hit(const search::Span& fragment, const Target& target) {
  if (fragment.file != target.file) return false;
  if (!target.function.empty())
    return fragment.line_start >= target.line_start && fragment.line_end <= target.line_end;
  return fragment.line_start <= target.line_end && target.line_start <= fragment.line_end;
}

FRank f_rank(std::span<const search::CandidateGroup> ranked, std::span<const Target> targets,
             int cutoff) {
  const std::size_t limit = std::min(ranked.size(), static_cast<std::size_t>(std::max(cutoff, 0)));
  for (std::size_t r = 0; r < limit; ++r)
    for (const search::Span& f : ranked[r].fragments)
      for (const Target& t : targets)
        if (is_hit(f, t)) return static_cast<int>(r + 1);
  return std::nullopt;
}

double mrr(std::span<const FRank> ranks) {
  if (ranks.empty()) throw EmptyList();
  double sum = 0.0;
  for (const FRank& r : ranks)
    if (r) sum += 1.0 / static_cast<double>(*r);
  return sum / static_cast<double>(ranks.size());
}

MeanFRank mean_f_rank(std::span<const FRank> ranks) {
  MeanFRank out;
  double sum = 0.0;
  std::size_t n = 0;
  for (const FRank& r : ranks) {
    if (r) {
      sum += *r;
      ++n;
    } else {
      ++out.misses;
    }
  }
  if (n == 0) throw EmptyList();
  out.mean = sum / static_cast<double>(n);
  return out;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

int parse_line_number(const std::string& s, int row) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v <= 0)
    throw Error("truth row " + std::to_string(row) + ": bad line number '" + s + "'");
  return v;
}

}  // namespace

std::vector<GroundTruth> parse_truth(std::string_view tsv) {
  std::vector<GroundTruth> out;
  std::map<std::string, std::size_t> slot;
  std::istringstream in{std::string(tsv)};
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cols = split_tabs(line);
    Target t;
    if (cols.size() == 3 && cols[2].size() > 1 && cols[2][0] == '@') {
      t.function = cols[2].substr(1);
    } else if (cols.size() == 5) {
      t.file = cols[2];
      t.line_start = parse_line_number(cols[3], row);
      t.line_end = parse_line_number(cols[4], row);
      if (t.line_end < t.line_start)
        throw Error("truth row " + std::to_string(row) + ": line_end before line_start");
    } else {
      throw Error("truth row " + std::to_string(row) + ": expected 3 or 5 tab-separated columns");
    }
    if (cols[0].empty()) throw Error("truth row " + std::to_string(row) + ": empty query id");
    t.project = cols[1];
    auto [it, fresh] = slot.emplace(cols[0], out.size());
    if (fresh) out.push_back({cols[0], {}});
    out[it->second].targets.push_back(std::move(t));
  }
  return out;
}

std::vector<GroundTruth> read_truth(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read ground truth " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_truth(ss.str());
}

std::vector<GroundTruth> resolve_functions(std::vector<GroundTruth> truth,
                                           std::span<const icfg::Icfg> graphs) {
  // function label -> spans (entry line to exit line)
  std::map<std::string, std::vector<search::Span>> spans;
  std::map<std::pair<std::string, std::string>, search::Span> partial;
  for (const icfg::Icfg& g : graphs) {
    for (const icfg::IcfgNode& n : g.nodes) {
      if (n.kind != icfg::NodeKind::Entry && n.kind != icfg::NodeKind::Exit) continue;
      search::Span& s = partial[{g.graph_id, n.function}];
      s.file = n.loc.file;
      if (n.kind == icfg::NodeKind::Entry) s.line_start = n.loc.line_start;
      else s.line_end = n.loc.line_end;
    }
  }
  for (const auto& [key, s] : partial) spans[key.second].push_back(s);

  for (GroundTruth& gt : truth) {
    std::vector<Target> resolved;
    for (Target& t : gt.targets) {
      if (t.function.empty()) {
        resolved.push_back(std::move(t));
        continue;
      }
      auto it = spans.find(t.function);
      if (it == spans.end())
        throw Error("query " + gt.query_id + ": function '" + t.function + "' not in the corpus");
      for (const search::Span& s : it->second)
        resolved.push_back({t.project, s.file, s.line_start, s.line_end, t.function});
    }
    gt.targets = std::move(resolved);
  }
  return truth;
}

MetricReport evaluate(std::span<const GroundTruth> truth,
                      const std::map<std::string, search::SearchResult>& results, int cutoff) {
  MetricReport report;
  report.cutoff = cutoff;
  std::vector<FRank> ranks;
  for (const GroundTruth& gt : truth) {
    QueryReport q;
    q.query_id = gt.query_id;
    auto it = results.find(gt.query_id);
    const std::vector<search::CandidateGroup> none;
    const auto& groups = it == results.end() ? none : it->second.groups;
    q.rank = f_rank(groups, gt.targets, cutoff);
    std::map<std::string, std::vector<Target>> by_project;
    for (const Target& t : gt.targets) by_project[t.project].push_back(t);
    for (const auto& [project, targets] : by_project)
      q.per_project[project] = f_rank(groups, targets, cutoff);
    ranks.push_back(q.rank);
    report.queries.push_back(std::move(q));
  }
  report.mrr = ranks.empty() ? 0.0 : mrr(ranks);
  return report;
}

namespace {

nlohmann::json rank_json(FRank r, int cutoff) {
  return r ? nlohmann::json(*r) : nlohmann::json(to_string(r, cutoff));
}

}  // namespace

std::string to_json(const MetricReport& report) {
  nlohmann::json queries = nlohmann::json::array();
  for (const QueryReport& q : report.queries) {
    nlohmann::json per = nlohmann::json::object();
    std::vector<FRank> project_ranks;
    for (const auto& [project, r] : q.per_project) {
      per[project] = rank_json(r, report.cutoff);
      project_ranks.push_back(r);
    }
    nlohmann::json entry = {{"query_id", q.query_id},
                            {"f_rank", rank_json(q.rank, report.cutoff)},
                            {"per_project", std::move(per)}};
    try {
      const MeanFRank m = mean_f_rank(project_ranks);
      entry["mean_f_rank"] = m.mean;
      entry["misses"] = m.misses;
    } catch (const EmptyList&) {
      entry["mean_f_rank"] = nullptr;
      entry["misses"] = project_ranks.size();
    }
    queries.push_back(std::move(entry));
  }
  nlohmann::json j = {{"version", 1},
                      {"cutoff", report.cutoff},
                      {"mrr", report.mrr},
                      {"queries", std::move(queries)}};
  return j.dump(1) + "\n";
}

std::string to_table(const MetricReport& report) {
  std::size_t width = 5;
  for (const QueryReport& q : report.queries) width = std::max(width, q.query_id.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "query" << "  f-rank\n";
  for (const QueryReport& q : report.queries)
    out << std::left << std::setw(static_cast<int>(width)) << q.query_id << "  "
        << to_string(q.rank, report.cutoff) << "\n";
  out << std::left << std::setw(static_cast<int>(width)) << "MRR" << "  " << std::fixed
      << std::setprecision(4) << report.mrr << "\n";
  return out.str();
}

}  // namespace algoseek::evalkit
