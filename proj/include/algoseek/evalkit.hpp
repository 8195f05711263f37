#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "algoseek/error.hpp"
#include "algoseek/icfg.hpp"
#include "algoseek/search.hpp"

// Ground truth, hit rule, F-rank and MRR.
namespace algoseek::evalkit {

class EmptyList : public Error {
 public:
  EmptyList() : Error("cannot average an empty list of ranks") {}
};

// Either a line range (`function` empty) or a named function. A function
// target is usable once `file`/`line_*` hold the function's resolved span.
struct Target {
  std::string project;
  std::string file;
  int line_start = 0;
  int line_end = 0;
  std::string function;
  bool operator==(const Target&) const = default;
};

struct GroundTruth {
  std::string query_id;
  std::vector<Target> targets;
};

inline constexpr int kDefaultCutoff = 100;

// nullopt stands for "> cutoff".
using FRank = std::optional<int>;

std::string to_string(FRank rank, int cutoff = kDefaultCutoff);

// Same file and either >= 1 shared line (range targets) or the fragment
// inside the function's span (function targets).
bool is_hit(const search::Span& fragment, const Target& target);

// 1-based rank of the first group with a hitting fragment within `cutoff`.
FRank f_rank(std::span<const search::CandidateGroup> ranked, std::span<const Target> targets,
             int cutoff = kDefaultCutoff);

// Mean of 1/rank, misses contributing 0. Throws EmptyList for no queries.
double mrr(std::span<const FRank> ranks);

struct MeanFRank {
  double mean = 0.0;
  std::size_t misses = 0;
};

// Mean over ranked entries; misses are excluded and counted. Throws
// EmptyList when nothing is ranked.
MeanFRank mean_f_rank(std::span<const FRank> ranks);

// TSV rows `query<TAB>project<TAB>file<TAB>start<TAB>end` or
// `query<TAB>project<TAB>@function`; `#` comments and blank lines skipped.
// Queries keep first-appearance order.
std::vector<GroundTruth> parse_truth(std::string_view tsv);
std::vector<GroundTruth> read_truth(const std::filesystem::path& path);

// Fills file and line span of every function target from the entry/exit
// locations in `graphs` (one target per definition). Unknown names throw.
std::vector<GroundTruth> resolve_functions(std::vector<GroundTruth> truth,
                                           std::span<const icfg::Icfg> graphs);

struct QueryReport {
  std::string query_id;
  FRank rank;
  std::map<std::string, FRank> per_project;
};

struct MetricReport {
  int cutoff = kDefaultCutoff;
  std::vector<QueryReport> queries;
  double mrr = 0.0;
};

// `results` keyed by query id; a query without a result counts as a miss.
MetricReport evaluate(std::span<const GroundTruth> truth,
                      const std::map<std::string, search::SearchResult>& results,
                      int cutoff = kDefaultCutoff);

std::string to_json(const MetricReport& report);
std::string to_table(const MetricReport& report);

}  // namespace algoseek::evalkit
