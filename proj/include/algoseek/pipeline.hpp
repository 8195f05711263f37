#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "algoseek/config.hpp"
#include "algoseek/evalkit.hpp"
#include "algoseek/gae.hpp"
#include "algoseek/icfg.hpp"
#include "algoseek/plang.hpp"
#include "algoseek/search.hpp"

// End-to-end steps shared by the command-line tool and the acceptance run.
namespace algoseek::pipeline {

class NoFilesFound : public Error {
 public:
  explicit NoFilesFound(const std::filesystem::path& root)
      : Error("no .c/.h/.java files under " + root.string()) {}
};

struct ManifestEntry {
  std::string path;
  icfg::Language language = icfg::Language::C;
  std::uintmax_t bytes = 0;
  int function_count = 0;
  int node_count = 0;
};

struct Corpus {
  std::vector<icfg::Icfg> graphs;
  std::vector<ManifestEntry> files;
  std::vector<std::string> diagnostics;
};

// Recursively collects source files of the configured languages, recording
// paths relative to `root`. Files that fail to load or extract are skipped
// and reported in diagnostics.
Corpus ingest(const std::filesystem::path& root, const Config& config);
std::string manifest_json(const Corpus& corpus);

// Feature matrices for every graph, as training inputs.
std::vector<gae::GraphInput> graph_inputs(const std::vector<icfg::Icfg>& graphs,
                                          const Config& config);

// Trains with config.seed() and stamps the model with the config hash.
gae::TrainResult train_model(const std::vector<icfg::Icfg>& graphs, const Config& config);

// Throws search::ConfigMismatch unless the model was trained under `config`.
search::VectorIndex build_index(const std::vector<icfg::Icfg>& graphs,
                                const gae::GaeModel& model, const Config& config);

// `.p` files parse as p-code; anything else is converted from pseudo code.
plang::PProgram load_query(const std::filesystem::path& path, const Config& config);

// Query id: file name without extension.
std::string query_id(const std::filesystem::path& path);

search::SearchResult run_query(const std::filesystem::path& query_path,
                               const search::VectorIndex& index,
                               const std::vector<icfg::Icfg>& graphs,
                               const gae::GaeModel& model, const Config& config);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace algoseek::pipeline
