#include "algoseek/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "algoseek/featenc.hpp"
#include "algoseek/pseudoconv.hpp"

namespace algoseek::pipeline {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << contents;
}

namespace {

std::optional<icfg::Language> language_of(const fs::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".c" || ext == ".h") return icfg::Language::C;
  if (ext == ".java") return icfg::Language::Java;
  return std::nullopt;
}

}  // namespace

Corpus ingest(const fs::path& root, const Config& config) {
  if (!fs::is_directory(root)) throw Error("corpus root " + root.string() + " is not a directory");
  const auto languages = config.languages();
  std::vector<fs::path> found;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto lang = language_of(e.path());
    if (lang && languages.count(*lang)) found.push_back(e.path());
  }
  if (found.empty()) throw NoFilesFound(root);
  std::sort(found.begin(), found.end());

  Corpus corpus;
  std::vector<icfg::SourceFile> sources;
  for (const fs::path& p : found) {
    const std::string rel = p.lexically_relative(root).generic_string();
    try {
      icfg::SourceFile f = icfg::load_source_file(p, rel);
      icfg::validate_source(f);
      corpus.files.push_back({rel, f.language, fs::file_size(p), 0, 0});
      sources.push_back(std::move(f));
    } catch (const std::exception& ex) {
      corpus.diagnostics.push_back(rel + ": " + ex.what());
    }
  }
  if (sources.empty()) throw NoFilesFound(root);
  icfg::Extraction x = icfg::extract_source_icfg(std::move(sources));
  corpus.graphs = std::move(x.graphs);
  corpus.diagnostics.insert(corpus.diagnostics.end(), x.diagnostics.begin(), x.diagnostics.end());

  std::map<std::string, ManifestEntry*> by_path;
  for (ManifestEntry& m : corpus.files) by_path[m.path] = &m;
  for (const icfg::Icfg& g : corpus.graphs)
    for (const icfg::IcfgNode& n : g.nodes) {
      auto it = by_path.find(n.loc.file);
      if (it == by_path.end()) continue;
      ++it->second->node_count;
      if (n.kind == icfg::NodeKind::Entry) ++it->second->function_count;
    }
  return corpus;
}

std::string manifest_json(const Corpus& corpus) {
  nlohmann::json files = nlohmann::json::array();
  std::uintmax_t bytes = 0;
  long functions = 0, nodes = 0;
  for (const ManifestEntry& m : corpus.files) {
    files.push_back({{"path", m.path},
                     {"language", m.language == icfg::Language::C ? "c" : "java"},
                     {"bytes", m.bytes},
                     {"function_count", m.function_count},
                     {"node_count", m.node_count}});
    bytes += m.bytes;
    functions += m.function_count;
    nodes += m.node_count;
  }
  nlohmann::json j = {{"version", 1},
                      {"files", std::move(files)},
                      {"totals",
                       {{"files", corpus.files.size()},
                        {"bytes", bytes},
                        {"functions", functions},
                        {"nodes", nodes},
                        {"graphs", corpus.graphs.size()}}},
                      {"diagnostics", corpus.diagnostics}};
  return j.dump(1) + "\n";
}

std::vector<gae::GraphInput> graph_inputs(const std::vector<icfg::Icfg>& graphs,
                                          const Config& config) {
  const featenc::TextEncoder encoder = config.encoder();
  std::vector<gae::GraphInput> out;
  out.reserve(graphs.size());
  for (const icfg::Icfg& g : graphs)
    out.push_back(gae::graph_input(g, featenc::build_feature_matrix(g, encoder, config.features())));
  return out;
}

gae::TrainResult train_model(const std::vector<icfg::Icfg>& graphs, const Config& config) {
  gae::TrainResult r = gae::train(graph_inputs(graphs, config), config.train_config(), config.seed());
  r.model.config_hash = config.hash();
  return r;
}

search::VectorIndex build_index(const std::vector<icfg::Icfg>& graphs,
                                const gae::GaeModel& model, const Config& config) {
  if (model.config_hash != config.hash()) throw search::ConfigMismatch(config.hash(), model.config_hash);
  return search::build_index(graphs, model, config.encoder(), config.search_options());
}

plang::PProgram load_query(const fs::path& path, const Config& config) {
  const std::string text = read_file(path);
  if (path.extension() == ".p") return plang::parse_source(text);
  const auto classifier = pseudoconv::StatementClassifier::from_files(
      config.path("convert.comments"), config.path("convert.code"), config.propagation());
  return plang::parse_source(pseudoconv::convert(text, classifier));
}

std::string query_id(const fs::path& path) { return path.stem().string(); }

search::SearchResult run_query(const fs::path& query_path, const search::VectorIndex& index,
                               const std::vector<icfg::Icfg>& graphs,
                               const gae::GaeModel& model, const Config& config) {
  return search::search(load_query(query_path, config), query_id(query_path), index, graphs, model,
                        config.encoder(), config.search_options());
}

}  // namespace algoseek::pipeline
