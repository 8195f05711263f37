// algoseek: pseudo code in, ranked source fragments out.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "algoseek/config.hpp"
#include "algoseek/evalkit.hpp"
#include "algoseek/pipeline.hpp"
#include "algoseek/pseudoconv.hpp"

namespace fs = std::filesystem;
using namespace algoseek;

namespace {

constexpr int kUsageExit = 2;
constexpr int kDataExit = 3;

struct Globals {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

Config load_config(const Globals& g) {
  Config c;
  std::string path = g.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("ALGOSEEK_CONFIG")) path = env;
  }
  if (!path.empty()) c = Config::from_file(path);
  for (const std::string& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) c.set("gae.seed", std::to_string(*g.seed));
  return c;
}

fs::path pick(const std::string& flag, const Config& c, std::string_view key) {
  if (!flag.empty()) return flag;
  const fs::path p = c.path(key);
  if (p.empty()) throw UsageError("no " + std::string(key) + " given (flag or config)");
  return p;
}

std::string spans_text(const search::CandidateGroup& g) {
  std::string out;
  for (const search::Span& s : g.fragments) {
    if (!out.empty()) out += ", ";
    out += s.file + ":" + std::to_string(s.line_start) + "-" + std::to_string(s.line_end);
  }
  return out;
}

void print_results(const search::SearchResult& r, std::size_t top) {
  for (std::size_t i = 0; i < r.groups.size() && i < top; ++i) {
    std::ostringstream line;
    line << std::setw(4) << i + 1 << "  " << std::fixed << std::setprecision(4) << r.groups[i].gamma
         << "  " << spans_text(r.groups[i]);
    std::cout << line.str() << "\n";
  }
}

std::vector<fs::path> expand_queries(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const std::string& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(in))
        if (e.is_regular_file()) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else {
      out.emplace_back(in);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"algoseek: search source code with pseudo code"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "key = value config file (default: $ALGOSEEK_CONFIG)");
  app.add_option("--set", g.overrides, "override a config key, key=value");
  app.add_option("--seed", g.seed, "training seed (overrides gae.seed)");

  std::string corpus, store, manifest, model_path, index_path;
  auto* ingest = app.add_subcommand("ingest", "extract ICFGs from a source tree");
  ingest->add_option("corpus", corpus, "corpus root (default paths.corpus)");
  ingest->add_option("--store", store, "graph store output");
  ingest->add_option("--manifest", manifest, "manifest output");

  std::string convert_in, convert_out;
  auto* convert = app.add_subcommand("convert", "rewrite pseudo code as p-code");
  convert->add_option("input", convert_in, "pseudo-code text file")->required();
  convert->add_option("-o,--output", convert_out, "write here instead of stdout");

  std::string parse_in, parse_icfg;
  auto* parse = app.add_subcommand("parse", "parse p-code and print it normalized");
  parse->add_option("input", parse_in, "p-code file")->required();
  parse->add_option("--icfg", parse_icfg, "also write the query ICFG as JSON");

  auto* train = app.add_subcommand("train", "train the graph autoencoder");
  train->add_option("--store", store, "graph store");
  train->add_option("--model", model_path, "model output");

  auto* index = app.add_subcommand("index", "embed the corpus into a vector index");
  index->add_option("--store", store, "graph store");
  index->add_option("--model", model_path, "trained model");
  index->add_option("--index", index_path, "index output");

  std::string query, json_out;
  std::size_t top = 25;
  auto* search = app.add_subcommand("search", "rank source fragments for one query");
  search->add_option("--query", query, "query: .p p-code or pseudo-code text")->required();
  search->add_option("--top", top, "fragments to print")->check(CLI::PositiveNumber);
  search->add_option("--json", json_out, "write the full result as JSON");
  search->add_option("--store", store, "graph store");
  search->add_option("--model", model_path, "trained model");
  search->add_option("--index", index_path, "vector index");

  std::string truth;
  std::vector<std::string> queries;
  int cutoff = evalkit::kDefaultCutoff;
  auto* eval = app.add_subcommand("eval", "F-rank and MRR against ground truth");
  eval->add_option("--truth", truth, "ground-truth TSV")->required();
  eval->add_option("--queries", queries, "query files or directories")->required();
  eval->add_option("--cutoff", cutoff, "rank cutoff")->check(CLI::PositiveNumber);
  eval->add_option("--json", json_out, "write the report as JSON");
  eval->add_option("--store", store, "graph store");
  eval->add_option("--model", model_path, "trained model");
  eval->add_option("--index", index_path, "vector index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageExit;
  }

  try {
    const Config config = load_config(g);

    if (*ingest) {
      const fs::path root = pick(corpus, config, "paths.corpus");
      const pipeline::Corpus c = pipeline::ingest(root, config);
      icfg::write_icfg_json(c.graphs, pick(store, config, "paths.store"));
      pipeline::write_file(pick(manifest, config, "paths.manifest"), pipeline::manifest_json(c));
      std::size_t nodes = 0;
      for (const auto& gr : c.graphs) nodes += gr.size();
      std::cout << c.files.size() << " files, " << c.graphs.size() << " graphs, " << nodes
                << " nodes\n";
      for (const std::string& d : c.diagnostics) std::cerr << "skipped " << d << "\n";
    } else if (*convert) {
      const auto classifier = pseudoconv::StatementClassifier::from_files(
          config.path("convert.comments"), config.path("convert.code"), config.propagation());
      const std::string out = pseudoconv::convert(pipeline::read_file(convert_in), classifier);
      if (convert_out.empty()) std::cout << out;
      else pipeline::write_file(convert_out, out);
    } else if (*parse) {
      const plang::PProgram p = plang::parse_source(pipeline::read_file(parse_in));
      std::cout << plang::pretty_print(p);
      if (!parse_icfg.empty()) {
        const std::vector<icfg::Icfg> graphs = {
            icfg::build_pcode_icfg(p, pipeline::query_id(parse_in), parse_in)};
        icfg::write_icfg_json(graphs, parse_icfg);
      }
    } else if (*train) {
      const auto graphs = icfg::read_icfg_json(pick(store, config, "paths.store"));
      const gae::TrainResult r = pipeline::train_model(graphs, config);
      gae::write_model(r.model, pick(model_path, config, "paths.model"));
      for (const auto& e : r.history)
        std::cout << "epoch " << e.epoch << "  loss " << e.loss << "  val_auc " << e.auc << "\n";
      std::cout << "best epoch " << r.best_epoch << ", config " << config.hash() << "\n";
    } else if (*index) {
      const auto graphs = icfg::read_icfg_json(pick(store, config, "paths.store"));
      const gae::GaeModel m = gae::read_model(pick(model_path, config, "paths.model"));
      const search::VectorIndex vi = pipeline::build_index(graphs, m, config);
      search::write_index(vi, pick(index_path, config, "paths.index"));
      std::cout << vi.size() << " entries, dim " << vi.dim() << "\n";
    } else {
      const fs::path ip = pick(index_path, config, "paths.index");
      if (!fs::exists(ip)) throw Error("no index at " + ip.string() + "; run `algoseek index` first");
      const search::VectorIndex vi = search::read_index(ip);
      const gae::GaeModel m = gae::read_model(pick(model_path, config, "paths.model"));
      if (vi.config_hash() != m.config_hash) throw search::ConfigMismatch(vi.config_hash(), m.config_hash);
      const auto graphs = icfg::read_icfg_json(pick(store, config, "paths.store"));

      if (*search) {
        const search::SearchResult r = pipeline::run_query(query, vi, graphs, m, config);
        print_results(r, top);
        if (!json_out.empty()) pipeline::write_file(json_out, search::to_json(r));
      } else {
        const auto gt = evalkit::resolve_functions(evalkit::read_truth(truth), graphs);
        std::map<std::string, search::SearchResult> results;
        for (const fs::path& q : expand_queries(queries))
          results[pipeline::query_id(q)] = pipeline::run_query(q, vi, graphs, m, config);
        const evalkit::MetricReport report = evalkit::evaluate(gt, results, cutoff);
        std::cout << evalkit::to_table(report);
        if (!json_out.empty()) pipeline::write_file(json_out, evalkit::to_json(report));
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataExit;
  }
  return 0;
}
