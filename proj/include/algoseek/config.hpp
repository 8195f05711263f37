#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "algoseek/error.hpp"
#include "algoseek/featenc.hpp"
#include "algoseek/gae.hpp"
#include "algoseek/icfg.hpp"
#include "algoseek/pseudoconv.hpp"
#include "algoseek/search.hpp"

namespace algoseek {

// Every setting the tools understand, stored in canonical text form. Unknown
// keys and malformed values raise UsageError.
//
//   encoder.kind         builtin | sidecar
//   encoder.dim          text embedding width (builtin)
//   encoder.seed         hash salt (builtin)
//   encoder.sidecar_path JSONL vectors (sidecar)
//   gae.h gae.lr gae.batch gae.split gae.patience gae.max_epochs gae.seed
//   search.k             matches kept per query node
//   search.gap_lines     line gap bridged inside a fragment
//   features.text/math/graph  channel switches for ablations
//   convert.alpha convert.sigma convert.comments convert.code
//   languages            comma list from {c, java}
//   paths.corpus paths.store paths.manifest paths.model paths.index
class Config {
 public:
  Config();

  void set(std::string_view key, std::string_view value);
  const std::string& get(std::string_view key) const;
  static bool known(std::string_view key);

  // `key = value` lines, `#` comments. Relative path values resolve against
  // `base_dir`.
  void load_text(std::string_view text, const std::filesystem::path& base_dir);
  static Config from_file(const std::filesystem::path& path);

  // FNV-1a over every non-path setting; paths do not change results.
  std::string hash() const;
  std::string to_text() const;

  featenc::TextEncoder encoder() const;
  featenc::FeatureOptions features() const;
  gae::TrainConfig train_config() const;
  std::uint64_t seed() const;
  search::SearchOptions search_options() const;
  pseudoconv::PropagationConfig propagation() const;
  std::set<icfg::Language> languages() const;
  std::filesystem::path path(std::string_view key) const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace algoseek
