#include "algoseek/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "algoseek/hash.hpp"

#ifndef ALGOSEEK_DATA_DIR
#define ALGOSEEK_DATA_DIR "data"
#endif

namespace algoseek {

namespace {

enum class Type { Text, Int, Uint, Real, Bool, Path, Languages };

struct KeySpec {
  std::string_view key;
  Type type;
  std::string_view fallback;
};

constexpr KeySpec kKeys[] = {
    {"encoder.kind", Type::Text, "builtin"},
    {"encoder.dim", Type::Int, "128"},
    {"encoder.seed", Type::Uint, "42"},
    {"encoder.sidecar_path", Type::Path, ""},
    {"gae.h", Type::Int, "512"},
    {"gae.lr", Type::Real, "0.01"},
    {"gae.batch", Type::Int, "2048"},
    {"gae.split", Type::Real, "0.8"},
    {"gae.patience", Type::Int, "10"},
    {"gae.max_epochs", Type::Int, "200"},
    {"gae.seed", Type::Uint, "0"},
    {"search.k", Type::Int, "100"},
    {"search.gap_lines", Type::Int, "2"},
    {"features.text", Type::Bool, "true"},
    {"features.math", Type::Bool, "true"},
    {"features.graph", Type::Bool, "true"},
    {"convert.alpha", Type::Real, "0.99"},
    {"convert.sigma", Type::Real, "0.15"},
    {"convert.comments", Type::Path, ALGOSEEK_DATA_DIR "/seed/comments.txt"},
    {"convert.code", Type::Path, ALGOSEEK_DATA_DIR "/seed/code.txt"},
    {"languages", Type::Languages, "c,java"},
    {"paths.corpus", Type::Path, ""},
    {"paths.store", Type::Path, "graphs.json"},
    {"paths.manifest", Type::Path, "manifest.json"},
    {"paths.model", Type::Path, "model.json"},
    {"paths.index", Type::Path, "index.json"},
};

const KeySpec* spec_of(std::string_view key) {
  for (const KeySpec& s : kKeys)
    if (s.key == key) return &s;
  return nullptr;
}

std::string_view trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view why) {
  throw UsageError("config " + std::string(key) + " = '" + std::string(value) + "': " +
                   std::string(why));
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T v{};
  const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || p != value.data() + value.size()) bad(key, value, "not a number");
  return v;
}

std::string canonical(const KeySpec& spec, std::string_view value) {
  switch (spec.type) {
    case Type::Text:
      if (spec.key == "encoder.kind" && value != "builtin" && value != "sidecar")
        bad(spec.key, value, "expected builtin or sidecar");
      return std::string(value);
    case Type::Int: {
      const long v = parse_number<long>(spec.key, value);
      if (v < 0 || (v == 0 && spec.key != "search.gap_lines")) bad(spec.key, value, "must be positive");
      return std::to_string(v);
    }
    case Type::Uint:
      return std::to_string(parse_number<std::uint64_t>(spec.key, value));
    case Type::Real: {
      const double v = parse_number<double>(spec.key, value);
      char buf[32];
      const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
      return std::string(buf, end);
    }
    case Type::Bool:
      if (value == "true" || value == "1" || value == "yes" || value == "on") return "true";
      if (value == "false" || value == "0" || value == "no" || value == "off") return "false";
      bad(spec.key, value, "expected true or false");
    case Type::Path:
      return std::string(value);
    case Type::Languages: {
      std::set<std::string> langs;
      std::string_view rest = value;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view item = trim(rest.substr(0, comma));
        if (item != "c" && item != "java") bad(spec.key, value, "languages are c and java");
        langs.insert(std::string(item));
        rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
      }
      if (langs.empty()) bad(spec.key, value, "at least one language required");
      std::string out;
      for (const auto& l : langs) out += (out.empty() ? "" : ",") + l;
      return out;
    }
  }
  return std::string(value);
}

}  // namespace

Config::Config() {
  for (const KeySpec& s : kKeys) values_.emplace(std::string(s.key), canonical(s, s.fallback));
}

bool Config::known(std::string_view key) { return spec_of(key) != nullptr; }

void Config::set(std::string_view key, std::string_view value) {
  const KeySpec* spec = spec_of(key);
  if (spec == nullptr) throw UsageError("unknown config key '" + std::string(key) + "'");
  values_.find(key)->second = canonical(*spec, trim(value));
}

const std::string& Config::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key '" + std::string(key) + "'");
  return it->second;
}

void Config::load_text(std::string_view text, const std::filesystem::path& base_dir) {
  std::istringstream in{std::string(text)};
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    std::string_view s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw UsageError("config line " + std::to_string(row) + ": expected key = value");
    const std::string_view key = trim(s.substr(0, eq));
    std::string_view value = trim(s.substr(eq + 1));
    const KeySpec* spec = spec_of(key);
    if (spec == nullptr)
      throw UsageError("config line " + std::to_string(row) + ": unknown key '" + std::string(key) + "'");
    if (spec->type == Type::Path && !value.empty() && std::filesystem::path(value).is_relative()) {
      set(key, (base_dir / std::filesystem::path(value)).lexically_normal().string());
    } else {
      set(key, value);
    }
  }
}

Config Config::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Config c;
  c.load_text(ss.str(), path.parent_path());
  return c;
}

std::string Config::hash() const {
  std::uint64_t h = kFnvOffset;
  for (const KeySpec& s : kKeys) {
    if (s.type == Type::Path) continue;
    h = fnv1a(s.key, h);
    h = fnv1a("=", h);
    h = fnv1a(get(s.key), h);
    h = fnv1a("\n", h);
  }
  return hex64(h);
}

std::string Config::to_text() const {
  std::string out;
  for (const KeySpec& s : kKeys) out += std::string(s.key) + " = " + get(s.key) + "\n";
  return out;
}

featenc::TextEncoder Config::encoder() const {
  if (get("encoder.kind") == "sidecar") {
    if (get("encoder.sidecar_path").empty())
      throw UsageError("encoder.kind = sidecar needs encoder.sidecar_path");
    return featenc::TextEncoder::sidecar(get("encoder.sidecar_path"));
  }
  return featenc::TextEncoder::builtin(std::stoi(get("encoder.dim")),
                                       std::stoull(get("encoder.seed")));
}

featenc::FeatureOptions Config::features() const {
  return {get("features.text") == "true", get("features.math") == "true"};
}

gae::TrainConfig Config::train_config() const {
  gae::TrainConfig t;
  t.h = std::stoi(get("gae.h"));
  t.learning_rate = std::stod(get("gae.lr"));
  t.batch_size = std::stoi(get("gae.batch"));
  t.split_ratio = std::stod(get("gae.split"));
  t.patience = std::stoi(get("gae.patience"));
  t.max_epochs = std::stoi(get("gae.max_epochs"));
  t.validate();
  return t;
}

std::uint64_t Config::seed() const { return std::stoull(get("gae.seed")); }

search::SearchOptions Config::search_options() const {
  search::SearchOptions o;
  o.k = std::stoul(get("search.k"));
  o.gap_lines = std::stoi(get("search.gap_lines"));
  o.features = features();
  o.use_graph = get("features.graph") == "true";
  return o;
}

pseudoconv::PropagationConfig Config::propagation() const {
  pseudoconv::PropagationConfig p = pseudoconv::kClassifierDefaults;
  p.alpha = std::stod(get("convert.alpha"));
  p.sigma = std::stod(get("convert.sigma"));
  p.validate();
  return p;
}

std::set<icfg::Language> Config::languages() const {
  std::set<icfg::Language> out;
  const std::string& v = get("languages");
  if (v.find("java") != std::string::npos) out.insert(icfg::Language::Java);
  if (v == "c" || v.starts_with("c,")) out.insert(icfg::Language::C);
  return out;
}

std::filesystem::path Config::path(std::string_view key) const {
  if (!key.starts_with("paths.") && spec_of(key) != nullptr && spec_of(key)->type != Type::Path)
    throw UsageError(std::string(key) + " is not a path setting");
  return get(key);
}

}  // namespace algoseek
