#pragma once

// Pipeline configuration: an INI/TOML-subset file of `[section]` tables and
// `key = value` lines, overridable per key from the command line.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opinion_miner/analytics.hpp"
#include "opinion_miner/coherence.hpp"
#include "opinion_miner/common.hpp"
#include "opinion_miner/lda.hpp"
#include "opinion_miner/lstm.hpp"

namespace opminer::app {

namespace fs = std::filesystem;

/// Every recognised key with its default. An empty default means "unset".
inline const std::map<std::string, std::string>& config_defaults() {
  static const std::map<std::string, std::string> d = {
      {"input.corpus", ""},
      {"input.keywords", ""},
      {"input.include", ""},
      {"input.exclude", ""},
      {"input.labeled", ""},
      {"input.strict", "false"},
      {"filter.include_stage", "true"},
      {"text.stopwords", ""},
      {"text.min_df", "2"},
      {"text.max_features", "0"},
      {"lda.k", "10"},
      {"lda.alpha", "0.01"},
      {"lda.eta", "0.1"},
      {"lda.sweeps", "500"},
      {"lda.tune", "false"},
      {"lda.k_grid", "2,3,4,5,6,7,8,9,10,11,12"},
      {"lda.alpha_grid", "0.01,0.31,0.61,0.91,asymmetric"},
      {"lda.eta_grid", "0.01,0.31,0.61,0.91"},
      {"lda.strategy", "staged"},
      {"coherence.top_n", "10"},
      {"coherence.epsilon", "1e-12"},
      {"coherence.validation_fraction", "0.2"},
      {"coherence.convention", "lower_rank"},
      {"lstm.embed_dim", "128"},
      {"lstm.hidden_dim", "196"},
      {"lstm.learning_rate", "0.05"},
      {"lstm.batch_size", "32"},
      {"lstm.epochs", "7"},
      {"lstm.max_features", "2000"},
      {"lstm.train_fraction", "0.6666666666666666"},
      {"analytics.top_k", "10"},
      {"analytics.n_classes", "5"},
      {"analytics.share_mode", "per_year_sum"},
      {"run.seed", ""},
      {"output.dir", ""},
  };
  return d;
}

/// Raw key/value settings after defaults, file and overrides are merged.
struct Settings {
  std::map<std::string, std::string> values;
  fs::path base_dir = ".";  // relative paths resolve against the config file

  const std::string& get(const std::string& key) const { return values.at(key); }

  void set(const std::string& key, std::string value) {
    if (!config_defaults().count(key)) throw UsageError("unknown config key '" + key + "'");
    values[key] = std::move(value);
  }
};

inline std::string unquote(std::string_view v) {
  v = trim(v);
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) v = v.substr(1, v.size() - 2);
  return std::string(v);
}

/// Comma separated, optionally wrapped in [ ] with quoted items.
inline std::vector<std::string> parse_list(std::string_view v) {
  v = trim(v);
  if (v.size() >= 2 && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
  std::vector<std::string> out;
  for (const auto& item : split(v, ',')) {
    auto s = unquote(item);
    if (!s.empty()) out.push_back(s);
  }
  return out;
}

inline Settings default_settings() {
  Settings s;
  s.values = config_defaults();
  return s;
}

inline Settings load_settings(const std::string& path) {
  if (!fs::is_regular_file(path)) throw UsageError("config file '" + path + "' does not exist");
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw UsageError("bad config: " + std::string(e.what()));
  }
  auto s = default_settings();
  s.base_dir = fs::path(path).parent_path();
  if (s.base_dir.empty()) s.base_dir = ".";
  for (const auto& [section, table] : tree) {
    if (table.empty()) throw UsageError("bad config: key '" + section + "' outside a [section]");
    for (const auto& [key, node] : table) s.set(section + "." + key, unquote(node.data()));
  }
  return s;
}

/// `section.key=value`.
inline void apply_override(Settings& s, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw UsageError("override '" + std::string(assignment) + "' is not key=value");
  s.set(std::string(trim(assignment.substr(0, eq))), unquote(assignment.substr(eq + 1)));
}

/// Hash of the effective settings. Output location is excluded so the same
/// run written to two directories carries the same hash.
inline std::uint64_t settings_hash(const Settings& s) {
  std::uint64_t h = fnv1a("opinion-miner-config");
  for (const auto& [k, v] : s.values) {
    if (k == "output.dir") continue;
    h = fnv1a(k + "=" + v + "\n", h);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Typed view

struct PipelineConfig {
  std::string corpus, keywords, include, exclude, labeled, stopwords;
  bool strict = false;
  bool include_stage = true;
  int min_df = 2;
  std::optional<std::size_t> max_features;

  lda::LdaConfig lda;
  int sweeps = 500;
  bool tune = false;
  std::vector<int> k_grid;
  std::vector<lda::AlphaSpec> alpha_grid;
  std::vector<double> eta_grid;
  coherence::SearchStrategy strategy = coherence::SearchStrategy::staged;
  double validation_fraction = 0.2;
  coherence::CoherenceConfig coherence;

  lstm::LstmConfig lstm;
  double train_fraction = 2.0 / 3.0;

  std::size_t top_k = 10;
  int n_classes = 5;
  analytics::ShareMode share_mode = analytics::ShareMode::per_year_sum;

  std::optional<std::uint64_t> seed;
  std::string output_dir;
};

namespace detail {

inline bool parse_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError(key + ": expected true or false, got '" + std::string(v) + "'");
}

template <class F>
auto typed(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const UsageError& e) {
    throw UsageError(key + ": " + e.what());
  } catch (const std::exception& e) {
    throw UsageError(key + ": " + e.what());
  }
}

}  // namespace detail

inline analytics::ShareMode parse_share_mode(std::string_view s) {
  if (s == "per_year_sum") return analytics::ShareMode::per_year_sum;
  if (s == "global") return analytics::ShareMode::global;
  throw UsageError("unknown share mode '" + std::string(s) + "' (expected per_year_sum|global)");
}

/// Validates every value and resolves paths. Throws UsageError.
inline PipelineConfig to_config(const Settings& s) {
  PipelineConfig c;
  auto path = [&](const std::string& key, bool required) {
    const auto& v = s.get(key);
    if (v.empty()) {
      if (required) throw UsageError("config: " + key + " is required");
      return std::string();
    }
    fs::path p(v);
    if (p.is_relative()) p = s.base_dir / p;
    if (!fs::is_regular_file(p)) throw UsageError("config: " + key + " '" + p.string() + "' does not exist");
    return p.string();
  };
  auto integer = [&](const std::string& key, long long lo) {
    return detail::typed(key, [&] {
      auto v = parse_int(s.get(key));
      if (v < lo) throw UsageError("must be >= " + std::to_string(lo));
      return v;
    });
  };
  auto real = [&](const std::string& key) { return detail::typed(key, [&] { return parse_double(s.get(key)); }); };
  auto boolean = [&](const std::string& key) { return detail::parse_bool(key, s.get(key)); };

  c.corpus = path("input.corpus", true);
  c.keywords = path("input.keywords", true);
  c.include = path("input.include", true);
  c.exclude = path("input.exclude", false);
  c.labeled = path("input.labeled", false);
  c.stopwords = path("text.stopwords", false);
  c.strict = boolean("input.strict");
  c.include_stage = boolean("filter.include_stage");
  c.min_df = static_cast<int>(integer("text.min_df", 1));
  if (auto mf = integer("text.max_features", 0); mf > 0) c.max_features = static_cast<std::size_t>(mf);

  c.lda.num_topics = static_cast<int>(integer("lda.k", 1));
  c.lda.alpha = detail::typed("lda.alpha", [&] { return lda::AlphaSpec::parse(s.get("lda.alpha")); });
  c.lda.eta = real("lda.eta");
  if (!(c.lda.eta > 0.0)) throw UsageError("lda.eta: must be positive");
  c.sweeps = static_cast<int>(integer("lda.sweeps", 1));
  c.tune = boolean("lda.tune");
  for (const auto& k : parse_list(s.get("lda.k_grid")))
    c.k_grid.push_back(static_cast<int>(detail::typed("lda.k_grid", [&] { return parse_int(k); })));
  for (const auto& a : parse_list(s.get("lda.alpha_grid")))
    c.alpha_grid.push_back(detail::typed("lda.alpha_grid", [&] { return lda::AlphaSpec::parse(a); }));
  for (const auto& e : parse_list(s.get("lda.eta_grid")))
    c.eta_grid.push_back(detail::typed("lda.eta_grid", [&] { return parse_double(e); }));
  c.strategy = detail::typed("lda.strategy", [&] { return coherence::parse_strategy(s.get("lda.strategy")); });
  if (c.tune && (c.k_grid.empty() || c.alpha_grid.empty() || c.eta_grid.empty()))
    throw UsageError("lda: tuning needs nonempty k_grid, alpha_grid and eta_grid");
  for (int k : c.k_grid)
    if (k < 1) throw UsageError("lda.k_grid: K must be >= 1");

  c.coherence.top_n = static_cast<std::size_t>(integer("coherence.top_n", 1));
  c.coherence.epsilon = real("coherence.epsilon");
  if (!(c.coherence.epsilon > 0.0)) throw UsageError("coherence.epsilon: must be positive");
  c.coherence.convention =
      detail::typed("coherence.convention", [&] { return coherence::parse_convention(s.get("coherence.convention")); });
  c.validation_fraction = real("coherence.validation_fraction");
  if (!(c.validation_fraction > 0.0 && c.validation_fraction < 1.0))
    throw UsageError("coherence.validation_fraction: must be in (0, 1)");

  c.lstm.embed_dim = static_cast<int>(integer("lstm.embed_dim", 1));
  c.lstm.hidden_dim = static_cast<int>(integer("lstm.hidden_dim", 1));
  c.lstm.learning_rate = real("lstm.learning_rate");
  c.lstm.batch_size = static_cast<int>(integer("lstm.batch_size", 1));
  c.lstm.epochs = static_cast<int>(integer("lstm.epochs", 1));
  c.lstm.max_features = static_cast<int>(integer("lstm.max_features", 1));
  c.train_fraction = real("lstm.train_fraction");
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) throw UsageError("lstm.train_fraction: must be in (0, 1)");

  c.top_k = static_cast<std::size_t>(integer("analytics.top_k", 1));
  c.n_classes = static_cast<int>(integer("analytics.n_classes", 1));
  c.share_mode = detail::typed("analytics.share_mode", [&] { return parse_share_mode(s.get("analytics.share_mode")); });

  if (!s.get("run.seed").empty())
    c.seed = static_cast<std::uint64_t>(integer("run.seed", 0));
  if (const auto& out = s.get("output.dir"); !out.empty()) {
    fs::path p(out);
    c.output_dir = (p.is_relative() ? s.base_dir / p : p).string();
  }
  c.lda.seed = c.seed.value_or(0);
  c.lstm.seed = c.seed.value_or(0);
  return c;
}

}  // namespace opminer::app
