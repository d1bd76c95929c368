#pragma once

// UMass topic coherence over document co-occurrence, and the hyperparameter
// grid search that ranks LDA configurations by it.
//
//   coherence(V) = sum over ranked pairs (v_i, v_j), i < j, of
//                  log((D(v_i, v_j) + eps) / D(v_j))
//
// D(x) counts validation documents containing x, D(x, y) those containing
// both. PairConvention::umass divides by D(v_i) instead (the higher-ranked
// word), the formulation most toolkits use.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "opinion_miner/common.hpp"
#include "opinion_miner/lda.hpp"
#include "opinion_miner/rng.hpp"

namespace opminer::coherence {

using text::Document;

// Which word of a ranked pair conditions the score: lower_rank divides by
// D(lower-ranked word), umass by D(higher-ranked word).
enum class PairConvention { lower_rank, umass };

inline PairConvention parse_convention(std::string_view s) {
  if (s == "lower_rank") return PairConvention::lower_rank;
  if (s == "umass") return PairConvention::umass;
  throw UsageError("unknown pair convention '" + std::string(s) + "' (expected lower_rank|umass)");
}

inline std::string to_string(PairConvention c) { return c == PairConvention::lower_rank ? "lower_rank" : "umass"; }

class CooccurrenceCounts {
 public:
  std::size_t total_docs = 0;

  int doc_count(int x) const {
    auto it = single_.find(x);
    return it == single_.end() ? 0 : it->second;
  }

  /// Symmetric; pair_count(x, x) == doc_count(x).
  int pair_count(int x, int y) const {
    if (x == y) return doc_count(x);
    auto it = pair_.find(key(x, y));
    return it == pair_.end() ? 0 : it->second;
  }

  void add_document(std::span<const int> present) {
    ++total_docs;
    for (std::size_t a = 0; a < present.size(); ++a) {
      ++single_[present[a]];
      for (std::size_t b = a + 1; b < present.size(); ++b) ++pair_[key(present[a], present[b])];
    }
  }

  std::size_t num_pairs() const { return pair_.size(); }

 private:
  static std::uint64_t key(int x, int y) {
    if (x > y) std::swap(x, y);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) | static_cast<std::uint32_t>(y);
  }

  std::unordered_map<int, int> single_;
  std::unordered_map<std::uint64_t, int> pair_;
};

/// Document-presence counts restricted to `tokens_of_interest`.
inline CooccurrenceCounts count_cooccurrence(std::span<const Document> docs, std::span<const int> tokens_of_interest) {
  if (docs.empty()) throw std::invalid_argument("count_cooccurrence: no validation documents");
  const std::unordered_set<int> interest(tokens_of_interest.begin(), tokens_of_interest.end());
  CooccurrenceCounts counts;
  std::vector<int> present;
  for (const auto& doc : docs) {
    present.clear();
    for (int w : doc.tokens)
      if (interest.count(w)) present.push_back(w);
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());
    counts.add_document(present);
  }
  return counts;
}

/// log((D(v_i, v_j) + eps) / D(v_j)); nullopt when D(v_j) = 0.
inline std::optional<double> score_pair(int v_i, int v_j, double epsilon, const CooccurrenceCounts& counts) {
  const int denom = counts.doc_count(v_j);
  if (denom == 0) return std::nullopt;
  return std::log((counts.pair_count(v_i, v_j) + epsilon) / denom);
}

struct CoherenceValue {
  double value = 0.0;
  std::size_t excluded_words = 0;  // words with D = 0, left out of every pair
  std::size_t scored_pairs = 0;
};

/// Sum over ranked pairs i < j of the top-word list. Words absent from the
/// validation documents are excluded and counted.
inline CoherenceValue topic_coherence(std::span<const int> ranked_words, double epsilon,
                                      const CooccurrenceCounts& counts,
                                      PairConvention convention = PairConvention::lower_rank) {
  if (ranked_words.empty()) throw std::invalid_argument("topic_coherence: empty word list");
  CoherenceValue out;
  std::vector<int> words;
  for (int w : ranked_words) {
    if (counts.doc_count(w) == 0)
      ++out.excluded_words;
    else
      words.push_back(w);
  }
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (std::size_t j = i + 1; j < words.size(); ++j) {
      auto s = convention == PairConvention::lower_rank ? score_pair(words[i], words[j], epsilon, counts)
                                                   : score_pair(words[j], words[i], epsilon, counts);
      out.value += *s;
      ++out.scored_pairs;
    }
  }
  return out;
}

struct CoherenceConfig {
  std::size_t top_n = 10;
  double epsilon = 1e-12;
  PairConvention convention = PairConvention::lower_rank;
};

struct CoherenceReport {
  std::vector<std::pair<int, double>> per_topic;
  double mean_coherence = 0.0;
  CoherenceConfig config;
  std::size_t validation_docs = 0;
  std::size_t excluded_words = 0;
};

inline CoherenceReport model_coherence(const lda::LdaModel& model, std::span<const Document> validation_docs,
                                       const CoherenceConfig& config = {}) {
  std::vector<std::vector<int>> top(static_cast<std::size_t>(model.num_topics));
  std::vector<int> interest;
  for (int k = 0; k < model.num_topics; ++k) {
    for (const auto& rw : lda::topic_top_words(model, k, config.top_n).top_words) {
      top[k].push_back(rw.id);
      interest.push_back(rw.id);
    }
  }
  const auto counts = count_cooccurrence(validation_docs, interest);
  CoherenceReport report;
  report.config = config;
  report.validation_docs = validation_docs.size();
  double sum = 0.0;
  for (int k = 0; k < model.num_topics; ++k) {
    const auto c = topic_coherence(top[k], config.epsilon, counts, config.convention);
    report.per_topic.emplace_back(k, c.value);
    report.excluded_words += c.excluded_words;
    sum += c.value;
  }
  report.mean_coherence = sum / model.num_topics;
  return report;
}

/// CSV `topic,coherence`.
inline void write_coherence_csv(std::ostream& out, const CoherenceReport& report) {
  write_csv_row(out, {"topic", "coherence"});
  for (const auto& [k, v] : report.per_topic) write_csv_row(out, {std::to_string(k), format_double(v)});
}

// ---------------------------------------------------------------------------
// Grid search

enum class SearchStrategy { full, staged };

inline SearchStrategy parse_strategy(std::string_view s) {
  if (s == "full") return SearchStrategy::full;
  if (s == "staged") return SearchStrategy::staged;
  throw UsageError("unknown search strategy '" + std::string(s) + "' (expected full|staged)");
}

struct GridCell {
  int num_topics;
  lda::AlphaSpec alpha;
  double eta;
  bool operator==(const GridCell&) const = default;
};

struct GridRow {
  GridCell cell;
  double mean_coherence;
};

struct GridSearchOptions {
  std::vector<int> k_values;
  std::vector<lda::AlphaSpec> alpha_grid;
  std::vector<double> eta_grid;
  SearchStrategy strategy = SearchStrategy::staged;
  double validation_fraction = 0.2;
  int sweeps = 500;
  std::uint64_t seed = 0;
  CoherenceConfig coherence;
  // Reference configuration for the improvement figure; its alpha and eta
  // are also the values held fixed while K is swept in the staged strategy.
  GridCell baseline{10, lda::AlphaSpec::symmetric(0.01), 0.1};
};

struct GridSearchResult {
  std::vector<GridRow> table;
  std::size_t best = 0;
  double baseline_coherence = 0.0;
  std::optional<double> improvement_vs_baseline;  // (best - baseline) / |baseline|
  std::size_t train_docs = 0;
  std::size_t validation_docs = 0;

  const GridRow& best_row() const { return table.at(best); }
};

/// Seed used to train one grid configuration; depends only on the search
/// seed and the configuration, never on evaluation order.
inline std::uint64_t cell_seed(std::uint64_t seed, const GridCell& cell) {
  std::uint64_t h = fnv1a("grid-cell");
  h = fnv1a(std::to_string(cell.num_topics), h);
  h = fnv1a("|" + cell.alpha.to_string() + "|" + format_double(cell.eta), h);
  return derive_seed(seed, h);
}

struct ValidationSplit {
  std::vector<Document> train;
  std::vector<Document> validation;
};

/// Seeded shuffle; the first round(fraction * n) shuffled documents form the
/// validation set. Both parts keep corpus order.
inline ValidationSplit split_validation(std::span<const Document> corpus, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("validation_fraction must be in (0, 1)");
  std::vector<std::size_t> idx(corpus.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(derive_seed(seed, fnv1a("validation-split")));
  rng.shuffle(idx.begin(), idx.end());
  const auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(corpus.size())));
  if (n_val == 0 || n_val >= corpus.size())
    throw std::invalid_argument("degenerate validation split (" + std::to_string(n_val) + " of " +
                                std::to_string(corpus.size()) + " documents)");
  std::vector<char> is_val(corpus.size(), 0);
  for (std::size_t i = 0; i < n_val; ++i) is_val[idx[i]] = 1;
  ValidationSplit split;
  for (std::size_t i = 0; i < corpus.size(); ++i) (is_val[i] ? split.validation : split.train).push_back(corpus[i]);
  return split;
}

/// Trains one configuration on `train` and scores it on `validation`.
inline double evaluate_cell(std::span<const Document> train, std::span<const Document> validation, int vocab_size,
                            const GridCell& cell, int sweeps, std::uint64_t seed, const CoherenceConfig& coh) {
  auto model = lda::init_model(train, vocab_size, {cell.num_topics, cell.alpha, cell.eta, cell_seed(seed, cell)});
  lda::train(model, train, {sweeps, 0});
  return model_coherence(model, validation, coh).mean_coherence;
}

/// Empty documents are dropped before splitting.
inline GridSearchResult grid_search(std::span<const Document> corpus, int vocab_size, const GridSearchOptions& opts) {
  if (opts.k_values.empty() || opts.alpha_grid.empty() || opts.eta_grid.empty())
    throw std::invalid_argument("grid_search: every grid must be nonempty");
  std::vector<Document> docs;
  for (const auto& d : corpus)
    if (!d.empty()) docs.push_back(d);
  const auto split = split_validation(docs, opts.validation_fraction, opts.seed);

  std::vector<int> ks = opts.k_values;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  std::vector<GridRow> evaluated;  // every configuration trained so far, in scan order
  auto lookup = [&](const GridCell& c) -> std::optional<double> {
    for (const auto& r : evaluated)
      if (r.cell == c) return r.mean_coherence;
    return std::nullopt;
  };
  // Evaluates the cells not yet seen, in parallel, and appends them in order.
  auto run = [&](const std::vector<GridCell>& cells) {
    std::vector<GridCell> todo;
    for (const auto& c : cells)
      if (!lookup(c) && std::find(todo.begin(), todo.end(), c) == todo.end()) todo.push_back(c);
    std::vector<double> scores(todo.size());
    parallel_for(todo.size(), [&](std::size_t i) {
      scores[i] = evaluate_cell(split.train, split.validation, vocab_size, todo[i], opts.sweeps, opts.seed,
                                opts.coherence);
    });
    for (std::size_t i = 0; i < todo.size(); ++i) evaluated.push_back({todo[i], scores[i]});
  };

  GridSearchResult result;
  result.train_docs = split.train.size();
  result.validation_docs = split.validation.size();
  auto append_rows = [&](const std::vector<GridCell>& cells) {
    for (const auto& c : cells) {
      bool present = false;
      for (const auto& r : result.table) present = present || r.cell == c;
      if (!present) result.table.push_back({c, *lookup(c)});
    }
  };

  if (opts.strategy == SearchStrategy::full) {
    std::vector<GridCell> cells;
    for (int k : ks)
      for (const auto& a : opts.alpha_grid)
        for (double e : opts.eta_grid) cells.push_back({k, a, e});
    auto with_baseline = cells;
    with_baseline.push_back(opts.baseline);
    run(with_baseline);
    append_rows(cells);
  } else {
    std::vector<GridCell> stage_k;
    for (int k : ks) stage_k.push_back({k, opts.baseline.alpha, opts.baseline.eta});
    auto with_baseline = stage_k;
    with_baseline.push_back(opts.baseline);
    run(with_baseline);
    append_rows(stage_k);
    std::size_t best_k = 0;
    for (std::size_t i = 1; i < stage_k.size(); ++i)
      if (result.table[i].mean_coherence > result.table[best_k].mean_coherence) best_k = i;
    std::vector<GridCell> stage_prior;
    for (const auto& a : opts.alpha_grid)
      for (double e : opts.eta_grid) stage_prior.push_back({stage_k[best_k].num_topics, a, e});
    run(stage_prior);
    append_rows(stage_prior);
  }

  for (std::size_t i = 1; i < result.table.size(); ++i)
    if (result.table[i].mean_coherence > result.table[result.best].mean_coherence) result.best = i;
  result.baseline_coherence = *lookup(opts.baseline);
  if (result.baseline_coherence != 0.0)
    result.improvement_vs_baseline =
        (result.best_row().mean_coherence - result.baseline_coherence) / std::fabs(result.baseline_coherence);
  return result;
}

/// CSV `K,alpha,eta,mean_coherence` in scan order.
inline void write_grid_csv(std::ostream& out, const GridSearchResult& result) {
  write_csv_row(out, {"K", "alpha", "eta", "mean_coherence"});
  for (const auto& r : result.table)
    write_csv_row(out, {std::to_string(r.cell.num_topics), r.cell.alpha.to_string(), format_double(r.cell.eta),
                        format_double(r.mean_coherence)});
}

}  // namespace opminer::coherence
