#pragma once

/*
 * Latent Dirichlet Allocation by collapsed Gibbs sampling.
 *
 *   k < K   topics,  w < V   word ids,  d < D   documents
 *
 *   n_dk[d][k]  tokens of document d assigned to topic k
 *   n_kw[k][w]  tokens of word w assigned to topic k
 *   n_k[k]      tokens assigned to topic k
 *   z[d][i]     topic of position i of document d
 *
 * Each sweep visits every position in document order and draws
 *
 *   p(z = k | rest) ∝ (n_dk⁻ + alpha_k) (n_kw⁻ + eta) / (n_k⁻ + V eta)
 *
 * where ⁻ marks counts with the current position removed. Estimates are
 * taken from the final sample:
 *
 *   phi[k][w]   = (n_kw + eta) / (n_k + V eta)
 *   theta[d][k] = (n_dk + alpha_k) / (len(d) + sum(alpha))
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "opinion_miner/common.hpp"
#include "opinion_miner/rng.hpp"
#include "opinion_miner/textproc.hpp"

namespace opminer::lda {

using text::Document;

struct AlphaSpec {
  enum class Kind { symmetric, asymmetric };
  Kind kind = Kind::symmetric;
  double value = 0.01;  // symmetric only

  static AlphaSpec symmetric(double v) { return {Kind::symmetric, v}; }
  static AlphaSpec asymmetric() { return {Kind::asymmetric, 0.0}; }

  /// "asymmetric" or a positive number.
  static AlphaSpec parse(std::string_view s) {
    s = trim(s);
    if (s == "asymmetric") return asymmetric();
    double v = parse_double(s);
    if (!(v > 0.0)) throw UsageError("alpha must be positive or 'asymmetric'");
    return symmetric(v);
  }

  std::string to_string() const { return kind == Kind::asymmetric ? "asymmetric" : format_double(value); }

  bool operator==(const AlphaSpec&) const = default;
};

/// Symmetric: [v]*K. Asymmetric: alpha_k = 1 / (k + sqrt(K)), unnormalized.
inline std::vector<double> materialize_alpha(const AlphaSpec& spec, int num_topics) {
  std::vector<double> alpha(static_cast<std::size_t>(num_topics));
  const double root = std::sqrt(static_cast<double>(num_topics));
  for (int k = 0; k < num_topics; ++k)
    alpha[k] = spec.kind == AlphaSpec::Kind::asymmetric ? 1.0 / (k + root) : spec.value;
  return alpha;
}

struct LdaConfig {
  int num_topics = 10;
  AlphaSpec alpha = AlphaSpec::symmetric(0.01);
  double eta = 0.1;
  std::uint64_t seed = 0;
};

struct LdaModel {
  static constexpr int kVersion = 1;

  int num_topics = 0;
  int vocab_size = 0;
  AlphaSpec alpha_spec;
  std::vector<double> alpha;
  double alpha_sum = 0.0;
  double eta = 0.0;
  std::uint64_t seed = 0;
  int sweeps_done = 0;

  std::vector<int> doc_topic;    // D x K
  std::vector<int> topic_word;   // K x V
  std::vector<int> topic_total;  // K
  std::vector<std::vector<int>> assignments;
  Rng rng;

  std::size_t num_docs() const { return assignments.size(); }
  bool has_training_state() const { return !assignments.empty(); }

  int& ndk(std::size_t d, int k) { return doc_topic[d * num_topics + k]; }
  int ndk(std::size_t d, int k) const { return doc_topic[d * num_topics + k]; }
  int& nkw(int k, int w) { return topic_word[static_cast<std::size_t>(k) * vocab_size + w]; }
  int nkw(int k, int w) const { return topic_word[static_cast<std::size_t>(k) * vocab_size + w]; }
  double beta_sum() const { return vocab_size * eta; }
};

namespace detail {

inline void check_corpus(std::span<const Document> corpus, int vocab_size) {
  if (corpus.empty()) throw std::invalid_argument("lda: corpus is empty");
  for (const auto& doc : corpus) {
    if (doc.tokens.empty()) throw std::invalid_argument("lda: corpus contains an empty document");
    for (int w : doc.tokens)
      if (w < 0 || w >= vocab_size) throw std::invalid_argument("lda: token id out of vocabulary range");
  }
}

inline void check_matches(const LdaModel& m, std::span<const Document> corpus) {
  if (corpus.size() != m.assignments.size()) throw std::invalid_argument("lda: corpus does not match model state");
  for (std::size_t d = 0; d < corpus.size(); ++d)
    if (corpus[d].tokens.size() != m.assignments[d].size())
      throw std::invalid_argument("lda: document length does not match model state");
}

}  // namespace detail

inline LdaModel init_model(std::span<const Document> corpus, int vocab_size, const LdaConfig& config) {
  if (config.num_topics < 1) throw std::invalid_argument("lda: K must be >= 1");
  if (!(config.eta > 0.0)) throw std::invalid_argument("lda: eta must be positive");
  if (vocab_size < 1) throw std::invalid_argument("lda: vocabulary is empty");
  detail::check_corpus(corpus, vocab_size);
  LdaModel m;
  m.num_topics = config.num_topics;
  m.vocab_size = vocab_size;
  m.alpha_spec = config.alpha;
  m.alpha = materialize_alpha(config.alpha, config.num_topics);
  m.alpha_sum = std::accumulate(m.alpha.begin(), m.alpha.end(), 0.0);
  for (double a : m.alpha)
    if (!(a > 0.0)) throw std::invalid_argument("lda: alpha must be positive");
  m.eta = config.eta;
  m.seed = config.seed;
  m.rng = Rng(config.seed);
  const auto K = static_cast<std::size_t>(m.num_topics);
  m.doc_topic.assign(corpus.size() * K, 0);
  m.topic_word.assign(K * static_cast<std::size_t>(vocab_size), 0);
  m.topic_total.assign(K, 0);
  m.assignments.resize(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    auto& z = m.assignments[d];
    z.resize(corpus[d].tokens.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      const int k = static_cast<int>(m.rng.uniform_index(K));
      z[i] = k;
      ++m.ndk(d, k);
      ++m.nkw(k, corpus[d].tokens[i]);
      ++m.topic_total[k];
    }
  }
  return m;
}

/// Checks the three count identities and the z range; returns a message on failure.
inline std::optional<std::string> check_invariants(const LdaModel& m, std::span<const Document> corpus) {
  if (corpus.size() != m.assignments.size()) return "corpus/state size mismatch";
  long long total = 0;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    long long row = 0;
    for (int k = 0; k < m.num_topics; ++k) row += m.ndk(d, k);
    if (row != static_cast<long long>(corpus[d].tokens.size())) return "sum_k n_dk != doc length at doc " + std::to_string(d);
    for (int z : m.assignments[d])
      if (z < 0 || z >= m.num_topics) return "z out of range at doc " + std::to_string(d);
    total += row;
  }
  long long sum_nk = 0;
  for (int k = 0; k < m.num_topics; ++k) {
    long long row = 0;
    for (int w = 0; w < m.vocab_size; ++w) row += m.nkw(k, w);
    if (row != m.topic_total[k]) return "sum_w n_kw != n_k at topic " + std::to_string(k);
    sum_nk += m.topic_total[k];
  }
  if (sum_nk != total) return "sum_k n_k != total tokens";
  return std::nullopt;
}

/// Unnormalized conditional for position i of document d with that position's
/// own assignment excluded from the counts. Does not modify the model.
inline std::vector<double> conditional_weights(const LdaModel& m, std::span<const Document> corpus, std::size_t d,
                                               std::size_t i) {
  const int w = corpus[d].tokens[i];
  const int current = m.assignments[d][i];
  std::vector<double> p(static_cast<std::size_t>(m.num_topics));
  for (int k = 0; k < m.num_topics; ++k) {
    const int own = k == current ? 1 : 0;
    p[k] = (m.ndk(d, k) - own + m.alpha[k]) * (m.nkw(k, w) - own + m.eta) / (m.topic_total[k] - own + m.beta_sum());
  }
  return p;
}

struct SweepStats {
  std::size_t tokens = 0;
  std::size_t changed = 0;
};

inline SweepStats gibbs_sweep(LdaModel& m, std::span<const Document> corpus) {
  detail::check_matches(m, corpus);
  SweepStats stats;
  const double vbeta = m.beta_sum();
  std::vector<double> p(static_cast<std::size_t>(m.num_topics));
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto& tokens = corpus[d].tokens;
    auto& z = m.assignments[d];
    int* nd = &m.doc_topic[d * m.num_topics];
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const int w = tokens[i];
      const int old = z[i];
      --nd[old];
      --m.nkw(old, w);
      --m.topic_total[old];
      double total = 0.0;
      for (int k = 0; k < m.num_topics; ++k) {
        p[k] = (nd[k] + m.alpha[k]) * (m.nkw(k, w) + m.eta) / (m.topic_total[k] + vbeta);
        total += p[k];
      }
      const int k = static_cast<int>(m.rng.categorical(p, total));
      z[i] = k;
      ++nd[k];
      ++m.nkw(k, w);
      ++m.topic_total[k];
      ++stats.tokens;
      if (k != old) ++stats.changed;
    }
  }
  ++m.sweeps_done;
#ifndef NDEBUG
  if (auto err = check_invariants(m, corpus)) throw std::logic_error("lda count invariant violated: " + *err);
#endif
  return stats;
}

/// Collapsed joint log-likelihood log p(w, z) of the current sample.
inline double log_likelihood(const LdaModel& m) {
  const double V = m.vocab_size;
  double ll = m.num_topics * (std::lgamma(V * m.eta) - V * std::lgamma(m.eta));
  for (int k = 0; k < m.num_topics; ++k) {
    for (int w = 0; w < m.vocab_size; ++w) ll += std::lgamma(m.nkw(k, w) + m.eta);
    ll -= std::lgamma(m.topic_total[k] + V * m.eta);
  }
  double lgamma_alpha = 0.0;
  for (double a : m.alpha) lgamma_alpha += std::lgamma(a);
  for (std::size_t d = 0; d < m.num_docs(); ++d) {
    ll += std::lgamma(m.alpha_sum) - lgamma_alpha;
    for (int k = 0; k < m.num_topics; ++k) ll += std::lgamma(m.ndk(d, k) + m.alpha[k]);
    ll -= std::lgamma(static_cast<double>(m.assignments[d].size()) + m.alpha_sum);
  }
  return ll;
}

struct TrainOptions {
  int sweeps = 500;
  int burn_in = 0;  // reserved for sample averaging; estimates use the final sample
};

struct TrainLog {
  std::vector<double> log_likelihood;  // one entry per sweep
};

inline TrainLog train(LdaModel& m, std::span<const Document> corpus, const TrainOptions& opts = {}) {
  if (opts.sweeps < 1) throw std::invalid_argument("lda: sweeps must be >= 1");
  if (opts.burn_in < 0) throw std::invalid_argument("lda: burn_in must be >= 0");
  TrainLog log;
  log.log_likelihood.reserve(static_cast<std::size_t>(opts.sweeps));
  for (int s = 0; s < opts.sweeps; ++s) {
    gibbs_sweep(m, corpus);
    log.log_likelihood.push_back(log_likelihood(m));
  }
  return log;
}

using Matrix = std::vector<std::vector<double>>;

inline Matrix estimate_phi(const LdaModel& m) {
  Matrix phi(static_cast<std::size_t>(m.num_topics), std::vector<double>(static_cast<std::size_t>(m.vocab_size)));
  for (int k = 0; k < m.num_topics; ++k) {
    const double denom = m.topic_total[k] + m.beta_sum();
    for (int w = 0; w < m.vocab_size; ++w) phi[k][w] = (m.nkw(k, w) + m.eta) / denom;
  }
  return phi;
}

/// Smoothed topic mixture of training document d.
inline std::vector<double> doc_topics(const LdaModel& m, std::size_t d) {
  if (d >= m.num_docs()) throw std::out_of_range("lda: document index out of range");
  std::vector<double> theta(static_cast<std::size_t>(m.num_topics));
  const double denom = static_cast<double>(m.assignments[d].size()) + m.alpha_sum;
  for (int k = 0; k < m.num_topics; ++k) theta[k] = (m.ndk(d, k) + m.alpha[k]) / denom;
  return theta;
}

struct FoldInOptions {
  int sweeps = 20;
  std::optional<std::uint64_t> seed;  // default derives from the model seed and the document
};

struct TopicMixture {
  std::vector<double> theta;
  std::vector<int> assignments;
  bool from_prior = false;  // empty document: theta = alpha / sum(alpha)
};

/// Fold-in inference for a held-out document: Gibbs sweeps over the
/// document's own assignments with the topic-word counts frozen.
inline TopicMixture infer_doc_topics(const LdaModel& m, const Document& doc, const FoldInOptions& opts = {}) {
  TopicMixture out;
  const auto K = static_cast<std::size_t>(m.num_topics);
  out.theta.resize(K);
  if (doc.tokens.empty()) {
    for (std::size_t k = 0; k < K; ++k) out.theta[k] = m.alpha[k] / m.alpha_sum;
    out.from_prior = true;
    return out;
  }
  for (int w : doc.tokens)
    if (w < 0 || w >= m.vocab_size) throw std::invalid_argument("lda: token id out of vocabulary range");
  std::uint64_t seed = 0;
  if (opts.seed) {
    seed = *opts.seed;
  } else {
    std::uint64_t h = fnv1a("fold-in");
    for (int w : doc.tokens) h = fnv1a(std::string_view(reinterpret_cast<const char*>(&w), sizeof(w)), h);
    seed = derive_seed(m.seed, h);
  }
  Rng rng(seed);
  const double vbeta = m.beta_sum();
  // Word likelihood under the frozen topics, cached per position.
  std::vector<double> word_term(doc.tokens.size() * K);
  for (std::size_t i = 0; i < doc.tokens.size(); ++i)
    for (std::size_t k = 0; k < K; ++k)
      word_term[i * K + k] = (m.nkw(static_cast<int>(k), doc.tokens[i]) + m.eta) / (m.topic_total[k] + vbeta);
  std::vector<int> nd(K, 0);
  auto& z = out.assignments;
  z.resize(doc.tokens.size());
  for (auto& zi : z) {
    zi = static_cast<int>(rng.uniform_index(K));
    ++nd[zi];
  }
  std::vector<double> p(K);
  for (int s = 0; s < opts.sweeps; ++s) {
    for (std::size_t i = 0; i < z.size(); ++i) {
      --nd[z[i]];
      double total = 0.0;
      for (std::size_t k = 0; k < K; ++k) total += (p[k] = (nd[k] + m.alpha[k]) * word_term[i * K + k]);
      z[i] = static_cast<int>(rng.categorical(p, total));
      ++nd[z[i]];
    }
  }
  const double denom = static_cast<double>(z.size()) + m.alpha_sum;
  for (std::size_t k = 0; k < K; ++k) out.theta[k] = (nd[k] + m.alpha[k]) / denom;
  return out;
}

/// argmax, lowest index on ties.
inline int dominant_topic(std::span<const double> theta) {
  if (theta.empty()) throw std::invalid_argument("dominant_topic: empty distribution");
  int best = 0;
  for (std::size_t k = 1; k < theta.size(); ++k)
    if (theta[k] > theta[best]) best = static_cast<int>(k);
  return best;
}

struct RankedWord {
  int id;
  std::string token;
  double probability;
};

struct TopicSummary {
  int topic_id = 0;
  std::vector<RankedWord> top_words;
  std::string label;
};

/// The n highest-probability words of topic k, ties by lower word id.
inline TopicSummary topic_top_words(const LdaModel& m, int k, std::size_t n = 10,
                                    const text::Vocabulary* vocab = nullptr) {
  if (k < 0 || k >= m.num_topics) throw std::out_of_range("lda: topic index out of range");
  const double denom = m.topic_total[k] + m.beta_sum();
  std::vector<int> ids(static_cast<std::size_t>(m.vocab_size));
  std::iota(ids.begin(), ids.end(), 0);
  // Equal probability <=> equal count, so ranking by count is exact.
  auto better = [&](int a, int b) {
    if (m.nkw(k, a) != m.nkw(k, b)) return m.nkw(k, a) > m.nkw(k, b);
    return a < b;
  };
  n = std::min(n, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(), better);
  TopicSummary out;
  out.topic_id = k;
  for (std::size_t r = 0; r < n; ++r) {
    const int w = ids[r];
    out.top_words.push_back({w, vocab ? vocab->token(w) : std::to_string(w), (m.nkw(k, w) + m.eta) / denom});
  }
  return out;
}

/// CSV `topic,rank,token,probability`; rank starts at 1.
inline void write_topics_csv(std::ostream& out, std::span<const TopicSummary> topics) {
  write_csv_row(out, {"topic", "rank", "token", "probability"});
  for (const auto& t : topics)
    for (std::size_t r = 0; r < t.top_words.size(); ++r)
      write_csv_row(out, {std::to_string(t.topic_id), std::to_string(r + 1), t.top_words[r].token,
                          format_double(t.top_words[r].probability)});
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json model_to_json(const LdaModel& m, std::uint64_t vocab_hash, bool include_state = false) {
  nlohmann::ordered_json j;
  j["version"] = LdaModel::kVersion;
  j["K"] = m.num_topics;
  j["alpha_spec"] = m.alpha_spec.to_string();
  j["alpha"] = m.alpha;
  j["eta"] = m.eta;
  j["vocab_size"] = m.vocab_size;
  j["vocab_hash"] = hex64(vocab_hash);
  j["seed"] = m.seed;
  j["sweeps"] = m.sweeps_done;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int k = 0; k < m.num_topics; ++k)
    rows.push_back(std::vector<int>(m.topic_word.begin() + static_cast<std::ptrdiff_t>(k) * m.vocab_size,
                                    m.topic_word.begin() + static_cast<std::ptrdiff_t>(k + 1) * m.vocab_size));
  j["n_kw"] = rows;
  j["n_k"] = m.topic_total;
  if (include_state) {
    j["z"] = m.assignments;
    nlohmann::ordered_json nd = nlohmann::ordered_json::array();
    for (std::size_t d = 0; d < m.num_docs(); ++d)
      nd.push_back(std::vector<int>(m.doc_topic.begin() + static_cast<std::ptrdiff_t>(d * m.num_topics),
                                    m.doc_topic.begin() + static_cast<std::ptrdiff_t>((d + 1) * m.num_topics)));
    j["n_dk"] = nd;
  }
  return j;
}

struct LoadedModel {
  LdaModel model;
  std::string vocab_hash;
};

inline LoadedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != LdaModel::kVersion) throw InputError("unsupported LDA model version");
    LoadedModel out;
    auto& m = out.model;
    m.num_topics = j.at("K").get<int>();
    m.alpha_spec = AlphaSpec::parse(j.at("alpha_spec").get<std::string>());
    m.alpha = j.at("alpha").get<std::vector<double>>();
    m.alpha_sum = std::accumulate(m.alpha.begin(), m.alpha.end(), 0.0);
    m.eta = j.at("eta").get<double>();
    m.vocab_size = j.at("vocab_size").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.sweeps_done = j.at("sweeps").get<int>();
    m.rng = Rng(m.seed);
    out.vocab_hash = j.at("vocab_hash").get<std::string>();
    const auto rows = j.at("n_kw").get<std::vector<std::vector<int>>>();
    if (m.num_topics < 1 || static_cast<int>(rows.size()) != m.num_topics ||
        static_cast<int>(m.alpha.size()) != m.num_topics)
      throw InputError("LDA model dimensions are inconsistent");
    for (const auto& r : rows) {
      if (static_cast<int>(r.size()) != m.vocab_size) throw InputError("LDA model n_kw row has wrong length");
      m.topic_word.insert(m.topic_word.end(), r.begin(), r.end());
    }
    m.topic_total = j.at("n_k").get<std::vector<int>>();
    if (static_cast<int>(m.topic_total.size()) != m.num_topics) throw InputError("LDA model n_k has wrong length");
    if (j.contains("z")) {
      m.assignments = j.at("z").get<std::vector<std::vector<int>>>();
      for (const auto& r : j.at("n_dk").get<std::vector<std::vector<int>>>()) {
        if (static_cast<int>(r.size()) != m.num_topics) throw InputError("LDA model n_dk row has wrong length");
        m.doc_topic.insert(m.doc_topic.end(), r.begin(), r.end());
      }
      if (m.doc_topic.size() != m.assignments.size() * static_cast<std::size_t>(m.num_topics))
        throw InputError("LDA model z and n_dk disagree");
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed LDA model: ") + e.what());
  } catch (const UsageError& e) {
    throw InputError(std::string("malformed LDA model: ") + e.what());
  }
}

}  // namespace opminer::lda
