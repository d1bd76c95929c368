#pragma once

// Seeded synthetic data with known ground truth: LDA corpora with anchor-word
// topics, labeled sentiment texts, and tweet streams with planted keyword,
// locality, mention and hashtag content.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "opinion_miner/ingest.hpp"
#include "opinion_miner/record.hpp"
#include "opinion_miner/rng.hpp"
#include "opinion_miner/textproc.hpp"

namespace opminer::synth {

using text::Document;

// ---------------------------------------------------------------------------
// LDA corpus

struct SynthLdaSpec {
  int num_topics = 3;
  int vocab_size = 30;
  int n_docs = 500;
  int doc_len = 50;
  double alpha = 0.1;  // symmetric Dirichlet for document mixtures
  int anchors_per_topic = 10;
  double anchor_mass = 0.08;  // extra probability on each anchor word
  std::uint64_t seed = 0;
};

struct SynthLdaCorpus {
  std::vector<Document> docs;
  std::vector<std::vector<double>> phi;    // K x V, rows sum to 1
  std::vector<std::vector<double>> theta;  // D x K
  std::vector<std::vector<int>> anchors;   // K disjoint anchor sets
};

inline std::string token_name(int w, int vocab_size) {
  const int width = std::max<int>(2, static_cast<int>(std::to_string(std::max(vocab_size - 1, 0)).size()));
  std::string digits = std::to_string(w);
  return "w" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0') + digits;
}

/// phi*[k] = (1 - A*mass)/V everywhere plus `mass` on each of topic k's A
/// anchors (anchor sets drawn as disjoint blocks of a seeded permutation).
/// Documents follow the LDA generative process.
inline SynthLdaCorpus generate_lda_corpus(const SynthLdaSpec& spec) {
  if (spec.num_topics < 1 || spec.vocab_size < 1 || spec.n_docs < 0 || spec.doc_len < 1 || spec.anchors_per_topic < 0)
    throw std::invalid_argument("synth lda: sizes must be positive");
  if (static_cast<long long>(spec.num_topics) * spec.anchors_per_topic > spec.vocab_size)
    throw std::invalid_argument("synth lda: K * anchors_per_topic exceeds the vocabulary");
  const double anchor_total = spec.anchors_per_topic * spec.anchor_mass;
  if (spec.anchor_mass < 0.0 || anchor_total > 1.0) throw std::invalid_argument("synth lda: anchor mass exceeds 1");
  if (!(spec.alpha > 0.0)) throw std::invalid_argument("synth lda: alpha must be positive");

  Rng rng(spec.seed);
  SynthLdaCorpus out;
  std::vector<int> perm(static_cast<std::size_t>(spec.vocab_size));
  for (int w = 0; w < spec.vocab_size; ++w) perm[w] = w;
  rng.shuffle(perm.begin(), perm.end());
  const double base = (1.0 - anchor_total) / spec.vocab_size;
  for (int k = 0; k < spec.num_topics; ++k) {
    std::vector<int> anchors(perm.begin() + k * spec.anchors_per_topic, perm.begin() + (k + 1) * spec.anchors_per_topic);
    std::sort(anchors.begin(), anchors.end());
    std::vector<double> row(static_cast<std::size_t>(spec.vocab_size), base);
    for (int w : anchors) row[w] += spec.anchor_mass;
    out.phi.push_back(std::move(row));
    out.anchors.push_back(std::move(anchors));
  }
  const std::vector<double> alpha(static_cast<std::size_t>(spec.num_topics), spec.alpha);
  for (int d = 0; d < spec.n_docs; ++d) {
    auto theta = rng.dirichlet(alpha);
    Document doc;
    doc.source_id = "d" + std::to_string(d);
    doc.tokens.reserve(static_cast<std::size_t>(spec.doc_len));
    for (int i = 0; i < spec.doc_len; ++i) {
      const auto z = rng.categorical(theta);
      doc.tokens.push_back(static_cast<int>(rng.categorical(out.phi[z])));
    }
    out.docs.push_back(std::move(doc));
    out.theta.push_back(std::move(theta));
  }
  return out;
}

/// Mean over true topics of |learned top words ∩ anchors| / |anchors| after
/// greedily matching each true topic (in order) to the unused learned topic
/// with the largest overlap (ties to the lower index).
inline double greedy_alignment_overlap(const std::vector<std::vector<int>>& learned_top,
                                       const std::vector<std::vector<int>>& anchors) {
  if (anchors.empty()) return 0.0;
  std::vector<char> used(learned_top.size(), 0);
  double sum = 0.0;
  for (const auto& truth : anchors) {
    const std::set<int> truth_set(truth.begin(), truth.end());
    int best = -1;
    std::size_t best_overlap = 0;
    for (std::size_t k = 0; k < learned_top.size(); ++k) {
      if (used[k]) continue;
      std::size_t overlap = 0;
      for (int w : learned_top[k]) overlap += truth_set.count(w);
      if (best < 0 || overlap > best_overlap) {
        best = static_cast<int>(k);
        best_overlap = overlap;
      }
    }
    if (best >= 0) used[best] = 1;
    sum += truth.empty() ? 0.0 : static_cast<double>(best_overlap) / static_cast<double>(truth.size());
  }
  return sum / static_cast<double>(anchors.size());
}

// ---------------------------------------------------------------------------
// Sentiment corpus

inline const std::vector<std::string>& default_positive_words() {
  static const std::vector<std::string> w = {"great", "love", "support", "good", "excellent", "happy", "win",
                                             "benefit", "better", "fair", "approve", "hope", "progress", "smart",
                                             "thanks", "finally", "yes", "helpful", "awesome", "proud"};
  return w;
}

inline const std::vector<std::string>& default_negative_words() {
  static const std::vector<std::string> w = {"bad", "hate", "unfair", "terrible", "oppose", "worse", "fail",
                                             "awful", "angry", "scam", "wrong", "burden", "mess", "ridiculous",
                                             "disaster", "stupid", "never", "sad", "greedy", "useless"};
  return w;
}

inline const std::vector<std::string>& default_neutral_words() {
  static const std::vector<std::string> w = {
      "today", "people", "week", "news", "report", "morning", "time", "year", "new", "said",
      "says", "via", "read", "story", "update", "talk", "meeting", "public", "hearing", "idea",
      "proposal", "street", "bridge", "tunnel", "avenue", "downtown", "zone", "map", "day", "night",
      "weekend", "office", "question", "answer", "details", "article", "post", "thread", "video", "photo"};
  return w;
}

struct SentimentSpec {
  int n = 1000;
  std::vector<std::string> positive_words = default_positive_words();
  std::vector<std::string> negative_words = default_negative_words();
  std::vector<std::string> neutral_words = default_neutral_words();
  double noise_rate = 0.0;  // fraction of examples whose label is flipped
  int min_len = 6;
  int max_len = 12;
  double polar_rate = 0.3;  // chance that a non-anchor position is a polar word
  std::uint64_t seed = 0;
};

struct LabeledText {
  std::string text;
  int label = 0;
  bool flipped = false;
};

/// Class-balanced before noise (ceil(n/2) positive). Every text holds at least
/// one word of its class's polar list and none of the other's, so the clean
/// labels are separable by word presence. Exactly floor(noise_rate * n)
/// labels are then flipped.
inline std::vector<LabeledText> generate_sentiment_corpus(const SentimentSpec& spec) {
  if (spec.n < 0) throw std::invalid_argument("synth sentiment: n must be >= 0");
  if (!(spec.noise_rate >= 0.0 && spec.noise_rate < 0.5))
    throw std::invalid_argument("synth sentiment: noise_rate must be in [0, 0.5)");
  if (spec.positive_words.empty() || spec.negative_words.empty() || spec.neutral_words.empty())
    throw std::invalid_argument("synth sentiment: word lists must be nonempty");
  if (spec.min_len < 1 || spec.max_len < spec.min_len) throw std::invalid_argument("synth sentiment: bad length range");
  Rng rng(spec.seed);
  std::vector<LabeledText> out;
  const int n_pos = (spec.n + 1) / 2;
  for (int e = 0; e < spec.n; ++e) {
    const int label = e < n_pos ? 1 : 0;
    const auto& polar = label ? spec.positive_words : spec.negative_words;
    const int len = spec.min_len + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(spec.max_len - spec.min_len + 1)));
    const auto anchor = rng.uniform_index(static_cast<std::uint64_t>(len));
    std::string text;
    for (int i = 0; i < len; ++i) {
      const bool is_polar = static_cast<std::uint64_t>(i) == anchor || rng.uniform() < spec.polar_rate;
      const auto& list = is_polar ? polar : spec.neutral_words;
      if (i) text += ' ';
      text += list[rng.uniform_index(list.size())];
    }
    out.push_back({std::move(text), label, false});
  }
  rng.shuffle(out.begin(), out.end());
  const auto n_flip = static_cast<std::size_t>(std::floor(spec.noise_rate * spec.n));
  std::vector<std::size_t> idx(out.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  rng.shuffle(idx.begin(), idx.end());
  for (std::size_t i = 0; i < n_flip; ++i) {
    auto& ex = out[idx[i]];
    ex.label = 1 - ex.label;
    ex.flipped = true;
  }
  return out;
}

/// CSV `text,label`.
inline void write_labeled_csv(std::ostream& out, std::span<const LabeledText> rows) {
  write_csv_row(out, {"text", "label"});
  for (const auto& r : rows) write_csv_row(out, {r.text, std::to_string(r.label)});
}

// ---------------------------------------------------------------------------
// Tweet stream

inline const std::vector<std::vector<std::string>>& default_stream_topics() {
  static const std::vector<std::vector<std::string>> t = {
      {"subway", "transit", "trains", "repair", "signals", "delays", "riders", "service"},
      {"traffic", "gridlock", "cars", "trucks", "speed", "commute", "drivers", "lanes"},
      {"toll", "revenue", "fee", "budget", "billion", "cost", "price", "funding"},
      {"governor", "mayor", "albany", "vote", "lawmakers", "approval", "bill", "legislature"},
      {"air", "pollution", "emissions", "climate", "health", "asthma", "environment", "bikes"},
  };
  return t;
}

struct StreamSpec {
  int n_users = 100;
  int n_tweets = 1000;
  Timestamp start = make_timestamp(2007, 1, 1);
  Timestamp end = make_timestamp(2020, 1, 1);
  std::vector<std::string> keywords = {"congestion pricing", "congestion charging", "congestion charge",
                                       "road charging"};
  std::vector<std::string> include_terms = {"NYC", "Brooklyn", "Manhattan"};
  std::vector<std::string> exclude_terms = {"TfL"};
  double keyword_rate = 0.3;   // tweets carrying a keyword phrase
  double include_rate = 0.6;   // tweets carrying a locality term
  double exclude_rate = 0.15;  // tweets carrying an other-case term
  double mention_rate = 0.4;
  double hashtag_rate = 0.3;
  double url_rate = 0.2;
  double positive_rate = 0.6;
  std::vector<std::vector<std::string>> topics = default_stream_topics();
  std::vector<std::string> positive_words = default_positive_words();
  std::vector<std::string> negative_words = default_negative_words();
  std::vector<std::string> accounts = {"MTA", "NYCMayor", "NYGovCuomo", "StreetsblogNYC", "nytimes",
                                       "GridlockSam", "Uber", "TransAlt"};
  std::vector<std::string> tags = {"CongestionPricing", "MTA", "subway", "FixTheSubway", "MoveNY", "traffic"};
  std::uint64_t seed = 0;
};

struct TweetStream {
  std::vector<TweetRecord> records;  // sorted by time
  std::vector<int> topic;            // planted topic per record
  std::vector<int> polarity;         // planted sentiment per record
  std::set<std::string> keyword_ids;  // records carrying a keyword phrase
  std::set<std::string> include_ids;  // records carrying an include term
  std::set<std::string> exclude_ids;  // records carrying an exclude term
};

/// Word lists must not contain keyword phrases or locality terms, so the
/// planted id sets are exactly what the filters can find.
inline TweetStream generate_tweet_stream(const StreamSpec& spec) {
  TweetStream out;
  if (spec.n_users <= 0 || spec.n_tweets <= 0) return out;
  if (spec.end <= spec.start) throw std::invalid_argument("synth stream: empty date range");
  if (spec.topics.empty() || spec.keywords.empty() || spec.include_terms.empty() || spec.exclude_terms.empty() ||
      spec.positive_words.empty() || spec.negative_words.empty())
    throw std::invalid_argument("synth stream: word lists must be nonempty");
  Rng rng(spec.seed);
  std::vector<double> user_w(static_cast<std::size_t>(spec.n_users));
  for (int u = 0; u < spec.n_users; ++u) user_w[u] = 1.0 / (u + 1.0);
  std::vector<double> account_w(spec.accounts.size());
  for (std::size_t a = 0; a < account_w.size(); ++a) account_w[a] = 1.0 / (a + 1.0);
  const auto span_s = static_cast<std::uint64_t>((spec.end - spec.start).count());

  struct Draft {
    Timestamp t;
    std::string user, text;
    int topic, polarity;
    bool kw, inc, exc;
  };
  std::vector<Draft> drafts;
  auto pick = [&](const std::vector<std::string>& v) -> const std::string& { return v[rng.uniform_index(v.size())]; };
  for (int n = 0; n < spec.n_tweets; ++n) {
    Draft d;
    d.t = spec.start + std::chrono::seconds(static_cast<long long>(rng.uniform_index(span_s)));
    d.user = "user" + std::to_string(rng.categorical(user_w));
    d.topic = static_cast<int>(rng.uniform_index(spec.topics.size()));
    d.polarity = rng.uniform() < spec.positive_rate ? 1 : 0;
    d.kw = rng.uniform() < spec.keyword_rate;
    d.inc = rng.uniform() < spec.include_rate;
    d.exc = rng.uniform() < spec.exclude_rate;
    std::vector<std::string> words;
    const int n_topic = 4 + static_cast<int>(rng.uniform_index(4));
    for (int i = 0; i < n_topic; ++i) words.push_back(pick(spec.topics[d.topic]));
    const auto& polar = d.polarity ? spec.positive_words : spec.negative_words;
    const int n_polar = 1 + static_cast<int>(rng.uniform_index(2));
    for (int i = 0; i < n_polar; ++i) words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(words.size() + 1)), pick(polar));
    if (d.kw) words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(words.size() + 1)), pick(spec.keywords));
    if (d.inc) words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(words.size() + 1)), "in " + pick(spec.include_terms));
    if (d.exc) words.push_back(pick(spec.exclude_terms));
    if (!spec.accounts.empty() && rng.uniform() < spec.mention_rate) {
      const int m = 1 + static_cast<int>(rng.uniform_index(2));
      for (int i = 0; i < m; ++i) words.insert(words.begin(), "@" + spec.accounts[rng.categorical(account_w)]);
    }
    if (!spec.tags.empty() && rng.uniform() < spec.hashtag_rate) {
      std::string tag = pick(spec.tags);
      if (rng.uniform() < 0.25)
        for (auto& c : tag) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      words.push_back("#" + tag);
    }
    if (rng.uniform() < spec.url_rate) words.push_back("https://t.co/" + std::to_string(rng.uniform_index(1000000)));
    for (std::size_t i = 0; i < words.size(); ++i) d.text += (i ? " " : "") + words[i];
    drafts.push_back(std::move(d));
  }
  std::stable_sort(drafts.begin(), drafts.end(), [](const Draft& a, const Draft& b) { return a.t < b.t; });
  const int width = static_cast<int>(std::to_string(drafts.size()).size());
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    auto& d = drafts[i];
    std::string num = std::to_string(i + 1);
    std::string id = "t" + std::string(static_cast<std::size_t>(width - static_cast<int>(num.size())), '0') + num;
    if (d.kw) out.keyword_ids.insert(id);
    if (d.inc) out.include_ids.insert(id);
    if (d.exc) out.exclude_ids.insert(id);
    out.topic.push_back(d.topic);
    out.polarity.push_back(d.polarity);
    out.records.push_back(ingest::make_record(std::move(id), d.t, std::move(d.user), std::move(d.text)));
  }
  return out;
}

}  // namespace opminer::synth
