#pragma once

// Stages shared by the CLI subcommands and the end-to-end pipeline. The
// pipeline is the composition of these functions, so running the
// subcommands by hand on its intermediates reproduces its outputs.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "opinion_miner/analytics.hpp"
#include "opinion_miner/coherence.hpp"
#include "opinion_miner/common.hpp"
#include "opinion_miner/config.hpp"
#include "opinion_miner/ingest.hpp"
#include "opinion_miner/lda.hpp"
#include "opinion_miner/lstm.hpp"
#include "opinion_miner/rng.hpp"
#include "opinion_miner/textproc.hpp"

namespace opminer::app {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Files

/// Tracks every file written so the manifest can list them.
class OutputSet {
 public:
  template <class F>
  void write(const fs::path& path, F&& fill) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    {
      auto out = open_output(path.string());
      fill(out);
      out.flush();
      if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
    }
    if (std::find(files_.begin(), files_.end(), path) == files_.end()) files_.push_back(path);
  }

  void write_json(const fs::path& path, const ordered_json& j) {
    write(path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
  }

  const std::vector<fs::path>& files() const { return files_; }

 private:
  std::vector<fs::path> files_;
};

inline std::vector<std::string> read_terms(const std::string& path) {
  auto in = open_input(path);
  return text::read_word_list(in);
}

inline ingest::ParseResult read_corpus(const std::string& path, bool strict) {
  auto in = open_input(path);
  return ingest::parse_corpus(in, strict ? ingest::MalformedPolicy::abort : ingest::MalformedPolicy::skip);
}

inline nlohmann::json read_json(const std::string& path) {
  const auto body = read_file(path);
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline std::map<std::string, const TweetRecord*> index_by_id(const std::vector<TweetRecord>& records) {
  std::map<std::string, const TweetRecord*> idx;
  for (const auto& r : records) idx.emplace(r.id, &r);
  return idx;
}

// ---------------------------------------------------------------------------
// Filter

struct FilterResult {
  ingest::ParseResult parsed;
  std::vector<TweetRecord> after_keyword;
  ingest::LocalityResult locality;
  ingest::FilterReport report;

  const std::vector<TweetRecord>& kept() const { return locality.after_exclude; }
};

inline FilterResult run_filter(ingest::ParseResult parsed, const std::vector<std::string>& keywords,
                               const std::vector<std::string>& include, const std::vector<std::string>& exclude,
                               bool include_stage) {
  if (parsed.records.empty()) throw InputError("corpus contains no valid records");
  if (keywords.empty()) throw UsageError("keyword list is empty");
  FilterResult r;
  r.parsed = std::move(parsed);
  r.after_keyword = ingest::keyword_filter(r.parsed.records, keywords);
  r.locality = ingest::locality_filter(r.after_keyword, include, exclude, include_stage);
  r.report = ingest::filter_summary(r.parsed.records, r.after_keyword, r.kept());
  r.report.malformed_lines = r.parsed.issues.size();
  return r;
}

inline void write_issues_csv(std::ostream& out, const std::vector<ingest::ParseIssue>& issues) {
  write_csv_row(out, {"line", "message"});
  for (const auto& i : issues) write_csv_row(out, {std::to_string(i.line), i.message});
}

// ---------------------------------------------------------------------------
// Topic model

struct TextSettings {
  std::string stopwords_path;  // empty: built-in list
  int min_df = 2;
  std::optional<std::size_t> max_features;
};

inline text::Vocabulary build_topic_vocabulary(const std::vector<TweetRecord>& records, const TextSettings& ts) {
  text::VocabularyOptions opts;
  opts.min_df = ts.min_df;
  opts.max_features = ts.max_features;
  const auto words = ts.stopwords_path.empty() ? text::default_stopwords() : read_terms(ts.stopwords_path);
  opts.stopwords.insert(words.begin(), words.end());
  std::vector<std::vector<std::string>> docs;
  docs.reserve(records.size());
  for (const auto& r : records) docs.push_back(text::tokenize(r.text));
  try {
    return text::build_vocabulary(docs, opts);
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("cannot build a vocabulary: ") + e.what());
  }
}

struct TopicCorpus {
  std::vector<text::Document> docs;  // nonempty only, corpus order
  std::size_t dropped_empty = 0;
};

inline TopicCorpus topic_corpus(const std::vector<TweetRecord>& records, const text::Vocabulary& vocab) {
  TopicCorpus tc;
  for (auto& d : text::to_documents(records, vocab)) {
    if (d.empty())
      ++tc.dropped_empty;
    else
      tc.docs.push_back(std::move(d));
  }
  if (tc.docs.empty()) throw InputError("every document is empty after vocabulary pruning");
  return tc;
}

inline text::Vocabulary load_vocabulary(const std::string& path) { return text::Vocabulary::from_json(read_json(path)); }

inline lda::LdaModel load_lda(const std::string& path, const text::Vocabulary& vocab) {
  auto loaded = lda::model_from_json(read_json(path));
  if (loaded.vocab_hash != hex64(vocab.hash()))
    throw InputError("LDA model '" + path + "' was trained against a different vocabulary");
  return std::move(loaded.model);
}

struct LdaRun {
  lda::LdaModel model;
  lda::TrainLog log;
};

inline LdaRun train_topics(const TopicCorpus& tc, const text::Vocabulary& vocab, const lda::LdaConfig& cfg, int sweeps) {
  LdaRun run;
  run.model = lda::init_model(tc.docs, static_cast<int>(vocab.size()), cfg);
  run.log = lda::train(run.model, tc.docs, {sweeps, 0});
  return run;
}

inline std::vector<lda::TopicSummary> topic_summaries(const lda::LdaModel& m, const text::Vocabulary& vocab,
                                                      std::size_t top_n) {
  std::vector<lda::TopicSummary> out;
  for (int k = 0; k < m.num_topics; ++k) out.push_back(lda::topic_top_words(m, k, top_n, &vocab));
  return out;
}

/// CSV `id,topic`: dominant topic of each training document.
inline void write_doc_topics_csv(std::ostream& out, const lda::LdaModel& m, const TopicCorpus& tc) {
  write_csv_row(out, {"id", "topic"});
  for (std::size_t d = 0; d < tc.docs.size(); ++d)
    write_csv_row(out, {tc.docs[d].source_id, std::to_string(lda::dominant_topic(lda::doc_topics(m, d)))});
}

inline void write_trace_csv(std::ostream& out, const lda::TrainLog& log) {
  write_csv_row(out, {"sweep", "log_likelihood"});
  for (std::size_t i = 0; i < log.log_likelihood.size(); ++i)
    write_csv_row(out, {std::to_string(i + 1), format_double(log.log_likelihood[i])});
}

inline ordered_json grid_summary_json(const coherence::GridSearchResult& g) {
  const auto& b = g.best_row();
  ordered_json j;
  j["best"] = {{"K", b.cell.num_topics},
               {"alpha", b.cell.alpha.to_string()},
               {"eta", b.cell.eta},
               {"mean_coherence", b.mean_coherence}};
  j["baseline_coherence"] = g.baseline_coherence;
  j["improvement_vs_baseline"] =
      g.improvement_vs_baseline ? ordered_json(*g.improvement_vs_baseline) : ordered_json(nullptr);
  j["train_docs"] = g.train_docs;
  j["validation_docs"] = g.validation_docs;
  j["rows"] = g.table.size();
  return j;
}

// ---------------------------------------------------------------------------
// Sentiment

struct LabeledRow {
  std::string text;
  int label = 0;
};

/// CSV with header `text,label`, label 0 or 1.
inline std::vector<LabeledRow> read_labeled(const std::string& path) {
  auto in = open_input(path);
  const auto rows = read_csv(in);
  if (rows.empty() || rows.front().size() != 2 || rows.front()[0] != "text" || rows.front()[1] != "label")
    throw InputError("labeled data '" + path + "' must start with the header text,label", 1);
  std::vector<LabeledRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() == 1 && r[0].empty()) continue;
    if (r.size() != 2 || (r[1] != "0" && r[1] != "1"))
      throw InputError("labeled data '" + path + "': expected text,label with label 0 or 1 in record " +
                       std::to_string(i + 1));
    out.push_back({r[0], r[1] == "1" ? 1 : 0});
  }
  if (out.empty()) throw InputError("labeled data '" + path + "' has no rows");
  return out;
}

struct LabeledSplit {
  std::vector<LabeledRow> train;
  std::vector<LabeledRow> test;
};

/// Seeded shuffle; the first round(fraction * n) rows train, the rest test.
inline LabeledSplit split_labeled(const std::vector<LabeledRow>& rows, double train_fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(rows.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(derive_seed(seed, fnv1a("sentiment-split")));
  rng.shuffle(idx.begin(), idx.end());
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows.size())));
  if (n_train == 0 || n_train >= rows.size()) throw InputError("labeled data too small for a train/test split");
  LabeledSplit s;
  for (std::size_t i = 0; i < idx.size(); ++i) (i < n_train ? s.train : s.test).push_back(rows[idx[i]]);
  return s;
}

/// No stopword removal: negations carry polarity.
inline text::Vocabulary build_sentiment_vocabulary(const std::vector<LabeledRow>& rows, int max_features) {
  std::vector<std::vector<std::string>> docs;
  for (const auto& r : rows) docs.push_back(text::tokenize(r.text));
  text::VocabularyOptions opts;
  opts.max_features = static_cast<std::size_t>(max_features);
  try {
    return text::build_vocabulary(docs, opts);
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("cannot build a sentiment vocabulary: ") + e.what());
  }
}

inline std::vector<int> encode_text(const std::string& s, const text::Vocabulary& vocab) {
  return text::to_token_ids(text::tokenize(s), vocab);
}

inline std::vector<lstm::LabeledExample> encode_labeled(const std::vector<LabeledRow>& rows,
                                                        const text::Vocabulary& vocab) {
  std::vector<lstm::LabeledExample> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({encode_text(r.text, vocab), r.label});
  return out;
}

struct SentimentModel {
  text::Vocabulary vocab;
  lstm::LstmClassifier classifier;
};

inline SentimentModel train_sentiment(const std::vector<LabeledRow>& train_rows, const lstm::LstmConfig& cfg) {
  SentimentModel m;
  m.vocab = build_sentiment_vocabulary(train_rows, cfg.max_features);
  const auto examples = encode_labeled(train_rows, m.vocab);
  try {
    m.classifier = lstm::train(examples, static_cast<int>(m.vocab.size()), cfg, m.vocab.hash());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("cannot train the sentiment model: ") + e.what());
  }
  return m;
}

inline SentimentModel load_sentiment(const std::string& model_path, const std::string& vocab_path) {
  SentimentModel m;
  m.vocab = load_vocabulary(vocab_path);
  m.classifier = lstm::classifier_from_json(read_json(model_path));
  if (m.classifier.vocab_hash != m.vocab.hash())
    throw InputError("sentiment model '" + model_path + "' was trained against a different vocabulary");
  return m;
}

inline lstm::Metrics evaluate_sentiment(const SentimentModel& m, const std::vector<LabeledRow>& rows) {
  std::vector<int> predicted, gold;
  for (const auto& r : rows) {
    predicted.push_back(lstm::predict(m.classifier, encode_text(r.text, m.vocab)).polarity);
    gold.push_back(r.label);
  }
  return lstm::evaluate(predicted, gold);
}

/// CSV `id,polarity,prob_positive`.
inline void write_predictions_csv(std::ostream& out, const SentimentModel& m, const std::vector<TweetRecord>& records) {
  write_csv_row(out, {"id", "polarity", "prob_positive"});
  for (const auto& r : records) {
    const auto p = lstm::predict(m.classifier, encode_text(r.text, m.vocab));
    write_csv_row(out, {r.id, std::to_string(p.polarity), format_double(p.prob_positive)});
  }
}

// ---------------------------------------------------------------------------
// Reports

inline void write_involvers_csv(std::ostream& out, const std::vector<TweetRecord>& records, std::size_t k,
                                analytics::ShareMode mode) {
  analytics::write_involvers_header(out);
  for (auto kind : {analytics::InvolverKind::active_user, analytics::InvolverKind::mentioned_account,
                    analytics::InvolverKind::hashtag})
    analytics::write_involvers_rows(out, analytics::involvers(records, kind, k, mode));
}

/// CSV `kind,rank,handle,share`: shares summed across years.
inline void write_involvers_overall_csv(std::ostream& out, const std::vector<TweetRecord>& records, std::size_t k,
                                        analytics::ShareMode mode) {
  write_csv_row(out, {"kind", "rank", "handle", "share"});
  for (auto kind : {analytics::InvolverKind::active_user, analytics::InvolverKind::mentioned_account,
                    analytics::InvolverKind::hashtag}) {
    const auto rep = analytics::involvers(records, kind, k, mode);
    for (std::size_t i = 0; i < rep.overall.size(); ++i)
      write_csv_row(out, {analytics::to_string(kind), std::to_string(i + 1), rep.overall[i].first,
                          format_double(rep.overall[i].second)});
  }
}

/// Joins a CSV keyed by `id` (first column) with the corpus timestamps.
template <class Row>
std::vector<Row> join_by_id(const std::string& path, const std::vector<TweetRecord>& records, std::size_t columns,
                            const std::string& header1,
                            const std::function<Row(const std::vector<std::string>&, Timestamp)>& make) {
  auto in = open_input(path);
  const auto rows = read_csv(in);
  if (rows.empty() || rows.front().size() < columns || rows.front()[0] != "id" || rows.front()[1] != header1)
    throw InputError("'" + path + "' must start with a header id," + header1 + ",...", 1);
  const auto idx = index_by_id(records);
  std::vector<Row> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() == 1 && r[0].empty()) continue;
    if (r.size() != rows.front().size()) throw InputError("'" + path + "': wrong field count", i + 1);
    auto it = idx.find(r[0]);
    if (it == idx.end()) throw InputError("'" + path + "': id '" + r[0] + "' is not in the corpus", i + 1);
    try {
      out.push_back(make(r, it->second->created_at));
    } catch (const UsageError& e) {
      throw InputError("'" + path + "': " + e.what(), i + 1);
    }
  }
  return out;
}

inline std::vector<analytics::TopicAssignment> read_doc_topics(const std::string& path,
                                                               const std::vector<TweetRecord>& records) {
  return join_by_id<analytics::TopicAssignment>(
      path, records, 2, "topic", [](const std::vector<std::string>& r, Timestamp t) {
        const auto k = parse_int(r[1]);
        if (k < 0) throw UsageError("negative topic");
        return analytics::TopicAssignment{static_cast<int>(k), t};
      });
}

inline std::vector<analytics::PolarityPoint> read_predictions(const std::string& path,
                                                              const std::vector<TweetRecord>& records) {
  return join_by_id<analytics::PolarityPoint>(
      path, records, 3, "polarity", [](const std::vector<std::string>& r, Timestamp t) {
        if (r[1] != "0" && r[1] != "1") throw UsageError("polarity must be 0 or 1");
        return analytics::PolarityPoint{r[1] == "1" ? 1 : 0, t};
      });
}

// ---------------------------------------------------------------------------
// Manifest

struct ManifestInfo {
  std::string command;
  std::map<std::string, std::string> params;
  std::uint64_t params_hash = 0;
  std::optional<std::uint64_t> seed;
  std::vector<std::pair<std::string, std::string>> inputs;  // name, path
  ordered_json summary = ordered_json::object();
};

/// Output paths are stored relative to `root`; no timestamps or absolute
/// paths, so identical runs give identical manifests.
inline ordered_json manifest_json(const ManifestInfo& info, const fs::path& root, const std::vector<fs::path>& files) {
  ordered_json j;
  j["tool"] = "opinion-miner";
  j["version"] = kToolVersion;
  j["command"] = info.command;
  j["config_hash"] = hex64(info.params_hash);
  j["seed"] = info.seed ? ordered_json(*info.seed) : ordered_json(nullptr);
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : info.params) params[k] = v;
  j["config"] = params;
  ordered_json inputs = ordered_json::array();
  for (const auto& [name, path] : info.inputs) {
    if (path.empty()) continue;
    inputs.push_back({{"name", name}, {"fnv1a", hex64(fnv1a(read_file(path)))}});
  }
  j["inputs"] = inputs;
  j["summary"] = info.summary;
  std::vector<std::pair<std::string, fs::path>> rel;
  for (const auto& f : files) rel.emplace_back(fs::relative(f, root).generic_string(), f);
  std::sort(rel.begin(), rel.end());
  ordered_json outputs = ordered_json::array();
  for (const auto& [name, f] : rel) {
    const auto body = read_file(f.string());
    outputs.push_back({{"path", name}, {"bytes", body.size()}, {"fnv1a", hex64(fnv1a(body))}});
  }
  j["outputs"] = outputs;
  return j;
}

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineSummary {
  std::size_t raw = 0, kept = 0, malformed = 0, docs = 0, dropped_docs = 0;
  int num_topics = 0;
  std::optional<double> held_out_accuracy;
};

/// Writes filtered/, models/, reports/ and manifest.json under c.output_dir.
inline PipelineSummary run_pipeline(const Settings& settings, const PipelineConfig& c) {
  if (c.output_dir.empty()) throw UsageError("no output directory (set output.dir or pass --out)");
  const fs::path root(c.output_dir);
  OutputSet out;
  PipelineSummary sum;
  ordered_json summary;

  // Filtering.
  auto filtered = run_filter(read_corpus(c.corpus, c.strict), read_terms(c.keywords), read_terms(c.include),
                             c.exclude.empty() ? std::vector<std::string>{} : read_terms(c.exclude),
                             c.include_stage);
  const auto& kept = filtered.kept();
  out.write(root / "filtered/keyword.jsonl", [&](std::ostream& o) { ingest::write_corpus(o, filtered.after_keyword); });
  out.write(root / "filtered/corpus.jsonl", [&](std::ostream& o) { ingest::write_corpus(o, kept); });
  out.write(root / "reports/filter_summary.csv",
            [&](std::ostream& o) { ingest::write_filter_report_csv(o, filtered.report); });
  out.write(root / "reports/parse_issues.csv", [&](std::ostream& o) { write_issues_csv(o, filtered.parsed.issues); });
  sum.raw = filtered.parsed.records.size();
  sum.kept = kept.size();
  sum.malformed = filtered.parsed.issues.size();
  summary["filter"] = {{"raw", sum.raw},
                       {"after_keyword", filtered.after_keyword.size()},
                       {"after_include", filtered.locality.after_include.size()},
                       {"kept", sum.kept},
                       {"malformed_lines", sum.malformed}};
  if (kept.empty()) throw InputError("no records survive filtering");

  // Topic model.
  const auto vocab = build_topic_vocabulary(kept, {c.stopwords, c.min_df, c.max_features});
  const auto tc = topic_corpus(kept, vocab);
  sum.docs = tc.docs.size();
  sum.dropped_docs = tc.dropped_empty;
  auto lda_cfg = c.lda;
  int sweeps = c.sweeps;
  if (c.tune) {
    coherence::GridSearchOptions g;
    g.k_values = c.k_grid;
    g.alpha_grid = c.alpha_grid;
    g.eta_grid = c.eta_grid;
    g.strategy = c.strategy;
    g.validation_fraction = c.validation_fraction;
    g.sweeps = sweeps;
    g.seed = c.lda.seed;
    g.coherence = c.coherence;
    const auto grid = coherence::grid_search(tc.docs, static_cast<int>(vocab.size()), g);
    out.write(root / "reports/grid.csv", [&](std::ostream& o) { coherence::write_grid_csv(o, grid); });
    out.write_json(root / "reports/grid_summary.json", grid_summary_json(grid));
    lda_cfg.num_topics = grid.best_row().cell.num_topics;
    lda_cfg.alpha = grid.best_row().cell.alpha;
    lda_cfg.eta = grid.best_row().cell.eta;
  }
  const auto run = train_topics(tc, vocab, lda_cfg, sweeps);
  sum.num_topics = run.model.num_topics;
  out.write_json(root / "models/vocab.json", ordered_json(vocab.to_json()));
  out.write_json(root / "models/lda.json", lda::model_to_json(run.model, vocab.hash()));
  const auto topics = topic_summaries(run.model, vocab, c.coherence.top_n);
  out.write(root / "reports/topics.csv", [&](std::ostream& o) { lda::write_topics_csv(o, topics); });
  out.write(root / "reports/doc_topics.csv", [&](std::ostream& o) { write_doc_topics_csv(o, run.model, tc); });
  out.write(root / "reports/lda_trace.csv", [&](std::ostream& o) { write_trace_csv(o, run.log); });
  const auto coh = coherence::model_coherence(run.model, tc.docs, c.coherence);
  out.write(root / "reports/coherence.csv", [&](std::ostream& o) { coherence::write_coherence_csv(o, coh); });
  summary["lda"] = {{"documents", sum.docs},
                    {"dropped_empty", sum.dropped_docs},
                    {"vocabulary", vocab.size()},
                    {"K", lda_cfg.num_topics},
                    {"alpha", lda_cfg.alpha.to_string()},
                    {"eta", lda_cfg.eta},
                    {"sweeps", sweeps},
                    {"mean_coherence", coh.mean_coherence}};

  std::vector<analytics::TopicAssignment> assignments;
  for (std::size_t d = 0; d < tc.docs.size(); ++d)
    assignments.push_back({lda::dominant_topic(lda::doc_topics(run.model, d)), tc.docs[d].timestamp});
  const auto heat = analytics::topic_year_heatmap(assignments, run.model.num_topics, c.n_classes);
  out.write(root / "reports/heatmap.csv", [&](std::ostream& o) { analytics::write_heatmap_csv(o, heat); });

  // Sentiment.
  if (!c.labeled.empty()) {
    const auto split = split_labeled(read_labeled(c.labeled), c.train_fraction, c.lstm.seed);
    const auto model = train_sentiment(split.train, c.lstm);
    const auto metrics = evaluate_sentiment(model, split.test);
    sum.held_out_accuracy = metrics.accuracy;
    out.write_json(root / "models/sentiment_vocab.json", ordered_json(model.vocab.to_json()));
    out.write_json(root / "models/sentiment.json", lstm::classifier_to_json(model.classifier));
    out.write_json(root / "reports/sentiment_metrics.json", lstm::metrics_to_json(metrics));
    out.write(root / "reports/predictions.csv", [&](std::ostream& o) { write_predictions_csv(o, model, kept); });
    std::vector<analytics::PolarityPoint> points;
    for (const auto& r : kept)
      points.push_back({lstm::predict(model.classifier, encode_text(r.text, model.vocab)).polarity, r.created_at});
    const auto series = analytics::sentiment_series(points);
    out.write(root / "reports/sentiment_series.csv", [&](std::ostream& o) { analytics::write_series_csv(o, series); });
    summary["sentiment"] = {{"train", split.train.size()}, {"test", split.test.size()}, {"accuracy", metrics.accuracy}};
  } else {
    summary["sentiment"] = "skipped: input.labeled not set";
  }

  // Involvers and volumes.
  out.write(root / "reports/involvers.csv",
            [&](std::ostream& o) { write_involvers_csv(o, kept, c.top_k, c.share_mode); });
  out.write(root / "reports/involvers_overall.csv",
            [&](std::ostream& o) { write_involvers_overall_csv(o, kept, c.top_k, c.share_mode); });
  out.write(root / "reports/volume_raw.csv", [&](std::ostream& o) {
    analytics::write_volume_csv(o, analytics::yearly_volume(filtered.parsed.records));
  });
  out.write(root / "reports/volume_filtered.csv",
            [&](std::ostream& o) { analytics::write_volume_csv(o, analytics::yearly_volume(kept)); });

  ManifestInfo info;
  info.command = "pipeline";
  for (const auto& [k, v] : settings.values)
    if (k != "output.dir") info.params[k] = v;
  info.params_hash = settings_hash(settings);
  info.seed = c.seed.value_or(0);
  info.inputs = {{"input.corpus", c.corpus},     {"input.keywords", c.keywords}, {"input.include", c.include},
                 {"input.exclude", c.exclude},   {"input.labeled", c.labeled},   {"text.stopwords", c.stopwords}};
  info.summary = summary;
  const auto manifest = manifest_json(info, root, out.files());
  out.write_json(root / "manifest.json", manifest);
  return sum;
}

}  // namespace opminer::app
