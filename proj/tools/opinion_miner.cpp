// opinion-miner: command-line front end.
//
// Exit codes: 0 success, 2 usage, 3 input error, 4 runtime failure. Errors
// are reported on stderr as one JSON object.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opinion_miner/pipeline.hpp"
#include "opinion_miner/synth.hpp"

using namespace opminer;
using namespace opminer::app;

namespace {

void error_record(const std::string& kind, ExitCode code, const std::string& message, std::size_t line = 0) {
  ordered_json e;
  e["kind"] = kind;
  e["exit_code"] = static_cast<int>(code);
  e["message"] = message;
  if (line) e["line"] = line;
  std::cerr << ordered_json{{"error", e}}.dump() << std::endl;
}

/// Options every subcommand understands.
struct Common {
  bool strict = false;
  std::optional<std::uint64_t> seed;
  std::string manifest;
  CLI::App* app = nullptr;
  bool seeded = false;

  std::uint64_t require_seed() const {
    if (strict && !seed) throw UsageError("--seed is required with --strict");
    return seed.value_or(0);
  }
};

void add_common(CLI::App* sub, Common& c, bool seeded) {
  c.app = sub;
  c.seeded = seeded;
  sub->add_flag("--strict", c.strict, "Abort on malformed input; require --seed");
  if (seeded) sub->add_option("--seed", c.seed, "Random seed (default 0)");
  sub->add_option("--manifest", c.manifest, "Write a manifest of this run to FILE");
}

/// Effective option values of a subcommand, for the manifest.
std::map<std::string, std::string> option_values(const CLI::App* sub) {
  std::map<std::string, std::string> out;
  for (const CLI::Option* o : sub->get_options()) {
    const auto name = o->get_single_name();
    if (name == "help" || name == "manifest") continue;
    std::string v;
    if (o->get_expected_min() == 0) {
      v = o->count() ? "true" : "false";
    } else if (o->count()) {
      for (const auto& r : o->results()) v += (v.empty() ? "" : ",") + r;
    } else {
      v = o->get_default_str();
    }
    out[name] = v;
  }
  return out;
}

void maybe_manifest(const Common& c, const std::string& command, const OutputSet& out,
                    std::vector<std::pair<std::string, std::string>> inputs, ordered_json summary = ordered_json::object()) {
  if (c.manifest.empty()) return;
  ManifestInfo info;
  info.command = command;
  info.params = option_values(c.app);
  std::uint64_t h = fnv1a(command);
  for (const auto& [k, v] : info.params) h = fnv1a(k + "=" + v + "\n", h);
  info.params_hash = h;
  if (c.seeded) info.seed = c.seed.value_or(0);
  info.inputs = std::move(inputs);
  info.summary = std::move(summary);
  fs::path path(c.manifest);
  auto root = path.has_parent_path() ? path.parent_path() : fs::path(".");
  OutputSet m;
  m.write_json(path, manifest_json(info, root, out.files()));
}

std::optional<std::size_t> positive_or_none(long long v) {
  if (v <= 0) return std::nullopt;
  return static_cast<std::size_t>(v);
}

/// Generator parameter errors are the caller's fault.
template <class F>
auto as_usage(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::vector<std::string> optional_terms(const std::string& path) {
  return path.empty() ? std::vector<std::string>{} : read_terms(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Opinion mining over short social-media posts: filtering, topics, sentiment, reports."};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // ---- filter
  struct {
    Common c;
    std::string input, keywords, include, exclude, out, report, keyword_out, issues_out;
    bool no_include_stage = false;
  } f;
  auto* filter = app.add_subcommand("filter", "Keyword and locality filtering with a summary table");
  add_common(filter, f.c, false);
  filter->add_option("--input", f.input, "Raw corpus (JSONL)")->required()->check(CLI::ExistingFile);
  filter->add_option("--keywords", f.keywords, "Keyword phrase list")->required()->check(CLI::ExistingFile);
  filter->add_option("--include", f.include, "Locality include terms")->required()->check(CLI::ExistingFile);
  filter->add_option("--exclude", f.exclude, "Other-case exclude terms")->check(CLI::ExistingFile);
  filter->add_option("--out", f.out, "Filtered corpus (JSONL)")->required();
  filter->add_option("--report", f.report, "Filter summary CSV")->required();
  filter->add_option("--keyword-out", f.keyword_out, "Corpus after the keyword stage only");
  filter->add_option("--issues-out", f.issues_out, "Skipped malformed lines CSV");
  filter->add_flag("--no-include-stage", f.no_include_stage, "Skip the include-term stage");
  filter->callback([&] {
    auto r = run_filter(read_corpus(f.input, f.c.strict), read_terms(f.keywords), read_terms(f.include),
                        optional_terms(f.exclude), !f.no_include_stage);
    OutputSet out;
    out.write(f.out, [&](std::ostream& o) { ingest::write_corpus(o, r.kept()); });
    out.write(f.report, [&](std::ostream& o) { ingest::write_filter_report_csv(o, r.report); });
    if (!f.keyword_out.empty())
      out.write(f.keyword_out, [&](std::ostream& o) { ingest::write_corpus(o, r.after_keyword); });
    if (!f.issues_out.empty()) out.write(f.issues_out, [&](std::ostream& o) { write_issues_csv(o, r.parsed.issues); });
    std::cout << ingest::render_filter_report(r.report);
    for (const auto& i : r.parsed.issues) std::cerr << "skipped line " << i.line << ": " << i.message << '\n';
    maybe_manifest(f.c, "filter", out,
                   {{"input", f.input}, {"keywords", f.keywords}, {"include", f.include}, {"exclude", f.exclude}});
  });

  // ---- stats
  struct {
    Common c;
    std::string input, volume_out;
  } st;
  auto* stats = app.add_subcommand("stats", "Corpus counts and yearly volume");
  add_common(stats, st.c, false);
  stats->add_option("--input", st.input, "Corpus (JSONL)")->required()->check(CLI::ExistingFile);
  stats->add_option("--volume-out", st.volume_out, "Yearly volume CSV");
  stats->callback([&] {
    const auto parsed = read_corpus(st.input, st.c.strict);
    const auto volume = analytics::yearly_volume(parsed.records);
    ordered_json j;
    j["records"] = parsed.records.size();
    j["users"] = ingest::distinct_users(parsed.records);
    j["malformed_lines"] = parsed.issues.size();
    ordered_json years = ordered_json::object();
    for (const auto& [y, n] : volume) years[std::to_string(y)] = n;
    j["per_year"] = years;
    OutputSet out;
    if (!st.volume_out.empty())
      out.write(st.volume_out, [&](std::ostream& o) { analytics::write_volume_csv(o, volume); });
    std::cout << j.dump(2) << '\n';
    maybe_manifest(st.c, "stats", out, {{"input", st.input}}, j);
  });

  // ---- shared text options
  struct TextOpts {
    std::string stopwords;
    int min_df = 2;
    long long max_features = 0;
    TextSettings settings() const { return {stopwords, min_df, positive_or_none(max_features)}; }
  };
  auto add_text = [](CLI::App* sub, TextOpts& t) {
    sub->add_option("--stopwords", t.stopwords, "Stopword list (default: built-in English list)")
        ->check(CLI::ExistingFile);
    sub->add_option("--min-df", t.min_df, "Minimum document frequency")->check(CLI::PositiveNumber);
    sub->add_option("--max-features", t.max_features, "Vocabulary cap, 0 for none")->check(CLI::NonNegativeNumber);
  };

  // ---- lda-train
  struct {
    Common c;
    TextOpts text;
    std::string input, vocab_out, model_out, topics_out, doc_topics_out, trace_out;
    int k = 10, sweeps = 500;
    std::size_t top_n = 10;
    std::string alpha = "0.01";
    double eta = 0.1;
    bool include_state = false;
  } lt;
  auto* lda_train = app.add_subcommand("lda-train", "Train a topic model by collapsed Gibbs sampling");
  add_common(lda_train, lt.c, true);
  add_text(lda_train, lt.text);
  lda_train->add_option("--input", lt.input, "Corpus (JSONL)")->required()->check(CLI::ExistingFile);
  lda_train->add_option("--k", lt.k, "Number of topics")->check(CLI::PositiveNumber);
  lda_train->add_option("--alpha", lt.alpha, "Document prior: a positive number or 'asymmetric'");
  lda_train->add_option("--eta", lt.eta, "Topic-word prior")->check(CLI::PositiveNumber);
  lda_train->add_option("--sweeps", lt.sweeps, "Gibbs sweeps")->check(CLI::PositiveNumber);
  lda_train->add_option("--top-n", lt.top_n, "Words listed per topic")->check(CLI::PositiveNumber);
  lda_train->add_option("--vocab-out", lt.vocab_out, "Vocabulary JSON")->required();
  lda_train->add_option("--model-out", lt.model_out, "Model JSON")->required();
  lda_train->add_option("--topics-out", lt.topics_out, "Top words CSV");
  lda_train->add_option("--doc-topics-out", lt.doc_topics_out, "Dominant topic per document CSV");
  lda_train->add_option("--trace-out", lt.trace_out, "Log-likelihood per sweep CSV");
  lda_train->add_flag("--include-state", lt.include_state, "Store topic assignments in the model");
  lda_train->callback([&] {
    const auto seed = lt.c.require_seed();
    const auto parsed = read_corpus(lt.input, lt.c.strict);
    const auto vocab = build_topic_vocabulary(parsed.records, lt.text.settings());
    const auto tc = topic_corpus(parsed.records, vocab);
    const auto run = train_topics(tc, vocab, {lt.k, lda::AlphaSpec::parse(lt.alpha), lt.eta, seed}, lt.sweeps);
    OutputSet out;
    out.write_json(lt.vocab_out, ordered_json(vocab.to_json()));
    out.write_json(lt.model_out, lda::model_to_json(run.model, vocab.hash(), lt.include_state));
    if (!lt.topics_out.empty()) {
      const auto topics = topic_summaries(run.model, vocab, lt.top_n);
      out.write(lt.topics_out, [&](std::ostream& o) { lda::write_topics_csv(o, topics); });
    }
    if (!lt.doc_topics_out.empty())
      out.write(lt.doc_topics_out, [&](std::ostream& o) { write_doc_topics_csv(o, run.model, tc); });
    if (!lt.trace_out.empty()) out.write(lt.trace_out, [&](std::ostream& o) { write_trace_csv(o, run.log); });
    ordered_json s = {{"documents", tc.docs.size()}, {"dropped_empty", tc.dropped_empty}, {"vocabulary", vocab.size()}};
    std::cout << s.dump() << '\n';
    maybe_manifest(lt.c, "lda-train", out, {{"input", lt.input}, {"stopwords", lt.text.stopwords}}, s);
  });

  // ---- shared coherence options
  struct CohOpts {
    std::size_t top_n = 10;
    double epsilon = 1e-12;
    std::string convention = "lower_rank";
    coherence::CoherenceConfig config() const {
      return {top_n, epsilon, coherence::parse_convention(convention)};
    }
  };
  auto add_coherence = [](CLI::App* sub, CohOpts& o) {
    sub->add_option("--top-n", o.top_n, "Top words per topic")->check(CLI::PositiveNumber);
    sub->add_option("--epsilon", o.epsilon, "Smoothing constant")->check(CLI::PositiveNumber);
    sub->add_option("--convention", o.convention, "Pair convention: lower_rank|umass")
        ->check(CLI::IsMember({"lower_rank", "umass"}));
  };

  // ---- lda-tune
  struct {
    Common c;
    TextOpts text;
    CohOpts coh;
    std::string input, out, summary_out;
    std::string k_grid = "2,3,4,5,6,7,8,9,10,11,12";
    std::string alpha_grid = "0.01,0.31,0.61,0.91,asymmetric";
    std::string eta_grid = "0.01,0.31,0.61,0.91";
    std::string strategy = "staged";
    double validation_fraction = 0.2;
    int sweeps = 500;
  } tu;
  auto* lda_tune = app.add_subcommand("lda-tune", "Grid search over K, alpha and eta by held-out coherence");
  add_common(lda_tune, tu.c, true);
  add_text(lda_tune, tu.text);
  add_coherence(lda_tune, tu.coh);
  lda_tune->add_option("--input", tu.input, "Corpus (JSONL)")->required()->check(CLI::ExistingFile);
  lda_tune->add_option("--k-grid", tu.k_grid, "Comma separated K values");
  lda_tune->add_option("--alpha-grid", tu.alpha_grid, "Comma separated alpha values");
  lda_tune->add_option("--eta-grid", tu.eta_grid, "Comma separated eta values");
  lda_tune->add_option("--strategy", tu.strategy, "staged|full")->check(CLI::IsMember({"staged", "full"}));
  lda_tune->add_option("--validation-fraction", tu.validation_fraction, "Held-out share of documents");
  lda_tune->add_option("--sweeps", tu.sweeps, "Gibbs sweeps per cell")->check(CLI::PositiveNumber);
  lda_tune->add_option("--out", tu.out, "Grid CSV")->required();
  lda_tune->add_option("--summary-out", tu.summary_out, "Best row and baseline JSON");
  lda_tune->callback([&] {
    const auto seed = tu.c.require_seed();
    coherence::GridSearchOptions g;
    for (const auto& k : parse_list(tu.k_grid)) {
      const auto v = parse_int(k);
      if (v < 1) throw UsageError("--k-grid: K must be >= 1");
      g.k_values.push_back(static_cast<int>(v));
    }
    for (const auto& a : parse_list(tu.alpha_grid)) g.alpha_grid.push_back(lda::AlphaSpec::parse(a));
    for (const auto& e : parse_list(tu.eta_grid)) g.eta_grid.push_back(parse_double(e));
    if (g.k_values.empty() || g.alpha_grid.empty() || g.eta_grid.empty()) throw UsageError("grids must be nonempty");
    if (!(tu.validation_fraction > 0.0 && tu.validation_fraction < 1.0))
      throw UsageError("--validation-fraction must be in (0, 1)");
    g.strategy = coherence::parse_strategy(tu.strategy);
    g.validation_fraction = tu.validation_fraction;
    g.sweeps = tu.sweeps;
    g.seed = seed;
    g.coherence = tu.coh.config();
    const auto parsed = read_corpus(tu.input, tu.c.strict);
    const auto vocab = build_topic_vocabulary(parsed.records, tu.text.settings());
    const auto tc = topic_corpus(parsed.records, vocab);
    coherence::GridSearchResult grid;
    try {
      grid = coherence::grid_search(tc.docs, static_cast<int>(vocab.size()), g);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
    OutputSet out;
    out.write(tu.out, [&](std::ostream& o) { coherence::write_grid_csv(o, grid); });
    const auto summary = grid_summary_json(grid);
    if (!tu.summary_out.empty()) out.write_json(tu.summary_out, summary);
    std::cout << summary.dump() << '\n';
    maybe_manifest(tu.c, "lda-tune", out, {{"input", tu.input}, {"stopwords", tu.text.stopwords}}, summary);
  });

  // ---- coherence
  struct {
    Common c;
    CohOpts coh;
    std::string input, model, vocab, out;
  } co;
  auto* coh = app.add_subcommand("coherence", "Per-topic coherence of a trained model over a corpus");
  add_common(coh, co.c, false);
  add_coherence(coh, co.coh);
  coh->add_option("--input", co.input, "Reference corpus (JSONL)")->required()->check(CLI::ExistingFile);
  coh->add_option("--model", co.model, "Model JSON")->required()->check(CLI::ExistingFile);
  coh->add_option("--vocab", co.vocab, "Vocabulary JSON")->required()->check(CLI::ExistingFile);
  coh->add_option("--out", co.out, "Coherence CSV")->required();
  coh->callback([&] {
    const auto vocab = load_vocabulary(co.vocab);
    const auto model = load_lda(co.model, vocab);
    const auto tc = topic_corpus(read_corpus(co.input, co.c.strict).records, vocab);
    const auto report = coherence::model_coherence(model, tc.docs, co.coh.config());
    OutputSet out;
    out.write(co.out, [&](std::ostream& o) { coherence::write_coherence_csv(o, report); });
    ordered_json s = {{"mean_coherence", report.mean_coherence}, {"documents", tc.docs.size()}};
    std::cout << s.dump() << '\n';
    maybe_manifest(co.c, "coherence", out, {{"input", co.input}, {"model", co.model}, {"vocab", co.vocab}}, s);
  });

  // ---- sentiment-train
  struct {
    Common c;
    lstm::LstmConfig cfg;
    double train_fraction = 2.0 / 3.0;
    std::string labeled, model_out, vocab_out, metrics_out;
  } sn;
  auto* s_train = app.add_subcommand("sentiment-train", "Train the LSTM polarity classifier");
  add_common(s_train, sn.c, true);
  s_train->add_option("--labeled", sn.labeled, "Labeled CSV text,label")->required()->check(CLI::ExistingFile);
  s_train->add_option("--embed-dim", sn.cfg.embed_dim, "Embedding size")->check(CLI::PositiveNumber);
  s_train->add_option("--hidden-dim", sn.cfg.hidden_dim, "Hidden state size")->check(CLI::PositiveNumber);
  s_train->add_option("--learning-rate", sn.cfg.learning_rate, "SGD step size")->check(CLI::PositiveNumber);
  s_train->add_option("--batch-size", sn.cfg.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
  s_train->add_option("--epochs", sn.cfg.epochs, "Epochs")->check(CLI::PositiveNumber);
  s_train->add_option("--max-features", sn.cfg.max_features, "Vocabulary cap")->check(CLI::PositiveNumber);
  s_train->add_option("--train-fraction", sn.train_fraction, "Share of rows used for training")
      ->check(CLI::Range(0.0, 1.0));
  s_train->add_option("--model-out", sn.model_out, "Classifier JSON")->required();
  s_train->add_option("--vocab-out", sn.vocab_out, "Vocabulary JSON")->required();
  s_train->add_option("--metrics-out", sn.metrics_out, "Held-out metrics JSON");
  s_train->callback([&] {
    sn.cfg.seed = sn.c.require_seed();
    const auto split = split_labeled(read_labeled(sn.labeled), sn.train_fraction, sn.cfg.seed);
    const auto model = train_sentiment(split.train, sn.cfg);
    const auto metrics = lstm::metrics_to_json(evaluate_sentiment(model, split.test));
    OutputSet out;
    out.write_json(sn.vocab_out, ordered_json(model.vocab.to_json()));
    out.write_json(sn.model_out, lstm::classifier_to_json(model.classifier));
    if (!sn.metrics_out.empty()) out.write_json(sn.metrics_out, metrics);
    std::cout << metrics.dump() << '\n';
    maybe_manifest(sn.c, "sentiment-train", out, {{"labeled", sn.labeled}}, metrics);
  });

  // ---- sentiment-eval
  struct {
    Common c;
    std::string labeled, model, vocab, out;
  } se;
  auto* s_eval = app.add_subcommand("sentiment-eval", "Accuracy, precision, recall and F1 on labeled data");
  add_common(s_eval, se.c, false);
  s_eval->add_option("--labeled", se.labeled, "Labeled CSV text,label")->required()->check(CLI::ExistingFile);
  s_eval->add_option("--model", se.model, "Classifier JSON")->required()->check(CLI::ExistingFile);
  s_eval->add_option("--vocab", se.vocab, "Vocabulary JSON")->required()->check(CLI::ExistingFile);
  s_eval->add_option("--out", se.out, "Metrics JSON");
  s_eval->callback([&] {
    const auto model = load_sentiment(se.model, se.vocab);
    const auto metrics = lstm::metrics_to_json(evaluate_sentiment(model, read_labeled(se.labeled)));
    OutputSet out;
    if (!se.out.empty()) out.write_json(se.out, metrics);
    std::cout << metrics.dump() << '\n';
    maybe_manifest(se.c, "sentiment-eval", out, {{"labeled", se.labeled}, {"model", se.model}, {"vocab", se.vocab}},
                   metrics);
  });

  // ---- sentiment-predict
  struct {
    Common c;
    std::string input, model, vocab, out;
  } sp;
  auto* s_pred = app.add_subcommand("sentiment-predict", "Polarity of every record in a corpus");
  add_common(s_pred, sp.c, false);
  s_pred->add_option("--input", sp.input, "Corpus (JSONL)")->required()->check(CLI::ExistingFile);
  s_pred->add_option("--model", sp.model, "Classifier JSON")->required()->check(CLI::ExistingFile);
  s_pred->add_option("--vocab", sp.vocab, "Vocabulary JSON")->required()->check(CLI::ExistingFile);
  s_pred->add_option("--out", sp.out, "Predictions CSV id,polarity,prob_positive")->required();
  s_pred->callback([&] {
    const auto model = load_sentiment(sp.model, sp.vocab);
    const auto parsed = read_corpus(sp.input, sp.c.strict);
    OutputSet out;
    out.write(sp.out, [&](std::ostream& o) { write_predictions_csv(o, model, parsed.records); });
    maybe_manifest(sp.c, "sentiment-predict", out, {{"input", sp.input}, {"model", sp.model}, {"vocab", sp.vocab}});
  });

  // ---- report
  struct {
    Common c;
    std::string input, raw, out_dir, doc_topics, predictions, share_mode = "per_year_sum";
    std::size_t top_k = 10;
    int n_classes = 5, num_topics = 0;
  } rp;
  auto* report = app.add_subcommand("report", "Involvers, volumes, topic heatmap and sentiment series");
  add_common(report, rp.c, false);
  report->add_option("--input", rp.input, "Filtered corpus (JSONL)")->required()->check(CLI::ExistingFile);
  report->add_option("--raw", rp.raw, "Raw corpus, for the unfiltered volume")->check(CLI::ExistingFile);
  report->add_option("--out-dir", rp.out_dir, "Directory for the report CSVs")->required();
  report->add_option("--doc-topics", rp.doc_topics, "CSV id,topic from lda-train")->check(CLI::ExistingFile);
  report->add_option("--topics", rp.num_topics, "Number of topics (default: 1 + largest topic id)");
  report->add_option("--predictions", rp.predictions, "CSV id,polarity,prob_positive")->check(CLI::ExistingFile);
  report->add_option("--top-k", rp.top_k, "Involvers per year")->check(CLI::PositiveNumber);
  report->add_option("--n-classes", rp.n_classes, "Heatmap quantile classes")->check(CLI::PositiveNumber);
  report->add_option("--share-mode", rp.share_mode, "per_year_sum|global")
      ->check(CLI::IsMember({"per_year_sum", "global"}));
  report->callback([&] {
    const auto records = read_corpus(rp.input, rp.c.strict).records;
    const fs::path root(rp.out_dir);
    const auto mode = parse_share_mode(rp.share_mode);
    OutputSet out;
    if (!rp.doc_topics.empty()) {
      const auto assignments = read_doc_topics(rp.doc_topics, records);
      int k = rp.num_topics;
      for (const auto& a : assignments) k = std::max(k, a.topic + 1);
      if (rp.num_topics > 0 && k > rp.num_topics) throw InputError("topic id exceeds --topics");
      const auto grid = analytics::topic_year_heatmap(assignments, std::max(k, 1), rp.n_classes);
      out.write(root / "heatmap.csv", [&](std::ostream& o) { analytics::write_heatmap_csv(o, grid); });
    }
    if (!rp.predictions.empty()) {
      const auto series = analytics::sentiment_series(read_predictions(rp.predictions, records));
      out.write(root / "sentiment_series.csv", [&](std::ostream& o) { analytics::write_series_csv(o, series); });
    }
    out.write(root / "involvers.csv", [&](std::ostream& o) { write_involvers_csv(o, records, rp.top_k, mode); });
    out.write(root / "involvers_overall.csv",
              [&](std::ostream& o) { write_involvers_overall_csv(o, records, rp.top_k, mode); });
    if (!rp.raw.empty()) {
      const auto raw = read_corpus(rp.raw, rp.c.strict).records;
      out.write(root / "volume_raw.csv",
                [&](std::ostream& o) { analytics::write_volume_csv(o, analytics::yearly_volume(raw)); });
    }
    out.write(root / "volume_filtered.csv",
              [&](std::ostream& o) { analytics::write_volume_csv(o, analytics::yearly_volume(records)); });
    maybe_manifest(rp.c, "report", out,
                   {{"input", rp.input}, {"raw", rp.raw}, {"doc_topics", rp.doc_topics}, {"predictions", rp.predictions}});
  });

  // ---- synth
  auto* synth_cmd = app.add_subcommand("synth", "Synthetic corpora with known ground truth");
  synth_cmd->require_subcommand(1);

  struct {
    Common c;
    synth::SynthLdaSpec spec;
    std::string out, truth_out;
  } sl;
  auto* synth_lda = synth_cmd->add_subcommand("lda", "Documents drawn from planted topics");
  add_common(synth_lda, sl.c, true);
  synth_lda->add_option("--topics", sl.spec.num_topics, "K")->check(CLI::PositiveNumber);
  synth_lda->add_option("--vocab-size", sl.spec.vocab_size, "V")->check(CLI::PositiveNumber);
  synth_lda->add_option("--docs", sl.spec.n_docs, "Documents")->check(CLI::NonNegativeNumber);
  synth_lda->add_option("--doc-len", sl.spec.doc_len, "Tokens per document")->check(CLI::PositiveNumber);
  synth_lda->add_option("--alpha", sl.spec.alpha, "Dirichlet concentration of document mixtures");
  synth_lda->add_option("--anchors", sl.spec.anchors_per_topic, "Anchor words per topic");
  synth_lda->add_option("--anchor-mass", sl.spec.anchor_mass, "Extra probability per anchor word");
  synth_lda->add_option("--out", sl.out, "Corpus (JSONL), one record per document")->required();
  synth_lda->add_option("--truth-out", sl.truth_out, "Anchors and topic-word distributions JSON");
  synth_lda->callback([&] {
    sl.spec.seed = sl.c.require_seed();
    const auto corpus = as_usage([&] { return synth::generate_lda_corpus(sl.spec); });
    std::vector<TweetRecord> records;
    const int width = static_cast<int>(std::to_string(std::max<std::size_t>(corpus.docs.size(), 1)).size());
    for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
      std::string text;
      for (int w : corpus.docs[d].tokens) text += (text.empty() ? "" : " ") + synth::token_name(w, sl.spec.vocab_size);
      auto num = std::to_string(d + 1);
      records.push_back(ingest::make_record("d" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num,
                                            make_timestamp(2019, 1, 1) + std::chrono::minutes(d), "synth", text));
    }
    OutputSet out;
    out.write(sl.out, [&](std::ostream& o) { ingest::write_corpus(o, records); });
    if (!sl.truth_out.empty()) {
      ordered_json anchors = ordered_json::array();
      for (const auto& a : corpus.anchors) {
        std::vector<std::string> names;
        for (int w : a) names.push_back(synth::token_name(w, sl.spec.vocab_size));
        anchors.push_back(names);
      }
      out.write_json(sl.truth_out, {{"anchors", anchors}, {"phi", corpus.phi}});
    }
    maybe_manifest(sl.c, "synth lda", out, {});
  });

  struct {
    Common c;
    synth::SentimentSpec spec;
    std::string out;
  } ss;
  auto* synth_sent = synth_cmd->add_subcommand("sentiment", "Labeled polar texts, optionally with label noise");
  add_common(synth_sent, ss.c, true);
  synth_sent->add_option("--n", ss.spec.n, "Rows")->check(CLI::NonNegativeNumber);
  synth_sent->add_option("--noise", ss.spec.noise_rate, "Share of flipped labels, in [0, 0.5)");
  synth_sent->add_option("--out", ss.out, "Labeled CSV text,label")->required();
  synth_sent->callback([&] {
    ss.spec.seed = ss.c.require_seed();
    const auto rows = as_usage([&] { return synth::generate_sentiment_corpus(ss.spec); });
    OutputSet out;
    out.write(ss.out, [&](std::ostream& o) { synth::write_labeled_csv(o, rows); });
    maybe_manifest(ss.c, "synth sentiment", out, {});
  });

  struct {
    Common c;
    synth::StreamSpec spec;
    std::string out, keywords_out, include_out, exclude_out, truth_out;
  } sw;
  auto* synth_stream = synth_cmd->add_subcommand("stream", "Timestamped posts with planted filter terms");
  add_common(synth_stream, sw.c, true);
  synth_stream->add_option("--tweets", sw.spec.n_tweets, "Posts")->check(CLI::NonNegativeNumber);
  synth_stream->add_option("--users", sw.spec.n_users, "Distinct users")->check(CLI::NonNegativeNumber);
  synth_stream->add_option("--out", sw.out, "Corpus (JSONL)")->required();
  synth_stream->add_option("--keywords-out", sw.keywords_out, "Planted keyword list");
  synth_stream->add_option("--include-out", sw.include_out, "Planted include terms");
  synth_stream->add_option("--exclude-out", sw.exclude_out, "Planted exclude terms");
  synth_stream->add_option("--truth-out", sw.truth_out, "Planted topic and polarity per record JSON");
  synth_stream->callback([&] {
    sw.spec.seed = sw.c.require_seed();
    const auto stream = as_usage([&] { return synth::generate_tweet_stream(sw.spec); });
    OutputSet out;
    out.write(sw.out, [&](std::ostream& o) { ingest::write_corpus(o, stream.records); });
    auto list = [&](const std::string& path, const std::vector<std::string>& terms) {
      if (path.empty()) return;
      out.write(path, [&](std::ostream& o) {
        for (const auto& t : terms) o << t << '\n';
      });
    };
    list(sw.keywords_out, sw.spec.keywords);
    list(sw.include_out, sw.spec.include_terms);
    list(sw.exclude_out, sw.spec.exclude_terms);
    if (!sw.truth_out.empty()) {
      ordered_json rows = ordered_json::array();
      for (std::size_t i = 0; i < stream.records.size(); ++i)
        rows.push_back({{"id", stream.records[i].id}, {"topic", stream.topic[i]}, {"polarity", stream.polarity[i]}});
      out.write_json(sw.truth_out, {{"records", rows}});
    }
    maybe_manifest(sw.c, "synth stream", out, {});
  });

  // ---- pipeline
  struct {
    std::string config, out;
    std::optional<std::uint64_t> seed;
    bool strict = false;
    std::vector<std::string> overrides;
  } pl;
  auto* pipeline = app.add_subcommand("pipeline", "Filter, topics, sentiment and reports in one run");
  pipeline->add_option("--config", pl.config, "Config file")->required()->check(CLI::ExistingFile);
  pipeline->add_option("--seed", pl.seed, "Random seed (overrides run.seed)");
  pipeline->add_option("--out", pl.out, "Output directory (overrides output.dir)");
  pipeline->add_flag("--strict", pl.strict, "Abort on malformed input; require a seed");
  pipeline->add_option("--set", pl.overrides, "Override a config value: section.key=value")->take_all();
  pipeline->callback([&] {
    auto settings = load_settings(pl.config);
    for (const auto& o : pl.overrides) apply_override(settings, o);
    if (pl.seed) settings.set("run.seed", std::to_string(*pl.seed));
    if (pl.strict) settings.set("input.strict", "true");
    if (!pl.out.empty()) settings.set("output.dir", fs::absolute(pl.out).string());
    const auto cfg = to_config(settings);
    if (cfg.strict && !cfg.seed) throw UsageError("a seed is required with --strict (--seed or run.seed)");
    const auto s = run_pipeline(settings, cfg);
    ordered_json j = {{"raw", s.raw}, {"kept", s.kept}, {"malformed", s.malformed}, {"documents", s.docs},
                      {"dropped_empty", s.dropped_docs}, {"K", s.num_topics}};
    j["held_out_accuracy"] = s.held_out_accuracy ? ordered_json(*s.held_out_accuracy) : ordered_json(nullptr);
    std::cout << j.dump() << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    error_record("usage", ExitCode::usage, e.what());
    return static_cast<int>(ExitCode::usage);
  } catch (const UsageError& e) {
    error_record("usage", ExitCode::usage, e.what());
    return static_cast<int>(ExitCode::usage);
  } catch (const InputError& e) {
    error_record("input", ExitCode::input, e.what(), e.line());
    return static_cast<int>(ExitCode::input);
  } catch (const std::exception& e) {
    error_record("runtime", ExitCode::runtime, e.what());
    return static_cast<int>(ExitCode::runtime);
  }
  return 0;
}
