#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "opinion_miner/common.hpp"
#include "opinion_miner/config.hpp"
#include "opinion_miner/ingest.hpp"
#include "opinion_miner/synth.hpp"

namespace fs = std::filesystem;
using namespace opminer;

namespace {

struct Result {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("om_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override {
    if (!HasFailure()) fs::remove_all(dir_);
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  Result run(const std::string& args) {
    const auto out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && '" + OPINION_MINER_CLI + "' " + args + " > '" +
                            out.string() + "' 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  void make_stream(int tweets = 600) {
    auto r = run("synth stream --seed 5 --tweets " + std::to_string(tweets) +
                 " --out stream.jsonl --keywords-out kw.txt --include-out inc.txt --exclude-out exc.txt");
    ASSERT_EQ(r.code, 0) << r.err;
  }

  void write(const std::string& name, const std::string& body) {
    std::ofstream(dir_ / name, std::ios::binary) << body;
  }

  fs::path dir_;
};

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  return files;
}

nlohmann::json error_of(const Result& r) {
  const auto line = r.err.substr(r.err.rfind('{', r.err.find("\"error\"")));
  return nlohmann::json::parse(line).at("error");
}

}  // namespace

TEST_F(CliTest, FilterWritesCorpusAndSummaryTable) {
  make_stream();
  auto r = run("filter --input stream.jsonl --keywords kw.txt --include inc.txt --exclude exc.txt "
               "--out f.jsonl --report r.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("NYC keyword filtering"), std::string::npos);

  // Oracle: the library's planted id sets from the same generator call.
  synth::StreamSpec spec;
  spec.seed = 5;
  spec.n_tweets = 600;
  const auto s = synth::generate_tweet_stream(spec);
  std::set<std::string> expected;
  for (const auto& id : s.keyword_ids)
    if (s.include_ids.count(id)) expected.insert(id);

  std::ifstream in(path("f.jsonl"));
  const auto kept = ingest::parse_corpus(in).records;
  std::set<std::string> got;
  for (const auto& rec : kept) got.insert(rec.id);
  EXPECT_EQ(got, expected);

  std::ifstream csv(path("r.csv"));
  const auto rows = read_csv(csv);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"stage", "tweets", "tweet_pct", "users", "user_pct"}));
  EXPECT_EQ(rows[1][1], "600");
  EXPECT_EQ(rows[2][1], std::to_string(s.keyword_ids.size()));
  EXPECT_EQ(rows[3][1], std::to_string(expected.size()));
}

TEST_F(CliTest, MalformedLineSkippedOrFatalUnderStrict) {
  const std::string fx = OPINION_MINER_FIXTURES;
  write("inc.txt", "NYC\n");
  const std::string base = "filter --input '" + fx + "/corpus_one_bad.jsonl' --keywords '" + fx +
                           "/keywords.txt' --include inc.txt --out f.jsonl --report r.csv --issues-out issues.csv";
  auto lenient = run(base);
  ASSERT_EQ(lenient.code, 0) << lenient.err;
  std::ifstream issues(path("issues.csv"));
  const auto rows = read_csv(issues);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][0], "2");

  auto strict = run(base + " --strict");
  EXPECT_EQ(strict.code, 3);
  const auto e = error_of(strict);
  EXPECT_EQ(e.at("kind"), "input");
  EXPECT_EQ(e.at("line"), 2);
}

TEST_F(CliTest, ExitCodes) {
  make_stream(100);
  EXPECT_EQ(run("filter --bogus").code, 2);
  EXPECT_EQ(run("").code, 2);
  auto missing = run("filter --input nope.jsonl --keywords kw.txt --include inc.txt --out a --report b");
  EXPECT_EQ(missing.code, 2);
  EXPECT_EQ(error_of(missing).at("kind"), "usage");
  EXPECT_EQ(run("lda-train --input stream.jsonl --vocab-out v.json --model-out m.json --strict").code, 2);
  EXPECT_EQ(run("lda-train --input stream.jsonl --vocab-out v.json --model-out m.json --alpha -1").code, 2);

  write("bad.ini", "[lda]\nno_such_key = 1\n");
  EXPECT_EQ(run("pipeline --config bad.ini").code, 2);
  write("nocorpus.ini", "[input]\ncorpus = missing.jsonl\nkeywords = kw.txt\ninclude = inc.txt\n");
  EXPECT_EQ(run("pipeline --config nocorpus.ini --out o").code, 2);

  write("labels.csv", "text,label\nhello,7\n");
  EXPECT_EQ(run("sentiment-train --labeled labels.csv --model-out m.json --vocab-out v.json").code, 3);
  write("garbage.jsonl", "not json\n");
  EXPECT_EQ(run("stats --input garbage.jsonl --strict").code, 3);

  write("afile", "x");
  auto rt = run("filter --input stream.jsonl --keywords kw.txt --include inc.txt --out afile/sub/f.jsonl --report r.csv");
  EXPECT_EQ(rt.code, 4);
  EXPECT_EQ(error_of(rt).at("kind"), "runtime");

  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(CliTest, LdaTuneBestRowMatchesRescanOfItsCsv) {
  make_stream(1200);
  ASSERT_EQ(run("filter --input stream.jsonl --keywords kw.txt --include inc.txt --exclude exc.txt "
                "--out f.jsonl --report r.csv")
                .code,
            0);
  auto r = run("lda-tune --input f.jsonl --seed 3 --k-grid 2,3,4,5 --alpha-grid 0.05,asymmetric --eta-grid 0.05,0.5 "
               "--sweeps 60 --strategy full --out grid.csv --summary-out best.json");
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream csv(path("grid.csv"));
  const auto rows = read_csv(csv);
  ASSERT_EQ(rows.size(), 1u + 4 * 2 * 2);
  std::size_t arg = 1;
  for (std::size_t i = 2; i < rows.size(); ++i)
    if (parse_double(rows[i][3]) > parse_double(rows[arg][3])) arg = i;
  const auto best = nlohmann::json::parse(slurp(path("best.json"))).at("best");
  EXPECT_EQ(std::to_string(best.at("K").get<int>()), rows[arg][0]);
  EXPECT_EQ(best.at("alpha").get<std::string>(), rows[arg][1]);
  EXPECT_EQ(format_double(best.at("eta").get<double>()), rows[arg][2]);
  EXPECT_EQ(format_double(best.at("mean_coherence").get<double>()), rows[arg][3]);
}

TEST_F(CliTest, PipelineIsDeterministicAndEqualsManualComposition) {
  make_stream(1000);
  ASSERT_EQ(run("synth sentiment --seed 5 --n 1500 --out labeled.csv").code, 0);
  write("c.toml",
        "# pipeline test\n"
        "[input]\ncorpus = \"stream.jsonl\"\nkeywords = \"kw.txt\"\ninclude = \"inc.txt\"\n"
        "exclude = \"exc.txt\"\nlabeled = \"labeled.csv\"\n"
        "[lda]\nsweeps = 50\ntune = true\nk_grid = [3, 4]\nalpha_grid = [\"0.1\", \"asymmetric\"]\neta_grid = [0.1]\n"
        "[lstm]\nembed_dim = 16\nhidden_dim = 16\nlearning_rate = 0.5\n");
  auto a = run("pipeline --config c.toml --seed 9 --out run1");
  ASSERT_EQ(a.code, 0) << a.err;
  auto b = run("pipeline --config c.toml --seed 9 --out run2");
  ASSERT_EQ(b.code, 0) << b.err;
  const auto t1 = tree(path("run1")), t2 = tree(path("run2"));
  EXPECT_EQ(t1, t2);
  for (const char* f : {"manifest.json", "filtered/corpus.jsonl", "models/lda.json", "models/sentiment.json",
                        "reports/heatmap.csv", "reports/sentiment_series.csv", "reports/grid.csv"})
    EXPECT_TRUE(t1.count(f)) << f;

  // A different seed changes the models.
  ASSERT_EQ(run("pipeline --config c.toml --seed 10 --out run3").code, 0);
  EXPECT_NE(tree(path("run3")).at("models/lda.json"), t1.at("models/lda.json"));

  // Manual composition with the same intermediates.
  const auto best = nlohmann::json::parse(t1.at("reports/grid_summary.json")).at("best");
  ASSERT_EQ(run("filter --input stream.jsonl --keywords kw.txt --include inc.txt --exclude exc.txt "
                "--out m/f.jsonl --report m/filter_summary.csv --keyword-out m/keyword.jsonl")
                .code,
            0);
  ASSERT_EQ(run("lda-tune --input m/f.jsonl --seed 9 --k-grid 3,4 --alpha-grid 0.1,asymmetric --eta-grid 0.1 "
                "--sweeps 50 --out m/grid.csv")
                .code,
            0);
  ASSERT_EQ(run("lda-train --input m/f.jsonl --seed 9 --sweeps 50 --k " + std::to_string(best.at("K").get<int>()) +
                " --alpha " + best.at("alpha").get<std::string>() + " --eta " +
                format_double(best.at("eta").get<double>()) +
                " --vocab-out m/vocab.json --model-out m/lda.json --topics-out m/topics.csv"
                " --doc-topics-out m/doc_topics.csv")
                .code,
            0);
  ASSERT_EQ(run("coherence --input m/f.jsonl --model m/lda.json --vocab m/vocab.json --out m/coherence.csv").code, 0);
  ASSERT_EQ(run("sentiment-train --labeled labeled.csv --seed 9 --embed-dim 16 --hidden-dim 16 --learning-rate 0.5 "
                "--model-out m/sentiment.json --vocab-out m/sentiment_vocab.json --metrics-out m/metrics.json")
                .code,
            0);
  ASSERT_EQ(run("sentiment-predict --input m/f.jsonl --model m/sentiment.json --vocab m/sentiment_vocab.json "
                "--out m/predictions.csv")
                .code,
            0);
  ASSERT_EQ(run("report --input m/f.jsonl --raw stream.jsonl --out-dir m/reports --doc-topics m/doc_topics.csv "
                "--topics " + std::to_string(best.at("K").get<int>()) + " --predictions m/predictions.csv")
                .code,
            0);
  const std::vector<std::pair<std::string, std::string>> same = {
      {"m/f.jsonl", "filtered/corpus.jsonl"},
      {"m/keyword.jsonl", "filtered/keyword.jsonl"},
      {"m/filter_summary.csv", "reports/filter_summary.csv"},
      {"m/grid.csv", "reports/grid.csv"},
      {"m/vocab.json", "models/vocab.json"},
      {"m/lda.json", "models/lda.json"},
      {"m/topics.csv", "reports/topics.csv"},
      {"m/doc_topics.csv", "reports/doc_topics.csv"},
      {"m/coherence.csv", "reports/coherence.csv"},
      {"m/sentiment.json", "models/sentiment.json"},
      {"m/sentiment_vocab.json", "models/sentiment_vocab.json"},
      {"m/metrics.json", "reports/sentiment_metrics.json"},
      {"m/predictions.csv", "reports/predictions.csv"},
      {"m/reports/heatmap.csv", "reports/heatmap.csv"},
      {"m/reports/sentiment_series.csv", "reports/sentiment_series.csv"},
      {"m/reports/involvers.csv", "reports/involvers.csv"},
      {"m/reports/involvers_overall.csv", "reports/involvers_overall.csv"},
      {"m/reports/volume_raw.csv", "reports/volume_raw.csv"},
      {"m/reports/volume_filtered.csv", "reports/volume_filtered.csv"},
  };
  for (const auto& [manual, piped] : same) EXPECT_EQ(slurp(path(manual)), t1.at(piped)) << manual;
}

TEST_F(CliTest, ManifestRecordsSeedHashAndRelativeOutputs) {
  make_stream(300);
  write("c.ini", "[input]\ncorpus = stream.jsonl\nkeywords = kw.txt\ninclude = inc.txt\n[lda]\nk = 3\nsweeps = 20\n");
  ASSERT_EQ(run("pipeline --config c.ini --seed 4 --out out").code, 0);
  const auto m = nlohmann::json::parse(slurp(path("out/manifest.json")));
  EXPECT_EQ(m.at("seed"), 4);
  EXPECT_EQ(m.at("config_hash").get<std::string>().size(), 16u);
  EXPECT_EQ(m.at("config").at("lda.k"), "3");
  EXPECT_FALSE(m.at("config").contains("output.dir"));
  std::set<std::string> listed;
  for (const auto& o : m.at("outputs")) {
    const auto p = o.at("path").get<std::string>();
    EXPECT_FALSE(fs::path(p).is_absolute());
    EXPECT_EQ(o.at("fnv1a"), hex64(fnv1a(slurp(path("out") / p))));
    listed.insert(p);
  }
  EXPECT_TRUE(listed.count("reports/heatmap.csv"));
  EXPECT_FALSE(listed.count("reports/predictions.csv"));  // no labeled data configured

  // Overrides win over the file and change the hash.
  ASSERT_EQ(run("pipeline --config c.ini --seed 4 --out out2 --set lda.k=4").code, 0);
  const auto m2 = nlohmann::json::parse(slurp(path("out2/manifest.json")));
  EXPECT_EQ(m2.at("config").at("lda.k"), "4");
  EXPECT_NE(m2.at("config_hash"), m.at("config_hash"));
}

TEST(Config, ListsAndQuotes) {
  EXPECT_EQ(app::unquote("  \"a b\" "), "a b");
  EXPECT_EQ(app::unquote("'x'"), "x");
  EXPECT_EQ(app::parse_list("[2, \"asymmetric\", 0.5]"), (std::vector<std::string>{"2", "asymmetric", "0.5"}));
  EXPECT_EQ(app::parse_list("1,2,,3"), (std::vector<std::string>{"1", "2", "3"}));
  EXPECT_TRUE(app::parse_list("[]").empty());
}

TEST_F(CliTest, ConfigFileResolvesPathsAndRejectsUnknownKeys) {
  write("corpus.jsonl", "");
  write("kw.txt", "x\n");
  write("inc.txt", "y\n");
  write("run.ini",
        "[input]\ncorpus = \"corpus.jsonl\"\nkeywords = kw.txt\ninclude = inc.txt\n"
        "[lda]\nk = 4\nalpha = asymmetric\nk_grid = [3, 5]\n[run]\nseed = 9\n");
  auto s = app::load_settings((dir_ / "run.ini").string());
  auto c = app::to_config(s);
  EXPECT_EQ(fs::path(c.corpus), dir_ / "corpus.jsonl");
  EXPECT_EQ(c.lda.num_topics, 4);
  EXPECT_EQ(c.k_grid, (std::vector<int>{3, 5}));
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.lda.seed, 9u);
  EXPECT_EQ(c.lstm.seed, 9u);

  const auto h = app::settings_hash(s);
  app::apply_override(s, "output.dir=elsewhere");
  EXPECT_EQ(app::settings_hash(s), h);
  app::apply_override(s, "lda.k = 5");
  EXPECT_NE(app::settings_hash(s), h);
  EXPECT_EQ(app::to_config(s).lda.num_topics, 5);

  EXPECT_THROW(app::apply_override(s, "lda.kk=3"), UsageError);
  EXPECT_THROW(app::apply_override(s, "lda.k"), UsageError);
  app::apply_override(s, "lda.k=0");
  EXPECT_THROW(app::to_config(s), UsageError);
  app::apply_override(s, "lda.k=3");
  app::apply_override(s, "input.exclude=missing.txt");
  EXPECT_THROW(app::to_config(s), UsageError);

  write("bad.ini", "[lda]\nwhat = 1\n");
  EXPECT_THROW(app::load_settings((dir_ / "bad.ini").string()), UsageError);
}
