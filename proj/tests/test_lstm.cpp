#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "opinion_miner/lstm.hpp"

using namespace opminer;
using namespace opminer::lstm;

namespace {

std::vector<double> flat(const LstmParams& p) {
  std::vector<double> out;
  for_each_param(p, [&](const std::string&, double v) { out.push_back(v); });
  return out;
}

// Largest per-scalar relative error within each parameter group.
std::map<std::string, double> gradient_check(LstmParams p, const std::vector<int>& tokens, int label) {
  const auto analytic = flat(backward(forward(tokens, p), label, p).dense(p.vocab_size()));
  std::map<std::string, double> worst;
  std::size_t n = 0;
  const double h = 1e-5;
  for_each_param(p, [&](const std::string& group, double& v) {
    const double saved = v;
    v = saved + h;
    const double up = loss(forward(tokens, p).probabilities, label);
    v = saved - h;
    const double down = loss(forward(tokens, p).probabilities, label);
    v = saved;
    const double numeric = (up - down) / (2 * h);
    const double a = analytic[n++];
    const double scale = std::max(std::fabs(a), std::fabs(numeric));
    const double rel = scale == 0.0 ? 0.0 : std::fabs(a - numeric) / scale;
    worst[group] = std::max(worst[group], rel);
  });
  return worst;
}

}  // namespace

TEST(Sigmoid, ValuesAndStability) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(2.0), 0.8807970779778823, 1e-9);
  for (double x : {0.1, 1.7, 13.0, 40.0}) EXPECT_NEAR(sigmoid(x) + sigmoid(-x), 1.0, 1e-15);
  EXPECT_TRUE(std::isfinite(sigmoid(800.0)));
  EXPECT_TRUE(std::isfinite(sigmoid(-800.0)));
  EXPECT_GT(sigmoid(-500.0), 0.0);
}

TEST(Cell, ZeroParamsGiveHalfGates) {
  auto p = LstmParams::zeros({3, 2, 4});
  auto s = cell_forward(VectorXd::Zero(2), VectorXd::Zero(4), VectorXd::Zero(4), p);
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(s.i(k), 0.5);
    EXPECT_EQ(s.f(k), 0.5);
    EXPECT_EQ(s.o(k), 0.5);
    EXPECT_EQ(s.g(k), 0.0);
    EXPECT_EQ(s.c(k), 0.0);
    EXPECT_EQ(s.h(k), 0.0);
  }
  EXPECT_THROW(cell_forward(VectorXd::Zero(3), VectorXd::Zero(4), VectorXd::Zero(4), p), std::invalid_argument);
}

TEST(Cell, ScalarHandComputation) {
  auto p = LstmParams::zeros({1, 1, 1});
  // Row order: input, forget, output, candidate.
  p.W << 0.5, -0.3, 0.8, 1.2;
  p.U << 0.1, 0.2, -0.4, 0.7;
  p.b << 0.0, 1.0, 0.2, -0.1;
  const double x = 0.9, h0 = -0.2, c0 = 0.4;
  auto sg = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const double i = sg(0.5 * x + 0.1 * h0), f = sg(-0.3 * x + 0.2 * h0 + 1.0), o = sg(0.8 * x - 0.4 * h0 + 0.2);
  const double g = std::tanh(1.2 * x + 0.7 * h0 - 0.1);
  const double c = f * c0 + i * g, h = o * std::tanh(c);
  auto s = cell_forward(VectorXd::Constant(1, x), VectorXd::Constant(1, h0), VectorXd::Constant(1, c0), p);
  EXPECT_NEAR(s.c(0), c, 1e-15);
  EXPECT_NEAR(s.h(0), h, 1e-15);
}

TEST(Cell, SaturatedForgetKeepsState) {
  auto p = LstmParams::zeros({1, 1, 2});
  p.b.segment(kForget * 2, 2).setConstant(60.0);
  auto s = cell_forward(VectorXd::Zero(1), VectorXd::Zero(2), VectorXd::Constant(2, 0.7), p);
  EXPECT_NEAR(s.c(0), 0.7 + 0.5 * 0.0, 1e-12);
}

TEST(Forward, SoftmaxAndProbabilities) {
  auto sm = softmax(Eigen::Vector2d(2.0, 0.0));
  EXPECT_NEAR(sm(0), 0.8808, 1e-4);
  EXPECT_NEAR(sm(1), 0.1192, 1e-4);
  EXPECT_NEAR(sm(0), std::exp(2.0) / (std::exp(2.0) + 1.0), 1e-15);
  auto big = softmax(Eigen::Vector2d(1000.0, -1000.0));
  EXPECT_TRUE(big.allFinite());

  Rng rng(4);
  auto p = LstmParams::init({10, 3, 4}, rng);
  p.head_W.setZero();
  auto r = forward(std::vector<int>{1, 2, 3}, p);
  EXPECT_EQ(r.probabilities(0), 0.5);
  EXPECT_EQ(r.probabilities(1), 0.5);
  p = LstmParams::init({10, 3, 4}, rng, 1.0);
  r = forward(std::vector<int>{9, 0, 4, 4}, p);
  EXPECT_NEAR(r.probabilities.sum(), 1.0, 1e-12);
  EXPECT_GT(r.probabilities.minCoeff(), 0.0);
  EXPECT_THROW(forward(std::vector<int>{}, p), std::invalid_argument);
  EXPECT_THROW(forward(std::vector<int>{10}, p), std::invalid_argument);
}

TEST(Loss, HandValues) {
  EXPECT_EQ(loss(Eigen::Vector2d(0.0, 1.0), 1), 0.0);
  EXPECT_NEAR(loss(Eigen::Vector2d(0.5, 0.5), 1), 0.6931471805599453, 1e-12);
  EXPECT_NEAR(loss(Eigen::Vector2d(0.75, 0.25), 1), 1.3862943611198906, 1e-9);
  EXPECT_NEAR(loss(Eigen::Vector2d(1.0, 0.0), 1), -std::log(1e-12), 1e-9);
}

TEST(Backward, GradientCheckAllGroups) {
  Rng rng(2024);
  for (int point = 0; point < 3; ++point) {
    auto p = LstmParams::init({7, 4, 5}, rng, 0.5, 0.3);
    p.head_b << 0.1, -0.2;
    std::vector<int> tokens(6);
    for (int& t : tokens) t = static_cast<int>(rng.uniform_index(7));
    const int label = static_cast<int>(rng.uniform_index(2));
    auto worst = gradient_check(p, tokens, label);
    EXPECT_EQ(worst.size(), 1u + 12u + 2u);
    for (const auto& [group, err] : worst) EXPECT_LT(err, 1e-4) << group;
  }
}

TEST(Backward, AbsentTokensHaveZeroGradient) {
  Rng rng(3);
  auto p = LstmParams::init({6, 3, 3}, rng);
  std::vector<int> tokens = {1, 4, 1};
  auto g = backward(forward(tokens, p), 0, p);
  EXPECT_EQ(g.embedding_rows.size(), 2u);
  auto dense = g.dense(6);
  for (int row : {0, 2, 3, 5}) EXPECT_EQ(dense.embedding.row(row).norm(), 0.0);
  EXPECT_GT(dense.embedding.row(1).norm(), 0.0);
}

TEST(Backward, ClippingBoundsGlobalNorm) {
  Rng rng(5);
  auto p = LstmParams::init({6, 3, 3}, rng, 2.0);
  auto g = backward(forward(std::vector<int>{1, 2, 3, 4, 5}, p), 1, p);
  const double before = std::sqrt(g.squared_norm());
  const double reported = clip_gradients(g, before / 2);
  EXPECT_DOUBLE_EQ(reported, before);
  EXPECT_NEAR(std::sqrt(g.squared_norm()), before / 2, 1e-12);
  auto h = g;
  clip_gradients(h, 1e9);
  EXPECT_EQ(h.W, g.W);
}

namespace {

std::vector<LabeledExample> toy_dataset(std::uint64_t seed, int n) {
  // Token 1 means positive, token 2 negative, tokens 3..9 are filler.
  Rng rng(seed);
  std::vector<LabeledExample> out;
  for (int i = 0; i < n; ++i) {
    LabeledExample ex;
    ex.label = i % 2;
    for (int k = 0, len = 3 + static_cast<int>(rng.uniform_index(4)); k < len; ++k)
      ex.tokens.push_back(3 + static_cast<int>(rng.uniform_index(7)));
    ex.tokens.insert(ex.tokens.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(ex.tokens.size())),
                     ex.label ? 1 : 2);
    out.push_back(ex);
  }
  return out;
}

}  // namespace

TEST(Train, LearnsToyTaskDeterministically) {
  auto data = toy_dataset(1, 200);
  LstmConfig cfg;
  cfg.embed_dim = 8;
  cfg.hidden_dim = 8;
  cfg.epochs = 20;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.5;
  cfg.seed = 3;
  auto a = train(data, 10, cfg);
  auto b = train(data, 10, cfg);
  EXPECT_EQ(flat(a.params), flat(b.params));
  ASSERT_EQ(a.log.size(), 20u);
  EXPECT_LT(a.log.back().mean_loss, a.log.front().mean_loss);

  auto test = toy_dataset(2, 100);
  std::vector<int> pred, gold;
  for (const auto& ex : test) {
    pred.push_back(predict(a, ex.tokens).polarity);
    gold.push_back(ex.label);
  }
  EXPECT_GE(evaluate(pred, gold).accuracy, 0.95);
}

TEST(Train, ResultIndependentOfThreadCount) {
  auto data = toy_dataset(4, 64);
  LstmConfig cfg;
  cfg.embed_dim = 4;
  cfg.hidden_dim = 5;
  cfg.epochs = 2;
  cfg.batch_size = 8;
  setenv("OPINION_MINER_THREADS", "1", 1);
  auto one = train(data, 10, cfg);
  setenv("OPINION_MINER_THREADS", "4", 1);
  auto four = train(data, 10, cfg);
  unsetenv("OPINION_MINER_THREADS");
  EXPECT_EQ(flat(one.params), flat(four.params));
}

TEST(Train, Preconditions) {
  std::vector<LabeledExample> one_class = {{{1, 2}, 1}, {{3}, 1}};
  LstmConfig cfg;
  cfg.embed_dim = 2;
  cfg.hidden_dim = 2;
  EXPECT_THROW(train(one_class, 5, cfg), std::invalid_argument);
  std::vector<LabeledExample> ok = {{{1, 2}, 1}, {{3}, 0}, {{}, 0}};
  EXPECT_THROW(train(ok, 2001, cfg), std::invalid_argument);
  std::vector<LabeledExample> bad_label = {{{1}, 2}, {{1}, 0}};
  EXPECT_THROW(train(bad_label, 5, cfg), std::invalid_argument);
  cfg.epochs = 1;
  auto clf = train(ok, 5, cfg);
  EXPECT_EQ(clf.skipped_empty, 1u);
  EXPECT_DOUBLE_EQ(clf.prior_positive, 0.5);
}

TEST(Predict, TieRuleBatchAndPrior) {
  Rng rng(6);
  LstmClassifier clf;
  clf.params = LstmParams::init({5, 3, 3}, rng);
  clf.params.head_W.setZero();
  auto tie = predict(clf, std::vector<int>{1, 2});
  EXPECT_EQ(tie.polarity, 1);
  EXPECT_EQ(tie.prob_positive, 0.5);

  clf.params.head_b << 0.0, std::log(7.0 / 3.0);
  auto skew = predict(clf, std::vector<int>{1});
  EXPECT_EQ(skew.polarity, 1);
  EXPECT_NEAR(skew.prob_positive, 0.7, 1e-12);

  clf.params = LstmParams::init({5, 3, 3}, rng, 1.0);
  std::vector<std::vector<int>> seqs = {{0, 1}, {4}, {2, 2, 3}, {}};
  clf.prior_positive = 0.3;
  auto batch = predict(clf, seqs);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    auto single = predict(clf, seqs[i]);
    EXPECT_EQ(batch[i].polarity, single.polarity);
    EXPECT_EQ(batch[i].prob_positive, single.prob_positive);
  }
  EXPECT_TRUE(batch[3].from_prior);
  EXPECT_EQ(batch[3].polarity, 0);
}

TEST(Metrics, HandConfusion) {
  auto m = metrics_from_confusion(3, 1, 4, 2);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.7);
  EXPECT_DOUBLE_EQ(*m.precision, 0.75);
  EXPECT_DOUBLE_EQ(*m.recall, 0.6);
  EXPECT_NEAR(*m.f1, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(f1_score(0.83, 0.79), 1.3114 / 1.62, 1e-15);
}

TEST(Metrics, EvaluateFromLabels) {
  std::vector<int> gold = {1, 0, 1, 1, 0};
  auto perfect = evaluate(gold, gold);
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(*perfect.precision, 1.0);
  EXPECT_EQ(*perfect.recall, 1.0);
  EXPECT_EQ(*perfect.f1, 1.0);
  std::vector<int> zeros = {0, 0, 0, 0, 0};
  auto none = evaluate(zeros, gold);
  EXPECT_FALSE(none.precision);
  EXPECT_EQ(*none.recall, 0.0);
  EXPECT_FALSE(none.f1);
  EXPECT_FALSE(none.notes.empty());
  EXPECT_TRUE(metrics_to_json(none)["precision"].is_null());
  EXPECT_THROW(evaluate(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
  EXPECT_THROW(evaluate(std::vector<int>{1}, gold), std::invalid_argument);
}

TEST(Serialization, ClassifierRoundTrip) {
  auto data = toy_dataset(9, 20);
  LstmConfig cfg;
  cfg.embed_dim = 3;
  cfg.hidden_dim = 4;
  cfg.epochs = 1;
  auto clf = train(data, 10, cfg, 0x1234);
  auto back = classifier_from_json(nlohmann::json::parse(classifier_to_json(clf).dump()));
  EXPECT_EQ(flat(back.params), flat(clf.params));
  EXPECT_EQ(back.vocab_hash, 0x1234u);
  EXPECT_EQ(back.prior_positive, clf.prior_positive);
  auto j = classifier_to_json(clf);
  j["params"].erase(0);
  EXPECT_THROW(classifier_from_json(j), InputError);
}
