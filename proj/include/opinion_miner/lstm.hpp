#pragma once

// Binary sentiment classifier: embedding -> single LSTM layer -> softmax head,
// trained with backpropagation through time and mini-batch SGD.
//
// Gate weights are stored stacked, rows [g*H, (g+1)*H) belonging to gate g
// in the order input, forget, output, candidate:
//
//   i = sigmoid(W_i x + U_i h + b_i)      f = sigmoid(W_f x + U_f h + b_f)
//   o = sigmoid(W_o x + U_o h + b_o)      g = tanh(W_c x + U_c h + b_c)
//   c' = f * c + i * g                    h' = o * tanh(c')
//
// Probabilities are softmax(head_W h_T + head_b); label 1 is positive.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "opinion_miner/common.hpp"
#include "opinion_miner/rng.hpp"

namespace opminer::lstm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum Gate : int { kInput = 0, kForget = 1, kOutput = 2, kCandidate = 3 };
inline constexpr std::array<const char*, 4> kGateNames = {"input", "forget", "output", "candidate"};

/// Numerically stable logistic function.
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct LstmDims {
  int vocab_size = 0;
  int embed_dim = 0;
  int hidden_dim = 0;
};

struct LstmParams {
  MatrixXd embedding;  // V x E
  MatrixXd W;          // 4H x E
  MatrixXd U;          // 4H x H
  VectorXd b;          // 4H
  MatrixXd head_W;     // 2 x H
  VectorXd head_b;     // 2

  int vocab_size() const { return static_cast<int>(embedding.rows()); }
  int embed_dim() const { return static_cast<int>(embedding.cols()); }
  int hidden_dim() const { return static_cast<int>(U.cols()); }
  LstmDims dims() const { return {vocab_size(), embed_dim(), hidden_dim()}; }

  static LstmParams zeros(const LstmDims& d) {
    if (d.vocab_size < 1 || d.embed_dim < 1 || d.hidden_dim < 1)
      throw std::invalid_argument("lstm: dimensions must be positive");
    const int H = d.hidden_dim;
    return {MatrixXd::Zero(d.vocab_size, d.embed_dim), MatrixXd::Zero(4 * H, d.embed_dim), MatrixXd::Zero(4 * H, H),
            VectorXd::Zero(4 * H), MatrixXd::Zero(2, H), VectorXd::Zero(2)};
  }

  /// Weights uniform in (-scale, scale), biases zero except the forget gate.
  static LstmParams init(const LstmDims& d, Rng& rng, double scale = 0.08, double forget_bias = 1.0) {
    auto p = zeros(d);
    auto fill = [&](MatrixXd& m) {
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = (2.0 * rng.uniform() - 1.0) * scale;
    };
    fill(p.embedding);
    fill(p.W);
    fill(p.U);
    fill(p.head_W);
    p.b.segment(kForget * d.hidden_dim, d.hidden_dim).setConstant(forget_bias);
    return p;
  }

  bool all_finite() const {
    return embedding.allFinite() && W.allFinite() && U.allFinite() && b.allFinite() && head_W.allFinite() &&
           head_b.allFinite();
  }
};

/// Visits every scalar in the documented flat order: embedding (row-major),
/// then per gate W_g, U_g (row-major) and b_g, then head_W (row-major) and
/// head_b. `group` names the parameter group of each scalar.
template <class Params, class Fn>
void for_each_param(Params& p, Fn&& fn) {
  const int H = p.hidden_dim();
  for (Eigen::Index r = 0; r < p.embedding.rows(); ++r)
    for (Eigen::Index c = 0; c < p.embedding.cols(); ++c) fn(std::string("embedding"), p.embedding(r, c));
  for (int g = 0; g < 4; ++g) {
    const std::string name = kGateNames[g];
    for (int r = g * H; r < (g + 1) * H; ++r)
      for (Eigen::Index c = 0; c < p.W.cols(); ++c) fn(name + ".W", p.W(r, c));
    for (int r = g * H; r < (g + 1) * H; ++r)
      for (Eigen::Index c = 0; c < p.U.cols(); ++c) fn(name + ".U", p.U(r, c));
    for (int r = g * H; r < (g + 1) * H; ++r) fn(name + ".b", p.b(r));
  }
  for (Eigen::Index r = 0; r < p.head_W.rows(); ++r)
    for (Eigen::Index c = 0; c < p.head_W.cols(); ++c) fn(std::string("head.W"), p.head_W(r, c));
  for (Eigen::Index r = 0; r < p.head_b.size(); ++r) fn(std::string("head.b"), p.head_b(r));
}

// ---------------------------------------------------------------------------
// Forward

struct StepCache {
  int token = -1;
  VectorXd x, h_prev, c_prev;
  VectorXd i, f, o, g;
  VectorXd c, tanh_c, h;
};

inline StepCache cell_forward(const VectorXd& x, const VectorXd& h_prev, const VectorXd& c_prev,
                              const LstmParams& p) {
  const int H = p.hidden_dim();
  if (x.size() != p.embed_dim() || h_prev.size() != H || c_prev.size() != H)
    throw std::invalid_argument("lstm: cell input dimension mismatch");
  const VectorXd z = p.W * x + p.U * h_prev + p.b;
  StepCache s;
  s.x = x;
  s.h_prev = h_prev;
  s.c_prev = c_prev;
  auto sig = [](double v) { return sigmoid(v); };
  s.i = z.segment(kInput * H, H).unaryExpr(sig);
  s.f = z.segment(kForget * H, H).unaryExpr(sig);
  s.o = z.segment(kOutput * H, H).unaryExpr(sig);
  s.g = z.segment(kCandidate * H, H).array().tanh();
  s.c = s.f.cwiseProduct(c_prev) + s.i.cwiseProduct(s.g);
  s.tanh_c = s.c.array().tanh();
  s.h = s.o.cwiseProduct(s.tanh_c);
  return s;
}

inline Eigen::Vector2d softmax(const Eigen::Vector2d& logits) {
  const double m = logits.maxCoeff();
  Eigen::Vector2d e = (logits.array() - m).exp();
  return e / e.sum();
}

struct ForwardResult {
  Eigen::Vector2d probabilities;
  std::vector<StepCache> steps;
};

inline ForwardResult forward(std::span<const int> tokens, const LstmParams& p) {
  if (tokens.empty()) throw std::invalid_argument("lstm: empty token sequence");
  const int H = p.hidden_dim();
  ForwardResult out;
  out.steps.reserve(tokens.size());
  VectorXd h = VectorXd::Zero(H);
  VectorXd c = VectorXd::Zero(H);
  for (int t : tokens) {
    if (t < 0 || t >= p.vocab_size()) throw std::invalid_argument("lstm: token id out of range");
    out.steps.push_back(cell_forward(p.embedding.row(t).transpose(), h, c, p));
    out.steps.back().token = t;
    h = out.steps.back().h;
    c = out.steps.back().c;
  }
  out.probabilities = softmax(p.head_W * h + p.head_b);
  return out;
}

/// Cross-entropy -log(prob[label]) with the probability floored at 1e-12.
inline double loss(const Eigen::Vector2d& probabilities, int label) {
  return -std::log(std::max(probabilities(label), 1e-12));
}

// ---------------------------------------------------------------------------
// Backward

struct LstmGradients {
  std::map<int, VectorXd> embedding_rows;  // only rows of tokens that occurred
  MatrixXd W, U;
  VectorXd b;
  MatrixXd head_W;
  VectorXd head_b;

  static LstmGradients zeros(const LstmDims& d) {
    const int H = d.hidden_dim;
    return {{}, MatrixXd::Zero(4 * H, d.embed_dim), MatrixXd::Zero(4 * H, H), VectorXd::Zero(4 * H),
            MatrixXd::Zero(2, H), VectorXd::Zero(2)};
  }

  void set_zero() {
    embedding_rows.clear();
    W.setZero();
    U.setZero();
    b.setZero();
    head_W.setZero();
    head_b.setZero();
  }

  void add(const LstmGradients& o) {
    for (const auto& [t, row] : o.embedding_rows) {
      auto [it, fresh] = embedding_rows.try_emplace(t, row);
      if (!fresh) it->second += row;
    }
    W += o.W;
    U += o.U;
    b += o.b;
    head_W += o.head_W;
    head_b += o.head_b;
  }

  void scale(double s) {
    for (auto& [t, row] : embedding_rows) row *= s;
    W *= s;
    U *= s;
    b *= s;
    head_W *= s;
    head_b *= s;
  }

  double squared_norm() const {
    double n = W.squaredNorm() + U.squaredNorm() + b.squaredNorm() + head_W.squaredNorm() + head_b.squaredNorm();
    for (const auto& [t, row] : embedding_rows) n += row.squaredNorm();
    return n;
  }

  /// Gradient laid out exactly like the parameters.
  LstmParams dense(int vocab_size) const {
    LstmParams p{MatrixXd::Zero(vocab_size, W.cols()), W, U, b, head_W, head_b};
    for (const auto& [t, row] : embedding_rows) p.embedding.row(t) = row.transpose();
    return p;
  }
};

/// Accumulates d loss / d params for one sequence into `grads`, which must
/// be zeroed by the caller when a fresh gradient is wanted.
inline void backward_into(const ForwardResult& fwd, int label, const LstmParams& p, LstmGradients& grads) {
  const int H = p.hidden_dim();
  Eigen::Vector2d dy = fwd.probabilities;
  dy(label) -= 1.0;
  const auto& last = fwd.steps.back();
  grads.head_W.noalias() += dy * last.h.transpose();
  grads.head_b += dy;
  VectorXd dh = p.head_W.transpose() * dy;
  VectorXd dc_next = VectorXd::Zero(H);
  VectorXd dz(4 * H);
  for (auto it = fwd.steps.rbegin(); it != fwd.steps.rend(); ++it) {
    const auto& s = *it;
    const VectorXd d_o = dh.cwiseProduct(s.tanh_c);
    const VectorXd dc =
        dc_next + dh.cwiseProduct(s.o).cwiseProduct((1.0 - s.tanh_c.array().square()).matrix());
    dz.segment(kInput * H, H) = dc.cwiseProduct(s.g).cwiseProduct(s.i.cwiseProduct((1.0 - s.i.array()).matrix()));
    dz.segment(kForget * H, H) =
        dc.cwiseProduct(s.c_prev).cwiseProduct(s.f.cwiseProduct((1.0 - s.f.array()).matrix()));
    dz.segment(kOutput * H, H) = d_o.cwiseProduct(s.o.cwiseProduct((1.0 - s.o.array()).matrix()));
    dz.segment(kCandidate * H, H) = dc.cwiseProduct(s.i).cwiseProduct((1.0 - s.g.array().square()).matrix());
    grads.W.noalias() += dz * s.x.transpose();
    grads.U.noalias() += dz * s.h_prev.transpose();
    grads.b += dz;
    VectorXd dx = p.W.transpose() * dz;
    auto [row, fresh] = grads.embedding_rows.try_emplace(s.token, std::move(dx));
    if (!fresh) row->second += dx;
    dh = p.U.transpose() * dz;
    dc_next = dc.cwiseProduct(s.f);
  }
}

inline LstmGradients backward(const ForwardResult& fwd, int label, const LstmParams& p) {
  auto g = LstmGradients::zeros(p.dims());
  backward_into(fwd, label, p, g);
  return g;
}

/// Rescales to at most `max_norm` in global L2 norm; returns the norm before clipping.
inline double clip_gradients(LstmGradients& g, double max_norm) {
  const double norm = std::sqrt(g.squared_norm());
  if (max_norm > 0.0 && norm > max_norm) g.scale(max_norm / norm);
  return norm;
}

inline void apply_update(LstmParams& p, const LstmGradients& g, double learning_rate) {
  for (const auto& [t, row] : g.embedding_rows) p.embedding.row(t) -= learning_rate * row.transpose();
  p.W -= learning_rate * g.W;
  p.U -= learning_rate * g.U;
  p.b -= learning_rate * g.b;
  p.head_W -= learning_rate * g.head_W;
  p.head_b -= learning_rate * g.head_b;
}

// ---------------------------------------------------------------------------
// Training

struct LabeledExample {
  std::vector<int> tokens;
  int label = 0;  // 0 negative, 1 positive
};

struct LstmConfig {
  int batch_size = 32;
  int epochs = 7;
  int max_features = 2000;
  int embed_dim = 128;
  int hidden_dim = 196;
  double learning_rate = 0.05;
  double clip_norm = 5.0;
  double init_scale = 0.08;
  double forget_bias = 1.0;
  std::uint64_t seed = 0;
};

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
};

struct LstmClassifier {
  static constexpr int kVersion = 1;

  LstmConfig config;
  LstmParams params;
  double prior_positive = 0.5;  // positive share of the training set
  std::uint64_t vocab_hash = 0;
  std::vector<EpochLog> log;
  std::size_t skipped_empty = 0;
};

inline LstmClassifier train(std::span<const LabeledExample> dataset, int vocab_size, const LstmConfig& cfg,
                            std::uint64_t vocab_hash = 0) {
  if (cfg.batch_size < 1 || cfg.epochs < 1) throw std::invalid_argument("lstm: batch_size and epochs must be >= 1");
  if (vocab_size < 1 || vocab_size > cfg.max_features)
    throw std::invalid_argument("lstm: vocabulary size must be in [1, max_features]");
  LstmClassifier clf;
  clf.config = cfg;
  clf.vocab_hash = vocab_hash;
  std::vector<const LabeledExample*> examples;
  std::size_t positives = 0;
  for (const auto& ex : dataset) {
    if (ex.label != 0 && ex.label != 1) throw std::invalid_argument("lstm: label must be 0 or 1");
    if (ex.tokens.empty()) {
      ++clf.skipped_empty;
      continue;
    }
    examples.push_back(&ex);
    positives += static_cast<std::size_t>(ex.label);
  }
  if (examples.empty()) throw std::invalid_argument("lstm: dataset is empty");
  if (positives == 0 || positives == examples.size())
    throw std::invalid_argument("lstm: dataset must contain both classes");
  clf.prior_positive = static_cast<double>(positives) / static_cast<double>(examples.size());

  const LstmDims dims{vocab_size, cfg.embed_dim, cfg.hidden_dim};
  Rng init_rng(derive_seed(cfg.seed, fnv1a("lstm-init")));
  clf.params = LstmParams::init(dims, init_rng, cfg.init_scale, cfg.forget_bias);
  Rng order_rng(derive_seed(cfg.seed, fnv1a("lstm-order")));

  const unsigned workers = std::max(1u, std::min<unsigned>(thread_count(), static_cast<unsigned>(cfg.batch_size)));
  std::vector<LstmGradients> slots(std::min<std::size_t>(workers == 1 ? 1 : cfg.batch_size, examples.size()),
                                   LstmGradients::zeros(dims));
  std::vector<double> slot_loss(slots.size());
  std::vector<int> slot_correct(slots.size());
  auto batch_grad = LstmGradients::zeros(dims);

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch_grad.set_zero();
      // Per-example gradients are summed in example order regardless of how
      // many run concurrently, so results do not depend on the thread count.
      for (std::size_t chunk = start; chunk < end; chunk += slots.size()) {
        const std::size_t n = std::min(slots.size(), end - chunk);
        parallel_for(
            n,
            [&](std::size_t s) {
              const auto& ex = *examples[order[chunk + s]];
              const auto fwd = forward(ex.tokens, clf.params);
              slot_loss[s] = loss(fwd.probabilities, ex.label);
              slot_correct[s] = (fwd.probabilities(1) >= fwd.probabilities(0) ? 1 : 0) == ex.label;
              slots[s].set_zero();
              backward_into(fwd, ex.label, clf.params, slots[s]);
            },
            workers);
        for (std::size_t s = 0; s < n; ++s) {
          batch_grad.add(slots[s]);
          loss_sum += slot_loss[s];
          correct += static_cast<std::size_t>(slot_correct[s]);
        }
      }
      batch_grad.scale(1.0 / static_cast<double>(end - start));
      clip_gradients(batch_grad, cfg.clip_norm);
      apply_update(clf.params, batch_grad, cfg.learning_rate);
    }
    clf.log.push_back({epoch + 1, loss_sum / static_cast<double>(order.size()),
                       static_cast<double>(correct) / static_cast<double>(order.size())});
  }
  return clf;
}

// ---------------------------------------------------------------------------
// Prediction and evaluation

struct Prediction {
  int polarity = 0;
  double prob_positive = 0.0;
  bool from_prior = false;  // empty input: decided by the training class ratio
};

/// Ties at 0.5 predict positive.
inline Prediction predict(const LstmClassifier& clf, std::span<const int> tokens) {
  if (tokens.empty()) return {clf.prior_positive >= 0.5 ? 1 : 0, clf.prior_positive, true};
  const auto fwd = forward(tokens, clf.params);
  return {fwd.probabilities(1) >= fwd.probabilities(0) ? 1 : 0, fwd.probabilities(1), false};
}

inline std::vector<Prediction> predict(const LstmClassifier& clf, std::span<const std::vector<int>> sequences) {
  std::vector<Prediction> out(sequences.size());
  parallel_for(sequences.size(), [&](std::size_t i) { out[i] = predict(clf, sequences[i]); });
  return out;
}

struct Metrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  std::optional<double> precision;  // absent when nothing was predicted positive
  std::optional<double> recall;     // absent when there are no positive labels
  std::optional<double> f1;         // absent when precision or recall is, or both are zero
  std::vector<std::string> notes;

  std::size_t total() const { return tp + fp + tn + fn; }
};

inline double f1_score(double precision, double recall) { return 2.0 * precision * recall / (precision + recall); }

inline Metrics metrics_from_confusion(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  if (m.total() == 0) throw std::invalid_argument("evaluate: no predictions");
  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(m.total());
  if (tp + fp > 0)
    m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  else
    m.notes.push_back("precision undefined: no positive predictions");
  if (tp + fn > 0)
    m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  else
    m.notes.push_back("recall undefined: no positive labels");
  if (m.precision && m.recall && *m.precision + *m.recall > 0.0)
    m.f1 = f1_score(*m.precision, *m.recall);
  else
    m.notes.push_back("f1 undefined");
  return m;
}

inline Metrics evaluate(std::span<const int> predicted, std::span<const int> gold) {
  if (predicted.size() != gold.size()) throw std::invalid_argument("evaluate: length mismatch");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool p = predicted[i] == 1, g = gold[i] == 1;
    if (p && g) ++tp;
    else if (p) ++fp;
    else if (g) ++fn;
    else ++tn;
  }
  return metrics_from_confusion(tp, fp, tn, fn);
}

inline nlohmann::ordered_json metrics_to_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["tn"] = m.tn;
  j["fn"] = m.fn;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision ? nlohmann::ordered_json(*m.precision) : nlohmann::ordered_json(nullptr);
  j["recall"] = m.recall ? nlohmann::ordered_json(*m.recall) : nlohmann::ordered_json(nullptr);
  j["f1"] = m.f1 ? nlohmann::ordered_json(*m.f1) : nlohmann::ordered_json(nullptr);
  j["notes"] = m.notes;
  return j;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json classifier_to_json(const LstmClassifier& clf) {
  nlohmann::ordered_json j;
  j["version"] = LstmClassifier::kVersion;
  const auto& c = clf.config;
  j["config"] = {{"batch_size", c.batch_size},   {"epochs", c.epochs},
                 {"max_features", c.max_features}, {"embed_dim", c.embed_dim},
                 {"hidden_dim", c.hidden_dim},   {"learning_rate", c.learning_rate},
                 {"clip_norm", c.clip_norm},     {"init_scale", c.init_scale},
                 {"forget_bias", c.forget_bias}, {"seed", c.seed}};
  j["vocab_hash"] = hex64(clf.vocab_hash);
  j["vocab_size"] = clf.params.vocab_size();
  j["prior_positive"] = clf.prior_positive;
  j["layout"] = "embedding, {input,forget,output,candidate}.{W,U,b}, head.W, head.b; matrices row-major";
  std::vector<double> flat;
  for_each_param(clf.params, [&](const std::string&, double v) { flat.push_back(v); });
  j["params"] = flat;
  nlohmann::ordered_json log = nlohmann::ordered_json::array();
  for (const auto& e : clf.log)
    log.push_back({{"epoch", e.epoch}, {"mean_loss", e.mean_loss}, {"train_accuracy", e.train_accuracy}});
  j["training_log"] = log;
  return j;
}

inline LstmClassifier classifier_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != LstmClassifier::kVersion) throw InputError("unsupported classifier version");
    LstmClassifier clf;
    const auto& c = j.at("config");
    auto& cfg = clf.config;
    cfg.batch_size = c.at("batch_size").get<int>();
    cfg.epochs = c.at("epochs").get<int>();
    cfg.max_features = c.at("max_features").get<int>();
    cfg.embed_dim = c.at("embed_dim").get<int>();
    cfg.hidden_dim = c.at("hidden_dim").get<int>();
    cfg.learning_rate = c.at("learning_rate").get<double>();
    cfg.clip_norm = c.at("clip_norm").get<double>();
    cfg.init_scale = c.at("init_scale").get<double>();
    cfg.forget_bias = c.at("forget_bias").get<double>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    clf.vocab_hash = std::stoull(j.at("vocab_hash").get<std::string>(), nullptr, 16);
    clf.prior_positive = j.at("prior_positive").get<double>();
    clf.params = LstmParams::zeros({j.at("vocab_size").get<int>(), cfg.embed_dim, cfg.hidden_dim});
    const auto flat = j.at("params").get<std::vector<double>>();
    std::size_t n = 0;
    for_each_param(clf.params, [&](const std::string&, double& v) {
      if (n < flat.size()) v = flat[n];
      ++n;
    });
    if (n != flat.size()) throw InputError("classifier parameter count does not match its dimensions");
    for (const auto& e : j.at("training_log"))
      clf.log.push_back({e.at("epoch").get<int>(), e.at("mean_loss").get<double>(), e.at("train_accuracy").get<double>()});
    return clf;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed classifier: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("malformed classifier: ") + e.what());
  }
}

}  // namespace opminer::lstm
