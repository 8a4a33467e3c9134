#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "kwic/error.hpp"
#include "kwic/rng.hpp"
#include "kwic/vectorize.hpp"

namespace kwic {

// Occurrence classifier hyperparameters. Filter count and kernel size
// default to the fixed architecture values; dropout rate and epochs are the
// two knobs meant for grid search.
struct CnnConfig {
  int embed_dim = 64;
  int n_filters = 64;
  int kernel_size = 2;
  double dropout_rate = 0.2;
  int epochs = 10;
  double learning_rate = 1e-3;
  int batch_size = 64;
  std::uint64_t seed = 0;
};

// Trained occurrence classifier: learned embedding, one 1-D convolution
// layer (stored as one embed_dim x n_filters matrix per kernel tap), and an
// affine head. Templated on scalar so the backward pass can be verified in
// extended precision.
template <typename Scalar>
struct CnnModel {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix embedding;               // (vocab_size + 2) x embed_dim; rows 0/1 = pad/oov
  std::vector<Matrix> conv_taps;  // kernel_size entries, embed_dim x n_filters
  Vector conv_bias;               // n_filters
  Vector dense_weight;            // n_filters
  Scalar dense_bias = Scalar(0);

  CnnConfig config;
  int sequence_length = 0;
  std::int32_t vocab_size = 0;
  std::uint64_t vocab_fingerprint = 0;

  int conv_positions() const { return sequence_length - config.kernel_size + 1; }

  bool all_finite() const {
    bool ok = embedding.allFinite() && conv_bias.allFinite() &&
              dense_weight.allFinite() && std::isfinite(static_cast<double>(dense_bias));
    for (const auto& tap : conv_taps) ok = ok && tap.allFinite();
    return ok;
  }

  template <typename Other>
  CnnModel<Other> cast() const {
    CnnModel<Other> out;
    out.embedding = embedding.template cast<Other>();
    for (const auto& tap : conv_taps) out.conv_taps.push_back(tap.template cast<Other>());
    out.conv_bias = conv_bias.template cast<Other>();
    out.dense_weight = dense_weight.template cast<Other>();
    out.dense_bias = static_cast<Other>(dense_bias);
    out.config = config;
    out.sequence_length = sequence_length;
    out.vocab_size = vocab_size;
    out.vocab_fingerprint = vocab_fingerprint;
    return out;
  }
};

// Logistic squash onto the open interval (0,1).
template <typename Scalar>
Scalar logistic(Scalar z) {
  Scalar p;
  if (z >= Scalar(0)) {
    p = Scalar(1) / (Scalar(1) + std::exp(-z));
  } else {
    const Scalar e = std::exp(z);
    p = e / (Scalar(1) + e);
  }
  const Scalar lo = Scalar(1e-300);
  const Scalar hi = Scalar(1) - Scalar(std::numeric_limits<double>::epsilon()) / Scalar(2);
  if (p < lo) p = lo;
  if (p > hi) p = hi;
  return p;
}

// Binary cross-entropy from the raw logit; stable for large |z|.
template <typename Scalar>
Scalar bce_from_logit(Scalar z, Scalar y) {
  const Scalar zmax = z > Scalar(0) ? z : Scalar(0);
  return zmax - y * z + std::log1p(std::exp(-std::abs(z)));
}

namespace detail {

// Per-sample activations, reused across samples to avoid reallocation.
template <typename Scalar>
struct CnnWorkspace {
  using Matrix = typename CnnModel<Scalar>::Matrix;
  using Vector = typename CnnModel<Scalar>::Vector;

  Matrix embedded;   // L x D
  Matrix preact;     // P x F, before the rectifier
  Matrix act;        // P x F, rectified and (in training) dropped out
  Matrix keep;       // P x F inverted-dropout scale, or empty
  Vector pooled;     // F
  std::vector<int> argmax;  // winning position per filter
  Scalar logit = Scalar(0);
  Scalar prob = Scalar(0);

  Matrix d_pre;      // P x F backward scratch
  Matrix d_embedded; // L x D
};

// Accumulating parameter gradients, same shapes as the model.
template <typename Scalar>
struct CnnGradients {
  using Matrix = typename CnnModel<Scalar>::Matrix;
  using Vector = typename CnnModel<Scalar>::Vector;

  Matrix embedding;
  std::vector<Matrix> conv_taps;
  Vector conv_bias;
  Vector dense_weight;
  Scalar dense_bias = Scalar(0);

  void resize_like(const CnnModel<Scalar>& m) {
    embedding.setZero(m.embedding.rows(), m.embedding.cols());
    conv_taps.assign(m.conv_taps.size(), Matrix::Zero(m.conv_taps[0].rows(), m.conv_taps[0].cols()));
    conv_bias.setZero(m.conv_bias.size());
    dense_weight.setZero(m.dense_weight.size());
    dense_bias = Scalar(0);
  }

  void set_zero() {
    embedding.setZero();
    for (auto& t : conv_taps) t.setZero();
    conv_bias.setZero();
    dense_weight.setZero();
    dense_bias = Scalar(0);
  }
};

// Embedding lookup -> valid 1-D convolution (L-1 positions for kernel 2,
// rectified) -> inverted dropout when training -> 1-max pooling per filter
// -> affine head -> logistic. Dropout draws one keep decision per (position,
// filter) cell in row-major order.
template <typename Scalar>
Scalar forward_pass(const CnnModel<Scalar>& model, const std::vector<std::int32_t>& indices,
                    bool training, Rng* rng, CnnWorkspace<Scalar>& ws) {
  const int L = model.sequence_length;
  const int D = model.config.embed_dim;
  const int F = model.config.n_filters;
  const int K = model.config.kernel_size;
  const int P = model.conv_positions();

  if (static_cast<int>(indices.size()) != L)
    throw ValidationError("window length " + std::to_string(indices.size()) +
                          " does not match model sequence length " + std::to_string(L));

  ws.embedded.resize(L, D);
  for (int t = 0; t < L; ++t) ws.embedded.row(t) = model.embedding.row(indices[t]);

  ws.preact.resize(P, F);
  ws.preact.rowwise() = model.conv_bias.transpose();
  for (int k = 0; k < K; ++k)
    ws.preact.noalias() += ws.embedded.middleRows(k, P) * model.conv_taps[k];

  ws.act = ws.preact.cwiseMax(Scalar(0));

  const double rate = model.config.dropout_rate;
  if (training && rate > 0.0) {
    if (rng == nullptr) throw ValidationError("training-mode forward needs a random source for dropout");
    ws.keep.resize(P, F);
    const Scalar scale = Scalar(1) / Scalar(1.0 - rate);
    for (int p = 0; p < P; ++p)
      for (int f = 0; f < F; ++f)
        ws.keep(p, f) = rng->bernoulli(rate) ? Scalar(0) : scale;
    ws.act = ws.act.cwiseProduct(ws.keep);
  } else {
    ws.keep.resize(0, 0);
  }

  ws.pooled.resize(F);
  ws.argmax.assign(F, 0);
  for (int f = 0; f < F; ++f) {
    int row = 0;
    ws.pooled(f) = ws.act.col(f).maxCoeff(&row);  // ties resolve to the lowest position
    ws.argmax[f] = row;
  }

  ws.logit = model.dense_weight.dot(ws.pooled) + model.dense_bias;
  ws.prob = logistic(ws.logit);
  return ws.prob;
}

// Backpropagates the binary cross-entropy for the sample held in ws,
// accumulating into grads. Returns the sample loss.
template <typename Scalar>
Scalar backward_pass(const CnnModel<Scalar>& model, const std::vector<std::int32_t>& indices,
                     bool positive, CnnWorkspace<Scalar>& ws, CnnGradients<Scalar>& grads) {
  const int L = model.sequence_length;
  const int K = model.config.kernel_size;
  const int F = model.config.n_filters;
  const int P = model.conv_positions();
  const Scalar y = positive ? Scalar(1) : Scalar(0);

  const Scalar loss = bce_from_logit(ws.logit, y);
  // d loss / d logit for the logistic + cross-entropy pair.
  const Scalar d_logit = (Scalar(1) / (Scalar(1) + std::exp(-ws.logit))) - y;

  grads.dense_weight.noalias() += ws.pooled * d_logit;
  grads.dense_bias += d_logit;

  // Only the winning position of each filter receives pooled gradient.
  ws.d_pre.setZero(P, F);
  for (int f = 0; f < F; ++f) ws.d_pre(ws.argmax[f], f) = model.dense_weight(f) * d_logit;

  if (ws.keep.size() > 0) ws.d_pre = ws.d_pre.cwiseProduct(ws.keep);
  ws.d_pre = ws.d_pre.cwiseProduct((ws.preact.array() > Scalar(0)).template cast<Scalar>().matrix());

  grads.conv_bias.noalias() += ws.d_pre.colwise().sum().transpose();
  ws.d_embedded.setZero(L, model.config.embed_dim);
  for (int k = 0; k < K; ++k) {
    grads.conv_taps[k].noalias() += ws.embedded.middleRows(k, P).transpose() * ws.d_pre;
    ws.d_embedded.middleRows(k, P).noalias() += ws.d_pre * model.conv_taps[k].transpose();
  }
  for (int t = 0; t < L; ++t) grads.embedding.row(indices[t]) += ws.d_embedded.row(t);

  return loss;
}

}  // namespace detail

// Inference (training=false) is deterministic and ignores the dropout rate.
// Training-mode calls apply inverted dropout drawn from rng.
template <typename Scalar>
Scalar forward(const CnnModel<Scalar>& model, const EncodedWindow& window,
               bool training = false, Rng* rng = nullptr) {
  detail::CnnWorkspace<Scalar> ws;
  return detail::forward_pass(model, window.indices, training, rng, ws);
}

inline double score_window(const CnnModel<double>& model, const EncodedWindow& window) {
  return forward(model, window);
}

// Seeded uniform init in +-1/sqrt(fan-in); conv and dense biases start at 0.
template <typename Scalar>
CnnModel<Scalar> init_cnn_model(const CnnConfig& config, std::int32_t vocab_size,
                                int sequence_length, std::uint64_t vocab_fingerprint, Rng& rng) {
  if (config.embed_dim < 1 || config.n_filters < 1 || config.kernel_size < 1)
    throw ValidationError("embed_dim, n_filters and kernel_size must be positive");
  if (config.kernel_size > sequence_length)
    throw ValidationError("kernel size exceeds sequence length");
  if (config.dropout_rate < 0.0 || config.dropout_rate >= 1.0)
    throw ValidationError("dropout_rate must lie in [0,1)");

  using Matrix = typename CnnModel<Scalar>::Matrix;
  using Vector = typename CnnModel<Scalar>::Vector;

  CnnModel<Scalar> m;
  m.config = config;
  m.sequence_length = sequence_length;
  m.vocab_size = vocab_size;
  m.vocab_fingerprint = vocab_fingerprint;

  const int rows = vocab_size + 2;
  const int D = config.embed_dim;
  const int F = config.n_filters;
  const int K = config.kernel_size;

  const double embed_bound = 1.0 / std::sqrt(static_cast<double>(D));
  m.embedding.resize(rows, D);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < D; ++c) m.embedding(r, c) = Scalar(rng.uniform(-embed_bound, embed_bound));

  const double conv_bound = 1.0 / std::sqrt(static_cast<double>(K) * D);
  m.conv_taps.assign(K, Matrix::Zero(D, F));
  for (int k = 0; k < K; ++k)
    for (int d = 0; d < D; ++d)
      for (int f = 0; f < F; ++f) m.conv_taps[k](d, f) = Scalar(rng.uniform(-conv_bound, conv_bound));
  m.conv_bias = Vector::Zero(F);

  const double dense_bound = 1.0 / std::sqrt(static_cast<double>(F));
  m.dense_weight.resize(F);
  for (int f = 0; f < F; ++f) m.dense_weight(f) = Scalar(rng.uniform(-dense_bound, dense_bound));
  m.dense_bias = Scalar(0);
  return m;
}

// Minimizes binary cross-entropy with mini-batch Adam for config.epochs
// passes. All randomness (init, shuffling, dropout) derives from
// config.seed; identical inputs and seed give a bit-identical model. When
// epoch_loss is non-null it receives the mean training loss of each epoch.
CnnModel<double> train(const CnnConfig& config, const std::vector<EncodedWindow>& windows,
                       const Vocabulary& vocab, std::vector<double>* epoch_loss = nullptr);

// Dropout/epochs candidates for grid search, scored by validation precision
// at the selection recall.
struct GridSpec {
  std::vector<double> dropout_candidates;
  std::vector<int> epoch_candidates;
  double selection_recall = 0.75;
};

struct GridChoice {
  double dropout_rate = 0.0;
  int epochs = 0;
  double precision = 0.0;
};

// Trains one model per (dropout, epochs) pair and returns the pair with the
// best validation precision at grid.selection_recall. Ties break toward
// smaller dropout, then fewer epochs.
GridChoice grid_search(const GridSpec& grid, const CnnConfig& base,
                       const std::vector<EncodedWindow>& train_windows,
                       const std::vector<EncodedWindow>& validation_windows,
                       const Vocabulary& vocab);

// Compares analytic gradients of the single-sample loss against central
// finite differences over every parameter, dropout disabled. Returns the
// maximum relative error. Run with Scalar = long double for headroom.
template <typename Scalar>
Scalar gradient_check(const CnnModel<Scalar>& model, const EncodedWindow& window,
                      bool positive, Scalar step = Scalar(1e-5)) {
  detail::CnnWorkspace<Scalar> ws;
  detail::CnnGradients<Scalar> grads;
  grads.resize_like(model);

  detail::forward_pass(model, window.indices, false, nullptr, ws);
  detail::backward_pass(model, window.indices, positive, ws, grads);

  CnnModel<Scalar> probe = model;
  const Scalar y = positive ? Scalar(1) : Scalar(0);
  const auto loss_at = [&]() {
    detail::forward_pass(probe, window.indices, false, nullptr, ws);
    return bce_from_logit(ws.logit, y);
  };

  Scalar worst = Scalar(0);
  const auto check_one = [&](Scalar& param, Scalar analytic) {
    const Scalar saved = param;
    param = saved + step;
    const Scalar up = loss_at();
    param = saved - step;
    const Scalar down = loss_at();
    param = saved;
    const Scalar numeric = (up - down) / (Scalar(2) * step);
    const Scalar denom = std::max(std::abs(analytic) + std::abs(numeric), Scalar(1e-8));
    const Scalar rel = std::abs(analytic - numeric) / denom;
    if (rel > worst) worst = rel;
  };

  for (Eigen::Index r = 0; r < probe.embedding.rows(); ++r)
    for (Eigen::Index c = 0; c < probe.embedding.cols(); ++c)
      check_one(probe.embedding(r, c), grads.embedding(r, c));
  for (std::size_t k = 0; k < probe.conv_taps.size(); ++k)
    for (Eigen::Index r = 0; r < probe.conv_taps[k].rows(); ++r)
      for (Eigen::Index c = 0; c < probe.conv_taps[k].cols(); ++c)
        check_one(probe.conv_taps[k](r, c), grads.conv_taps[k](r, c));
  for (Eigen::Index f = 0; f < probe.conv_bias.size(); ++f)
    check_one(probe.conv_bias(f), grads.conv_bias(f));
  for (Eigen::Index f = 0; f < probe.dense_weight.size(); ++f)
    check_one(probe.dense_weight(f), grads.dense_weight(f));
  check_one(probe.dense_bias, grads.dense_bias);
  return worst;
}

// Analytic gradient of the single-sample loss, exposed for tests that need
// to inspect individual entries (for example unused embedding rows).
template <typename Scalar>
detail::CnnGradients<Scalar> loss_gradients(const CnnModel<Scalar>& model,
                                            const EncodedWindow& window, bool positive) {
  detail::CnnWorkspace<Scalar> ws;
  detail::CnnGradients<Scalar> grads;
  grads.resize_like(model);
  detail::forward_pass(model, window.indices, false, nullptr, ws);
  detail::backward_pass(model, window.indices, positive, ws, grads);
  return grads;
}

}  // namespace kwic
