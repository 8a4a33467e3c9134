#include "kwic/neural.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kwic/evaluate.hpp"

namespace kwic {

namespace {

using Matrix = CnnModel<double>::Matrix;
using Vector = CnnModel<double>::Vector;

// Adam first/second moments, one pair per parameter tensor.
struct AdamState {
  Matrix m_embedding, v_embedding;
  std::vector<Matrix> m_taps, v_taps;
  Vector m_conv_bias, v_conv_bias;
  Vector m_dense_weight, v_dense_weight;
  double m_dense_bias = 0.0, v_dense_bias = 0.0;

  explicit AdamState(const CnnModel<double>& model) {
    m_embedding = Matrix::Zero(model.embedding.rows(), model.embedding.cols());
    v_embedding = m_embedding;
    for (const auto& tap : model.conv_taps) {
      m_taps.push_back(Matrix::Zero(tap.rows(), tap.cols()));
      v_taps.push_back(Matrix::Zero(tap.rows(), tap.cols()));
    }
    m_conv_bias = Vector::Zero(model.conv_bias.size());
    v_conv_bias = m_conv_bias;
    m_dense_weight = Vector::Zero(model.dense_weight.size());
    v_dense_weight = m_dense_weight;
  }
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

template <typename Tensor>
void adam_update_block(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, double lr,
                       double bias1, double bias2) {
  m = kBeta1 * m + (1.0 - kBeta1) * grad;
  v.array() = kBeta2 * v.array() + (1.0 - kBeta2) * grad.array().square();
  param.array() -= lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + kAdamEps);
}

void adam_update_scalar(double& param, double grad, double& m, double& v, double lr, double bias1,
                        double bias2) {
  m = kBeta1 * m + (1.0 - kBeta1) * grad;
  v = kBeta2 * v + (1.0 - kBeta2) * grad * grad;
  param -= lr * (m / bias1) / (std::sqrt(v / bias2) + kAdamEps);
}

void check_training_inputs(const CnnConfig& config, const std::vector<EncodedWindow>& windows,
                           const Vocabulary& vocab) {
  if (windows.empty()) throw ValidationError("no training windows");
  if (config.epochs <= 0) throw ValidationError("epoch count must be positive");
  if (config.batch_size <= 0) throw ValidationError("batch size must be positive");
  if (config.learning_rate <= 0.0) throw ValidationError("learning rate must be positive");

  const std::size_t L = windows.front().indices.size();
  if (L < static_cast<std::size_t>(config.kernel_size))
    throw ValidationError("sequence shorter than the kernel");
  const std::int32_t max_index = vocab.size() + 2;
  bool has_pos = false, has_neg = false;
  for (const auto& w : windows) {
    if (w.indices.size() != L)
      throw ValidationError("training windows disagree on sequence length");
    for (auto idx : w.indices)
      if (idx < 0 || idx >= max_index)
        throw ValidationError("window index out of vocabulary range: " + std::to_string(idx));
    (w.label == Label::candidate_positive ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg)
    throw ValidationError("training set must contain both classes");
}

}  // namespace

CnnModel<double> train(const CnnConfig& config, const std::vector<EncodedWindow>& windows,
                       const Vocabulary& vocab, std::vector<double>* epoch_loss) {
  check_training_inputs(config, windows, vocab);
  const int L = static_cast<int>(windows.front().indices.size());

  Rng init_rng(derive_seed(config.seed, 0x1417u));
  auto model = init_cnn_model<double>(config, vocab.size(), L, vocab.fingerprint(), init_rng);

  AdamState adam(model);
  detail::CnnWorkspace<double> ws;
  detail::CnnGradients<double> grads;
  grads.resize_like(model);

  // One continuing dropout stream for the whole run; batch order is itself
  // deterministic, so every draw lands on the same cell across reruns.
  Rng dropout_rng(derive_seed(config.seed, 0xd209u));

  std::vector<std::size_t> order(windows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  if (epoch_loss != nullptr) epoch_loss->clear();
  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(config.seed, 0x500fu + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t b = 0;
    while (b < order.size()) {
      const std::size_t batch_end = std::min(order.size(), b + static_cast<std::size_t>(config.batch_size));
      const auto batch_n = static_cast<double>(batch_end - b);
      grads.set_zero();
      for (std::size_t i = b; i < batch_end; ++i) {
        const auto& w = windows[order[i]];
        detail::forward_pass(model, w.indices, true, &dropout_rng, ws);
        loss_sum += detail::backward_pass(model, w.indices,
                                          w.label == Label::candidate_positive, ws, grads);
      }
      // Mean gradient over the batch.
      const double inv = 1.0 / batch_n;
      grads.embedding *= inv;
      for (auto& t : grads.conv_taps) t *= inv;
      grads.conv_bias *= inv;
      grads.dense_weight *= inv;
      grads.dense_bias *= inv;

      ++step;
      const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      const double lr = config.learning_rate;
      adam_update_block(model.embedding, grads.embedding, adam.m_embedding, adam.v_embedding, lr,
                        bias1, bias2);
      for (std::size_t k = 0; k < model.conv_taps.size(); ++k)
        adam_update_block(model.conv_taps[k], grads.conv_taps[k], adam.m_taps[k], adam.v_taps[k],
                          lr, bias1, bias2);
      adam_update_block(model.conv_bias, grads.conv_bias, adam.m_conv_bias, adam.v_conv_bias, lr,
                        bias1, bias2);
      adam_update_block(model.dense_weight, grads.dense_weight, adam.m_dense_weight,
                        adam.v_dense_weight, lr, bias1, bias2);
      adam_update_scalar(model.dense_bias, grads.dense_bias, adam.m_dense_bias, adam.v_dense_bias,
                         lr, bias1, bias2);

      if (!model.all_finite())
        throw ValidationError("training diverged at step " + std::to_string(step));
      b = batch_end;
    }
    if (epoch_loss != nullptr)
      epoch_loss->push_back(loss_sum / static_cast<double>(windows.size()));
  }
  return model;
}

GridChoice grid_search(const GridSpec& grid, const CnnConfig& base,
                       const std::vector<EncodedWindow>& train_windows,
                       const std::vector<EncodedWindow>& validation_windows,
                       const Vocabulary& vocab) {
  if (grid.dropout_candidates.empty() || grid.epoch_candidates.empty())
    throw ValidationError("grid search needs dropout and epoch candidates");
  if (grid.selection_recall <= 0.0 || grid.selection_recall > 1.0)
    throw ValidationError("selection recall must lie in (0,1]");
  for (double d : grid.dropout_candidates)
    if (d < 0.0 || d >= 1.0) throw ValidationError("dropout candidate must lie in [0,1)");
  for (int e : grid.epoch_candidates)
    if (e <= 0) throw ValidationError("epoch candidate must be positive");
  if (validation_windows.empty()) throw ValidationError("no validation windows");

  GridChoice best;
  best.precision = -1.0;
  for (double dropout : grid.dropout_candidates) {
    for (int epochs : grid.epoch_candidates) {
      CnnConfig config = base;
      config.dropout_rate = dropout;
      config.epochs = epochs;
      const auto model = train(config, train_windows, vocab);

      std::vector<ScoredItem> scored;
      scored.reserve(validation_windows.size());
      for (const auto& w : validation_windows)
        scored.push_back({score_window(model, w), w.label == Label::candidate_positive});
      const double precision = precision_at_recall(scored, grid.selection_recall).precision;

      const bool better =
          precision > best.precision ||
          (precision == best.precision &&
           (dropout < best.dropout_rate ||
            (dropout == best.dropout_rate && epochs < best.epochs)));
      if (better) best = {dropout, epochs, precision};
    }
  }
  return best;
}

}  // namespace kwic
