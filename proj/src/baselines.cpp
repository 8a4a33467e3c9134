#include "kwic/baselines.hpp"

#include <cmath>

#include "kwic/rng.hpp"

namespace kwic {

namespace {

void check_examples(const std::vector<BowExample>& examples) {
  if (examples.empty()) throw ValidationError("no training examples");
  const auto dim = examples.front().features.dimension;
  if (dim <= 0) throw ValidationError("feature dimension must be positive");
  bool has_pos = false, has_neg = false;
  for (const auto& ex : examples) {
    if (ex.features.dimension != dim)
      throw ValidationError("training examples disagree on feature dimension");
    (ex.positive ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg)
    throw ValidationError("training set must contain both classes");
}

void check_config(const LinearConfig& config) {
  if (config.learning_rate <= 0.0) throw ValidationError("learning rate must be positive");
  if (config.epochs <= 0) throw ValidationError("epoch count must be positive");
  if (config.regularization < 0.0) throw ValidationError("regularization must be nonnegative");
}

double sparse_margin(const Eigen::VectorXd& w, double b, const BowVector& v) {
  double z = b;
  for (const auto& [idx, count] : v.entries) z += w(idx) * count;
  return z;
}

}  // namespace

LinearModel train_logistic(const std::vector<BowExample>& examples, const LinearConfig& config) {
  check_examples(examples);
  check_config(config);

  LinearModel model;
  model.kind = LinearKind::logistic;
  model.config = config;
  model.weights = Eigen::VectorXd::Zero(examples.front().features.dimension);

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const double lr = config.learning_rate;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, 0x10600000u + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    for (std::size_t i : order) {
      const auto& ex = examples[i];
      const double z = sparse_margin(model.weights, model.bias, ex.features);
      const double y = ex.positive ? 1.0 : 0.0;
      const double err = 1.0 / (1.0 + std::exp(-z)) - y;
      // L2 decay on weights only; the bias stays unregularized so a
      // featureless problem converges to the class log-odds.
      model.weights *= 1.0 - lr * config.regularization;
      for (const auto& [idx, count] : ex.features.entries)
        model.weights(idx) -= lr * err * count;
      model.bias -= lr * err;
    }
  }
  if (!model.weights.allFinite() || !std::isfinite(model.bias))
    throw ValidationError("logistic training diverged");
  return model;
}

LinearModel train_svm(const std::vector<BowExample>& examples, const LinearConfig& config) {
  check_examples(examples);
  check_config(config);

  LinearModel model;
  model.kind = LinearKind::svm;
  model.config = config;
  model.weights = Eigen::VectorXd::Zero(examples.front().features.dimension);

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const double lr = config.learning_rate;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, 0x10600000u + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    for (std::size_t i : order) {
      const auto& ex = examples[i];
      const double y = ex.positive ? 1.0 : -1.0;
      const double z = sparse_margin(model.weights, model.bias, ex.features);
      model.weights *= 1.0 - lr * config.regularization;
      if (y * z < 1.0) {
        for (const auto& [idx, count] : ex.features.entries)
          model.weights(idx) += lr * y * count;
        model.bias += lr * y;
      }
    }
  }
  if (!model.weights.allFinite() || !std::isfinite(model.bias))
    throw ValidationError("svm training diverged");
  return model;
}

double raw_margin(const LinearModel& model, const BowVector& v) {
  if (v.dimension != model.weights.size())
    throw ValidationError("vector dimension does not match the model");
  return sparse_margin(model.weights, model.bias, v);
}

double predict_score(const LinearModel& model, const BowVector& v) {
  return 1.0 / (1.0 + std::exp(-raw_margin(model, v)));
}

}  // namespace kwic
