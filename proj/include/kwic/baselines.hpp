#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "kwic/error.hpp"
#include "kwic/neural.hpp"
#include "kwic/vectorize.hpp"

namespace kwic {

enum class LinearKind : std::uint8_t { logistic = 0, svm = 1 };

// Plain SGD settings for the comparison models; override them through the
// run config when a study needs different ones.
struct LinearConfig {
  double learning_rate = 1e-2;
  int epochs = 50;
  double regularization = 1e-4;
  std::uint64_t seed = 0;
};

struct BowExample {
  BowVector features;
  bool positive = false;
};

struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  LinearKind kind = LinearKind::logistic;
  LinearConfig config;
  std::uint64_t feature_fingerprint = 0;
};

// Seeded SGD on the L2-regularized logistic loss; weights start at zero and
// the bias is unregularized, so uninformative features leave the bias at
// the class log-odds.
LinearModel train_logistic(const std::vector<BowExample>& examples, const LinearConfig& config);

// Seeded stochastic subgradient descent on the L2-regularized hinge loss.
LinearModel train_svm(const std::vector<BowExample>& examples, const LinearConfig& config);

// Logistic squash of the raw margin for both kinds, so SVM scores land on
// the same 0-1 scale used in reports. The squash is monotone and leaves
// every ranking metric unchanged.
double predict_score(const LinearModel& model, const BowVector& v);

double raw_margin(const LinearModel& model, const BowVector& v);

// Full-batch objectives with analytic gradients, used by the gradient
// verification suite. grad_w/grad_b may be null.
template <typename Scalar>
Scalar logistic_objective(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& w, Scalar b,
                          const std::vector<BowExample>& examples, Scalar regularization,
                          Eigen::Matrix<Scalar, Eigen::Dynamic, 1>* grad_w = nullptr,
                          Scalar* grad_b = nullptr) {
  if (examples.empty()) throw ValidationError("logistic objective needs examples");
  if (grad_w != nullptr) grad_w->setZero(w.size());
  if (grad_b != nullptr) *grad_b = Scalar(0);

  Scalar loss = Scalar(0);
  const Scalar inv_n = Scalar(1) / Scalar(examples.size());
  for (const auto& ex : examples) {
    Scalar z = b;
    for (const auto& [idx, count] : ex.features.entries) z += w(idx) * Scalar(count);
    const Scalar y = ex.positive ? Scalar(1) : Scalar(0);
    loss += bce_from_logit(z, y) * inv_n;
    if (grad_w != nullptr || grad_b != nullptr) {
      const Scalar err = (Scalar(1) / (Scalar(1) + std::exp(-z)) - y) * inv_n;
      if (grad_w != nullptr)
        for (const auto& [idx, count] : ex.features.entries) (*grad_w)(idx) += err * Scalar(count);
      if (grad_b != nullptr) *grad_b += err;
    }
  }
  loss += Scalar(0.5) * regularization * w.squaredNorm();
  if (grad_w != nullptr) *grad_w += regularization * w;
  return loss;
}

// Hinge objective; the reported gradient is a subgradient, exact wherever
// no example sits on the margin kink.
template <typename Scalar>
Scalar hinge_objective(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& w, Scalar b,
                       const std::vector<BowExample>& examples, Scalar regularization,
                       Eigen::Matrix<Scalar, Eigen::Dynamic, 1>* grad_w = nullptr,
                       Scalar* grad_b = nullptr) {
  if (examples.empty()) throw ValidationError("hinge objective needs examples");
  if (grad_w != nullptr) grad_w->setZero(w.size());
  if (grad_b != nullptr) *grad_b = Scalar(0);

  Scalar loss = Scalar(0);
  const Scalar inv_n = Scalar(1) / Scalar(examples.size());
  for (const auto& ex : examples) {
    Scalar z = b;
    for (const auto& [idx, count] : ex.features.entries) z += w(idx) * Scalar(count);
    const Scalar y = ex.positive ? Scalar(1) : Scalar(-1);
    const Scalar margin = y * z;
    if (margin < Scalar(1)) {
      loss += (Scalar(1) - margin) * inv_n;
      if (grad_w != nullptr)
        for (const auto& [idx, count] : ex.features.entries) (*grad_w)(idx) -= y * Scalar(count) * inv_n;
      if (grad_b != nullptr) *grad_b -= y * inv_n;
    }
  }
  loss += Scalar(0.5) * regularization * w.squaredNorm();
  if (grad_w != nullptr) *grad_w += regularization * w;
  return loss;
}

}  // namespace kwic
