#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "kwic/baselines.hpp"
#include "kwic/error.hpp"
#include "kwic/rng.hpp"

using namespace kwic;

namespace {

BowVector dense_bow(std::vector<double> values) {
  BowVector v;
  v.dimension = static_cast<std::int32_t>(values.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) v.entries.emplace_back(static_cast<std::int32_t>(i), values[i]);
    sq += values[i] * values[i];
  }
  v.norm = std::sqrt(sq);
  return v;
}

// Linearly separable two-feature set: positives load feature 0, negatives
// feature 1.
std::vector<BowExample> separable_set(Rng& rng, int n_per_class) {
  std::vector<BowExample> out;
  for (int i = 0; i < n_per_class; ++i) {
    out.push_back({dense_bow({2.0 + rng.uniform(0.0, 1.0), rng.uniform(0.0, 0.3)}), true});
    out.push_back({dense_bow({rng.uniform(0.0, 0.3), 2.0 + rng.uniform(0.0, 1.0)}), false});
  }
  return out;
}

}  // namespace

TEST_CASE("logistic regression separates a separable set") {
  Rng rng(2024);
  const auto examples = separable_set(rng, 30);
  LinearConfig config;
  config.epochs = 100;
  config.seed = 5;
  const auto model = train_logistic(examples, config);
  CHECK(model.kind == LinearKind::logistic);

  for (const auto& ex : examples) {
    const double p = predict_score(model, ex.features);
    CHECK((p > 0.5) == ex.positive);
  }
}

TEST_CASE("training is deterministic in the seed") {
  Rng rng(9);
  const auto examples = separable_set(rng, 20);
  LinearConfig config;
  config.seed = 42;
  const auto a = train_logistic(examples, config);
  const auto b = train_logistic(examples, config);
  CHECK((a.weights.array() == b.weights.array()).all());
  CHECK(a.bias == b.bias);

  config.seed = 43;
  const auto c = train_logistic(examples, config);
  // A different shuffle order moves the SGD path.
  CHECK_FALSE((a.weights.array() == c.weights.array()).all());
}

TEST_CASE("uninformative features leave the bias at the class log-odds") {
  // All-zero feature vectors: the weight gradient is identically zero, so
  // weights stay at their zero init and the bias converges to log(p/(1-p)).
  std::vector<BowExample> examples;
  for (int i = 0; i < 3; ++i) examples.push_back({dense_bow({0.0, 0.0}), true});
  examples.push_back({dense_bow({0.0, 0.0}), false});

  LinearConfig config;
  config.learning_rate = 0.02;
  config.epochs = 3000;
  config.regularization = 1e-4;
  config.seed = 3;
  const auto model = train_logistic(examples, config);

  CHECK(model.weights(0) == 0.0);
  CHECK(model.weights(1) == 0.0);
  CHECK(model.bias == doctest::Approx(std::log(3.0)).epsilon(0.03));
}

TEST_CASE("svm reaches zero hinge loss on a separable set") {
  Rng rng(11);
  const auto examples = separable_set(rng, 25);
  LinearConfig config;
  config.epochs = 100;
  config.learning_rate = 0.05;
  config.seed = 8;
  const auto model = train_svm(examples, config);
  CHECK(model.kind == LinearKind::svm);

  double hinge = 0.0;
  for (const auto& ex : examples) {
    const double y = ex.positive ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - y * raw_margin(model, ex.features));
  }
  CHECK(hinge / examples.size() == doctest::Approx(0.0).epsilon(1e-6));
  for (const auto& ex : examples)
    CHECK((predict_score(model, ex.features) > 0.5) == ex.positive);
}

TEST_CASE("flipping every label negates the svm exactly") {
  // Zero init and the same shuffle stream make the two runs mirror images:
  // y*z is invariant under jointly negating labels and parameters.
  Rng rng(21);
  const auto examples = separable_set(rng, 15);
  std::vector<BowExample> flipped = examples;
  for (auto& ex : flipped) ex.positive = !ex.positive;

  LinearConfig config;
  config.seed = 77;
  const auto a = train_svm(examples, config);
  const auto b = train_svm(flipped, config);
  REQUIRE(a.weights.size() == b.weights.size());
  for (Eigen::Index i = 0; i < a.weights.size(); ++i) CHECK(a.weights(i) == -b.weights(i));
  CHECK(a.bias == -b.bias);
}

TEST_CASE("predict_score squashes the margin through the logistic") {
  LinearModel model;
  model.weights = Eigen::VectorXd::Zero(2);
  model.bias = 0.0;
  CHECK(predict_score(model, dense_bow({1.0, 1.0})) == 0.5);

  model.bias = 2.0;
  CHECK(predict_score(model, dense_bow({0.0, 0.0})) ==
        doctest::Approx(0.8807970779778823).epsilon(1e-12));

  // Monotone in the margin.
  model.weights(0) = 1.0;
  model.bias = 0.0;
  double prev = -1.0;
  for (double x = -3.0; x <= 3.0; x += 0.5) {
    const double p = predict_score(model, dense_bow({x, 0.0}));
    CHECK(p > prev);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    prev = p;
  }
}

TEST_CASE("logistic objective gradient matches finite differences") {
  using Vec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  Rng rng(303);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<BowExample> examples;
    const int dim = 3;
    for (int i = 0; i < 8; ++i) {
      std::vector<double> f(dim);
      for (auto& x : f) x = static_cast<double>(rng.below(3));
      examples.push_back({dense_bow(f), rng.bernoulli(0.5)});
    }
    Vec w(dim);
    for (int i = 0; i < dim; ++i) w(i) = static_cast<long double>(rng.uniform(-1.0, 1.0));
    long double b = static_cast<long double>(rng.uniform(-1.0, 1.0));
    const long double reg = 0.01L;

    Vec grad_w;
    long double grad_b = 0.0L;
    logistic_objective<long double>(w, b, examples, reg, &grad_w, &grad_b);

    const long double h = 1e-7L;
    for (int i = 0; i < dim; ++i) {
      Vec wp = w, wm = w;
      wp(i) += h;
      wm(i) -= h;
      const long double up = logistic_objective<long double>(wp, b, examples, reg);
      const long double down = logistic_objective<long double>(wm, b, examples, reg);
      const long double numeric = (up - down) / (2.0L * h);
      CHECK(static_cast<double>(std::abs(grad_w(i) - numeric)) < 1e-6);
    }
    const long double up = logistic_objective<long double>(w, b + h, examples, reg);
    const long double down = logistic_objective<long double>(w, b - h, examples, reg);
    CHECK(static_cast<double>(std::abs(grad_b - (up - down) / (2.0L * h))) < 1e-6);
  }
}

TEST_CASE("hinge objective subgradient matches finite differences off the kink") {
  using Vec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  // Margins are kept at least 0.15 from the kink at 1 so the subgradient is
  // an actual gradient there.
  std::vector<BowExample> examples = {{dense_bow({3.0, 0.0}), true},
                                      {dense_bow({0.0, 3.0}), false},
                                      {dense_bow({0.5, 0.2}), true}};
  Vec w(2);
  w << 0.4L, -0.3L;
  const long double b = 0.05L;
  const long double reg = 0.05L;

  Vec grad_w;
  long double grad_b = 0.0L;
  hinge_objective<long double>(w, b, examples, reg, &grad_w, &grad_b);

  const long double h = 1e-7L;
  for (int i = 0; i < 2; ++i) {
    Vec wp = w, wm = w;
    wp(i) += h;
    wm(i) -= h;
    const long double numeric = (hinge_objective<long double>(wp, b, examples, reg) -
                                 hinge_objective<long double>(wm, b, examples, reg)) /
                                (2.0L * h);
    CHECK(static_cast<double>(std::abs(grad_w(i) - numeric)) < 1e-6);
  }
  const long double numeric_b = (hinge_objective<long double>(w, b + h, examples, reg) -
                                 hinge_objective<long double>(w, b - h, examples, reg)) /
                                (2.0L * h);
  CHECK(static_cast<double>(std::abs(grad_b - numeric_b)) < 1e-6);
}

TEST_CASE("training validates its inputs") {
  LinearConfig config;
  CHECK_THROWS_AS(train_logistic({}, config), ValidationError);

  // Single class.
  std::vector<BowExample> one_class = {{dense_bow({1.0}), true}, {dense_bow({2.0}), true}};
  CHECK_THROWS_AS(train_logistic(one_class, config), ValidationError);
  CHECK_THROWS_AS(train_svm(one_class, config), ValidationError);

  // Inconsistent dimensions.
  std::vector<BowExample> mixed = {{dense_bow({1.0}), true}, {dense_bow({1.0, 2.0}), false}};
  CHECK_THROWS_AS(train_logistic(mixed, config), ValidationError);

  // Bad hyperparameters.
  std::vector<BowExample> ok = {{dense_bow({1.0}), true}, {dense_bow({0.0}), false}};
  LinearConfig bad = config;
  bad.epochs = 0;
  CHECK_THROWS_AS(train_logistic(ok, bad), ValidationError);
  bad = config;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(train_logistic(ok, bad), ValidationError);
  bad = config;
  bad.regularization = -1.0;
  CHECK_THROWS_AS(train_logistic(ok, bad), ValidationError);

  // Scoring checks the dimension.
  const auto model = train_logistic(ok, config);
  CHECK_THROWS_AS(predict_score(model, dense_bow({1.0, 2.0})), ValidationError);
}
