#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tracklearn/detectors.hpp"
#include "tracklearn/errors.hpp"
#include "tracklearn/metrics.hpp"

using namespace tracklearn;

namespace {

LabeledSample sample_of(std::initializer_list<double> xs, int y, double weight = 1.0) {
  LabeledSample s;
  s.x = Eigen::VectorXd(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double v : xs) s.x[i++] = v;
  s.y = y;
  s.weight = weight;
  return s;
}

}  // namespace

TEST_CASE("zero model predicts 0.5") {
  const DynamicModel m = make_model(3, 0.5);
  Eigen::VectorXd x(3);
  x << 1.0, -2.0, 0.5;
  CHECK(dyn_predict(m, x) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("sigmoid of ln 3 is 0.75") {
  DynamicModel m = make_model(1, 0.5);
  m.bias = std::log(3.0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
  CHECK(dyn_predict(m, x) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("deep saturation tail") {
  DynamicModel m = make_model(1, 0.5);
  m.bias = -50.0;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
  const double p = dyn_predict(m, x);
  CHECK(p < 1e-20);
  CHECK(p > 0.0);
}

TEST_CASE("prediction rejects dimension mismatch") {
  const DynamicModel m = make_model(4, 0.5);
  CHECK_THROWS_AS(dyn_predict(m, Eigen::VectorXd::Zero(5)), ShapeError);
  CHECK_THROWS_AS(loss_and_gradient(m, sample_of({1.0}, 1)), ShapeError);
}

TEST_CASE("prediction stays in (0,1) and is monotone in the logit") {
  // Bounded to the range where the logistic is representable in double;
  // beyond |z| ~ 37 the value saturates to the nearest endpoint.
  DynamicModel m = make_model(1, 0.5);
  m.weights[0] = 1.0;
  double prev = 0.0;
  for (double z = -36.0; z <= 36.0; z += 0.37) {
    Eigen::VectorXd x(1);
    x << z;
    const double p = dyn_predict(m, x);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    CHECK(p > prev);
    prev = p;
  }
}

TEST_CASE("loss at the zero model is ln 2") {
  const DynamicModel m = make_model(2, 0.5);
  const auto lg = loss_and_gradient(m, sample_of({3.0, -1.0}, 1));
  CHECK(lg.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("gradient at the zero model") {
  // (p - y) * (x, 1) with p = 0.5.
  const DynamicModel m = make_model(2, 0.5);
  const auto lg = loss_and_gradient(m, sample_of({1.0, 0.0}, 1));
  CHECK(lg.grad_weights[0] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(lg.grad_weights[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(lg.grad_bias == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("zero-weight samples cost nothing") {
  DynamicModel m = make_model(2, 0.5);
  m.weights << 0.3, -0.7;
  const auto lg = loss_and_gradient(m, sample_of({1.0, 2.0}, 0, 0.0));
  CHECK(lg.loss == 0.0);
  CHECK(lg.grad_weights.isZero(0.0));
  CHECK(lg.grad_bias == 0.0);
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int f = 1 + static_cast<int>(gen() % 8);
    DynamicModel m = make_model(f, 0.5);
    for (int i = 0; i < f; ++i) m.weights[i] = noise(gen);
    m.bias = noise(gen);
    LabeledSample s;
    s.x = Eigen::VectorXd::NullaryExpr(f, [&](Eigen::Index) { return noise(gen); });
    s.y = gen() % 2 == 0 ? 1 : 0;
    s.weight = unit(gen);

    const auto lg = loss_and_gradient(m, s);
    const auto loss_at = [&](const Eigen::VectorXd& w, double b) {
      return weighted_logistic_loss(w, b, s);
    };
    const Eigen::VectorXd fd = test::finite_difference_gradient(loss_at, m.weights, m.bias);
    for (int i = 0; i < f; ++i) {
      const double denom = std::max(1e-8, std::abs(fd[i]));
      CHECK(std::abs(lg.grad_weights[i] - fd[i]) / denom <= 1e-5);
    }
    const double denom = std::max(1e-8, std::abs(fd[f]));
    CHECK(std::abs(lg.grad_bias - fd[f]) / denom <= 1e-5);
  }
}

TEST_CASE("single update from the zero model") {
  DynamicModel m = make_model(2, 1.0);
  m = dyn_update(m, sample_of({1.0, 0.0}, 1));
  CHECK(m.updates == 1);
  CHECK(m.weights[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m.weights[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(m.bias == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("zero-weight update only advances the counter") {
  DynamicModel m = make_model(2, 0.5);
  m.weights << 0.1, 0.2;
  const Eigen::VectorXd before = m.weights;
  m = dyn_update(m, sample_of({5.0, -3.0}, 1, 0.0));
  CHECK(m.updates == 1);
  CHECK(m.weights == before);
  CHECK(m.bias == 0.0);
}

TEST_CASE("repeated updates descend on a fixed sample until below 1e-8") {
  DynamicModel m = make_model(2, 0.5);
  const LabeledSample s = sample_of({10.0, -4.0}, 1);
  double prev = loss_and_gradient(m, s).loss;
  int steps = 0;
  while (prev >= 1e-8) {
    m = dyn_update(m, s);
    const double cur = loss_and_gradient(m, s).loss;
    CHECK(cur < prev);
    prev = cur;
    REQUIRE(++steps < 10000);
  }
  CHECK(prev < 1e-8);
}

TEST_CASE("descent stays strictly monotone over a long horizon") {
  DynamicModel m = make_model(2, 0.5);
  const LabeledSample s = sample_of({1.0, -0.5}, 1);
  double prev = loss_and_gradient(m, s).loss;
  for (int step = 0; step < 1000; ++step) {
    m = dyn_update(m, s);
    const double cur = loss_and_gradient(m, s).loss;
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("non-finite gradients are rejected and the model kept") {
  DynamicModel m = make_model(2, 0.5);
  m.weights << 0.5, 0.5;
  LabeledSample s = sample_of({1.0, 1.0}, 1);
  s.x[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(dyn_update(m, s), NumericalError);
  CHECK(m.weights[0] == 0.5);
  CHECK(m.updates == 0);
}

TEST_CASE("static detector is deterministic per seed") {
  StaticDetectorConfig cfg;
  cfg.accuracy = 0.8;
  cfg.seed = 99;
  FeatureCluster c;
  c.features = Eigen::VectorXd::Zero(2);
  c.truth = TruthLabel::kHuman;
  StaticDetector a(cfg), b(cfg);
  for (int i = 0; i < 50; ++i) {
    const auto da = a.detect(c);
    const auto db = b.detect(c);
    CHECK(da.prob == db.prob);
    CHECK(da.detection_id == i);
  }
}

TEST_CASE("perfect sharp detector saturates at the clamp bound") {
  StaticDetectorConfig cfg;
  cfg.accuracy = 1.0;
  cfg.concentration = 1e12;
  cfg.seed = 5;
  StaticDetector det(cfg);
  FeatureCluster human;
  human.features = Eigen::VectorXd::Zero(2);
  human.truth = TruthLabel::kHuman;
  FeatureCluster clutter = human;
  clutter.truth = TruthLabel::kClutter;
  for (int i = 0; i < 20; ++i) {
    CHECK(det.detect(human).prob == doctest::Approx(1.0 - kProbEpsilon).epsilon(1e-9));
    CHECK(det.detect(clutter).prob == doctest::Approx(kProbEpsilon).epsilon(1e-3));
  }
}

TEST_CASE("configured accuracy is realized empirically") {
  StaticDetectorConfig cfg;
  cfg.accuracy = 0.9;
  cfg.seed = 7;
  StaticDetector det(cfg);
  FeatureCluster human;
  human.features = Eigen::VectorXd::Zero(2);
  human.truth = TruthLabel::kHuman;
  int correct = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    if (det.detect(human).prob > 0.5) ++correct;
  }
  CHECK(static_cast<double>(correct) / n == doctest::Approx(0.9).epsilon(0.012));
}

TEST_CASE("static detector config validation") {
  StaticDetectorConfig cfg;
  cfg.accuracy = 0.5;
  CHECK_THROWS_AS(StaticDetector{cfg}, ValidationError);
}

TEST_CASE("prediction cost scales linearly with the feature dimension") {
  const auto time_once = [](int f) {
    std::mt19937_64 gen(31);
    std::normal_distribution<double> noise(0.0, 1.0);
    DynamicModel m = make_model(f, 0.5);
    for (int i = 0; i < f; ++i) m.weights[i] = 0.01 * noise(gen);
    Eigen::VectorXd x(f);
    for (int i = 0; i < f; ++i) x[i] = noise(gen);
    constexpr int kCalls = 1000000;
    double acc = 0.0;
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < kCalls; ++i) {
      acc += dyn_predict(m, x);
    }
    const auto stop = std::chrono::steady_clock::now();
    REQUIRE(std::isfinite(acc));
    return std::chrono::duration<double, std::nano>(stop - start).count() / kCalls;
  };
  // Minimum over repetitions filters scheduler noise.
  double t128 = 1e300, t512 = 1e300;
  for (int rep = 0; rep < 5; ++rep) {
    t128 = std::min(t128, time_once(128));
    t512 = std::min(t512, time_once(512));
  }
  CHECK(t512 / t128 <= 3.0);
}
