#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tracklearn/errors.hpp"
#include "tracklearn/metrics.hpp"

using namespace tracklearn;

namespace {

MetricsLog log_with_u(const std::vector<int>& us, int eval_size = 10) {
  MetricsLog log;
  log.eval_set_size = eval_size;
  int t = 1;
  for (const int u : us) {
    EvalRecord r;
    r.t = t;
    r.frame = 50 * t;
    r.u = u;
    r.eval_accuracy = static_cast<double>(u) / eval_size;
    log.records.push_back(r);
    ++t;
  }
  return log;
}

LabeledSample sample1d(double x, int y, double weight = 1.0) {
  LabeledSample s;
  s.x = Eigen::VectorXd::Constant(1, x);
  s.y = y;
  s.weight = weight;
  return s;
}

}  // namespace

TEST_CASE("stability of a constant sequence is zero") {
  CHECK(stability(log_with_u({10, 10, 10, 10}), 4) == 0.0);
}

TEST_CASE("stability by direct arithmetic") {
  CHECK(stability(log_with_u({8, 10, 9, 9}), 4) == 3.0);
}

TEST_CASE("stability at horizon one is an empty sum") {
  CHECK(stability(log_with_u({8, 10, 9, 9}), 1) == 0.0);
}

TEST_CASE("stability beyond the records is an error") {
  CHECK_THROWS_AS(stability(log_with_u({1, 2}), 3), InsufficientDataError);
  CHECK_THROWS_AS(stability(log_with_u({1, 2}), 0), InvalidArgumentError);
}

TEST_CASE("stability rate of a constant sequence") {
  CHECK(stability_rate(log_with_u({7, 7, 7, 7, 7}), 5) == 0.0);
}

TEST_CASE("stability rate of an alternating sequence") {
  std::vector<int> us;
  for (int i = 0; i < 100; ++i) us.push_back(i % 2 == 0 ? 9 : 10);
  CHECK(stability_rate(log_with_u(us), 100) == doctest::Approx(99.0 / 100.0).epsilon(1e-12));
}

TEST_CASE("stability rate by direct arithmetic") {
  CHECK(stability_rate(log_with_u({8, 10, 9, 9}), 4) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("the stability rate of an eventually constant sequence vanishes") {
  std::mt19937_64 gen(61);
  std::vector<int> us;
  for (int i = 0; i < 100; ++i) us.push_back(static_cast<int>(gen() % 10));
  while (us.size() < 10000) us.push_back(5);
  const MetricsLog log = log_with_u(us);
  const double at_1k = stability_rate(log, 1000);
  const double at_10k = stability_rate(log, 10000);
  CHECK(at_10k < at_1k);
  CHECK(at_10k == doctest::Approx(at_1k / 10.0).epsilon(1e-9));
}

TEST_CASE("hindsight optimum separates a four-point set") {
  std::vector<LabeledSample> samples;
  samples.push_back(sample1d(-2.0, 0));
  samples.push_back(sample1d(-1.0, 0));
  samples.push_back(sample1d(1.0, 1));
  samples.push_back(sample1d(2.0, 1));
  const HindsightOptimum opt = hindsight_optimum(samples, 1);
  DynamicModel m = make_model(1, 0.5);
  m.weights = opt.weights;
  m.bias = opt.bias;
  CHECK(count_correct(m, samples) == 4);
  CHECK(opt.training_loss <= 0.01);
}

TEST_CASE("a single positive sample saturates under tiny regularization") {
  const std::vector<LabeledSample> samples = {sample1d(1.0, 1)};
  HindsightOptions opts;
  opts.allow_single_class = true;
  const HindsightOptimum opt = hindsight_optimum(samples, 1, opts);
  const double p = sigmoid(opt.weights[0] * 1.0 + opt.bias);
  CHECK(p >= 0.99);
}

TEST_CASE("all-zero-weight samples leave only the regularizer") {
  const std::vector<LabeledSample> samples = {sample1d(1.0, 1, 0.0), sample1d(-1.0, 0, 0.0)};
  const HindsightOptimum opt = hindsight_optimum(samples, 1);
  CHECK(opt.weights.norm() == 0.0);
  CHECK(opt.bias == 0.0);
  CHECK(opt.converged_flag);
}

TEST_CASE("hindsight optimum rejects empty and single-class input") {
  CHECK_THROWS_AS(hindsight_optimum({}, 1), InvalidArgumentError);
  const std::vector<LabeledSample> one_class = {sample1d(1.0, 1), sample1d(2.0, 1)};
  CHECK_THROWS_AS(hindsight_optimum(one_class, 1), InvalidArgumentError);
  HindsightOptions opts;
  opts.allow_single_class = true;
  CHECK_NOTHROW(hindsight_optimum(one_class, 1, opts));
}

TEST_CASE("converged flag implies the gradient tolerance") {
  std::mt19937_64 gen(62);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<LabeledSample> samples;
  for (int i = 0; i < 60; ++i) {
    const int y = i % 2;
    samples.push_back(sample1d((y == 1 ? 2.0 : -2.0) + noise(gen), y));
  }
  const HindsightOptions opts;
  const HindsightOptimum opt = hindsight_optimum(samples, 1, opts);
  if (opt.converged_flag) {
    Eigen::VectorXd gw = 2.0 * opts.l2 * opt.weights;
    double gb = 2.0 * opts.l2 * opt.bias;
    for (const auto& s : samples) {
      const double z = opt.weights.dot(s.x) + opt.bias;
      const double r = s.weight * (sigmoid(z) - s.y);
      gw += r * s.x;
      gb += r;
    }
    CHECK(std::sqrt(gw.squaredNorm() + gb * gb) <= opts.grad_tol);
  }
}

namespace {

// Online run over a fixed stream: predict-then-update bookkeeping without
// the pipeline, freezing per-step losses the way the runner does.
struct OnlineRun {
  MetricsLog log;
  DynamicModel model;

  OnlineRun(std::span<const LabeledSample> samples, double lr0, bool update) :
      model(make_model(static_cast<int>(samples.empty() ? 1 : samples[0].x.size()), lr0)) {
    for (const auto& s : samples) {
      log.sample_losses.push_back(loss_and_gradient(model, s).loss);
      log.sample_param_norms.push_back(model.weights.squaredNorm() + model.bias * model.bias);
      if (update) model = dyn_update(model, s);
    }
  }
};

}  // namespace

TEST_CASE("regret vanishes when the online model equals the optimum throughout") {
  // A zero-information optimum: all-zero weights arise from symmetric data.
  std::vector<LabeledSample> samples;
  for (int i = 0; i < 10; ++i) {
    samples.push_back(sample1d(1.0, i % 2));  // same x, alternating labels
  }
  HindsightOptions opts;
  const HindsightOptimum opt = hindsight_optimum(samples, 1, opts);
  CHECK(std::abs(opt.weights[0]) < 1e-6);

  OnlineRun run(samples, 0.5, /*update=*/false);  // online model fixed at zero
  const double r = regret(run.log, opt, samples);
  CHECK(r == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("regret of the zero model against the batch oracle") {
  const std::vector<LabeledSample> samples = {sample1d(2.0, 1), sample1d(-1.5, 0),
                                              sample1d(1.0, 1)};
  OnlineRun run(samples, 0.5, /*update=*/false);
  const HindsightOptimum opt = hindsight_optimum(samples, 1);
  double comparator = 0.0;
  for (const auto& s : samples) {
    comparator += weighted_logistic_loss(opt.weights, opt.bias, s) +
                  opt.l2 * (opt.weights.squaredNorm() + opt.bias * opt.bias);
  }
  const double expected = 3.0 * std::log(2.0) - comparator;
  CHECK(regret(run.log, opt, samples) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("a single-sample stream with the optimum as the start has no regret") {
  const std::vector<LabeledSample> samples = {sample1d(1.0, 1, 0.0)};  // weight 0
  const HindsightOptimum opt = hindsight_optimum(samples, 1);
  OnlineRun run(samples, 0.5, /*update=*/true);
  CHECK(regret(run.log, opt, samples) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("regret rejects misaligned inputs") {
  const std::vector<LabeledSample> samples = {sample1d(1.0, 1), sample1d(-1.0, 0)};
  OnlineRun run(samples, 0.5, true);
  const HindsightOptimum opt = hindsight_optimum(samples, 1);
  MetricsLog bad = run.log;
  bad.sample_losses.pop_back();
  CHECK_THROWS_AS(regret(bad, opt, samples), InvalidArgumentError);
}

TEST_CASE("hindsight total loss never exceeds the online total loss") {
  std::mt19937_64 gen(63);
  std::normal_distribution<double> noise(0.0, 0.8);
  std::vector<LabeledSample> samples;
  for (int i = 0; i < 400; ++i) {
    const int y = static_cast<int>(gen() % 2);
    samples.push_back(sample1d((y == 1 ? 1.5 : -1.5) + noise(gen), y));
  }
  OnlineRun run(samples, 0.5, true);
  const HindsightOptimum opt = hindsight_optimum(samples, 1);
  double online = 0.0, batch = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    online += run.log.sample_losses[i] + opt.l2 * run.log.sample_param_norms[i];
    batch += weighted_logistic_loss(opt.weights, opt.bias, samples[i]) +
             opt.l2 * (opt.weights.squaredNorm() + opt.bias * opt.bias);
  }
  CHECK(batch <= online + 1e-9);
  CHECK(regret(run.log, opt, samples) >= -1e-9);
}

TEST_CASE("convergence holds for a stable sequence at the baseline") {
  MetricsLog log = log_with_u(std::vector<int>(50, 9));
  log.baseline_accuracy = 0.9;
  CHECK(converged(log, 10, 0.02, 0.02));
}

TEST_CASE("oscillations beyond the tolerance block convergence") {
  std::vector<int> us;
  for (int i = 0; i < 50; ++i) us.push_back(i % 2 == 0 ? 5 : 10);
  MetricsLog log = log_with_u(us);
  log.baseline_accuracy = 0.5;
  CHECK(!converged(log, 10, 0.02, 0.5));
}

TEST_CASE("stable accuracy below the band blocks convergence") {
  MetricsLog log = log_with_u(std::vector<int>(50, 8));  // accuracy 0.8
  log.baseline_accuracy = 0.84;                          // band [0.82, ...)
  CHECK(!converged(log, 10, 0.02, 0.02));
}

TEST_CASE("convergence needs a full window of records") {
  MetricsLog log = log_with_u({9, 9, 9});
  log.baseline_accuracy = 0.9;
  CHECK_THROWS_AS(converged(log, 10, 0.02, 0.02), InsufficientDataError);
}

TEST_CASE("metric computations are pure") {
  const MetricsLog log = log_with_u({8, 10, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9});
  const double a = stability_rate(log, 12);
  const double b = stability_rate(log, 12);
  CHECK(a == b);
  CHECK(windowed_stability_rate(log, 5) == windowed_stability_rate(log, 5));
}
