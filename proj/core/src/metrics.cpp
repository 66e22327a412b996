#include "tracklearn/metrics.hpp"

#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "tracklearn/errors.hpp"

namespace tracklearn {

int count_correct(const DynamicModel& m, std::span<const LabeledSample> eval) {
  int u = 0;
  for (const auto& s : eval) {
    const int predicted = dyn_predict(m, s.x) > 0.5 ? 1 : 0;
    if (predicted == s.y) {
      ++u;
    }
  }
  return u;
}

double weighted_logistic_loss(const Eigen::VectorXd& weights, double bias,
                              const LabeledSample& s) {
  if (weights.size() != s.x.size()) {
    throw ShapeError(fmt::format("feature dimension {} does not match parameter dimension {}",
                                 s.x.size(), weights.size()));
  }
  const double z = weights.dot(s.x) + bias;
  return s.weight * (softplus(z) - static_cast<double>(s.y) * z);
}

double stability(const MetricsLog& log, int T) {
  if (T < 1) {
    throw InvalidArgumentError(fmt::format("stability horizon must be >= 1, got {}", T));
  }
  if (static_cast<std::size_t>(T) > log.records.size()) {
    throw InsufficientDataError(fmt::format("stability horizon {} exceeds {} recorded evaluations",
                                            T, log.records.size()));
  }
  double sum = 0.0;
  for (int t = 0; t + 1 < T; ++t) {
    sum += std::abs(static_cast<double>(log.records[t].u) -
                    static_cast<double>(log.records[t + 1].u));
  }
  return sum;
}

double stability_rate(const MetricsLog& log, int T) {
  return stability(log, T) / static_cast<double>(T);
}

double windowed_stability_rate(const MetricsLog& log, int window) {
  if (window < 1) {
    throw InvalidArgumentError("window must be >= 1");
  }
  if (static_cast<std::size_t>(window) > log.records.size()) {
    throw InsufficientDataError(fmt::format("window {} exceeds {} recorded evaluations",
                                            window, log.records.size()));
  }
  if (log.eval_set_size < 1) {
    throw InvalidArgumentError("eval_set_size must be >= 1");
  }
  if (window == 1) {
    return 0.0;
  }
  const std::size_t begin = log.records.size() - static_cast<std::size_t>(window);
  double sum = 0.0;
  for (std::size_t k = begin; k + 1 < log.records.size(); ++k) {
    sum += std::abs(static_cast<double>(log.records[k].u) -
                    static_cast<double>(log.records[k + 1].u));
  }
  return sum / (static_cast<double>(window - 1) * static_cast<double>(log.eval_set_size));
}

bool converged(const MetricsLog& log, int window, double tau, double delta) {
  const double rate = windowed_stability_rate(log, window);
  const std::size_t begin = log.records.size() - static_cast<std::size_t>(window);
  double acc = 0.0;
  for (std::size_t k = begin; k < log.records.size(); ++k) {
    acc += log.records[k].eval_accuracy;
  }
  acc /= static_cast<double>(window);
  return rate <= tau && acc >= log.baseline_accuracy - delta;
}

namespace {

struct Objective {
  std::span<const LabeledSample> samples;
  double l2 = 0.0;

  double value(const Eigen::VectorXd& w, double b) const {
    double f = l2 * (w.squaredNorm() + b * b);
    for (const auto& s : samples) {
      f += weighted_logistic_loss(w, b, s);
    }
    return f;
  }

  // Returns the value; fills (gw, gb) with the gradient.
  double value_and_gradient(const Eigen::VectorXd& w, double b,
                            Eigen::VectorXd& gw, double& gb) const {
    double f = l2 * (w.squaredNorm() + b * b);
    gw = 2.0 * l2 * w;
    gb = 2.0 * l2 * b;
    for (const auto& s : samples) {
      const double z = w.dot(s.x) + b;
      f += s.weight * (softplus(z) - static_cast<double>(s.y) * z);
      const double r = s.weight * (sigmoid(z) - static_cast<double>(s.y));
      gw.noalias() += r * s.x;
      gb += r;
    }
    return f;
  }
};

}  // namespace

HindsightOptimum hindsight_optimum(std::span<const LabeledSample> samples,
                                   int feature_dim, const HindsightOptions& opts) {
  if (samples.empty()) {
    throw InvalidArgumentError("hindsight optimum needs a non-empty sample stream");
  }
  bool has_pos = false, has_neg = false;
  for (const auto& s : samples) {
    if (s.x.size() != feature_dim) {
      throw ShapeError(fmt::format("sample dimension {} does not match feature_dim {}",
                                   s.x.size(), feature_dim));
    }
    if (s.weight > 0.0) {
      (s.y == 1 ? has_pos : has_neg) = true;
    }
  }
  if ((has_pos != has_neg) && !opts.allow_single_class) {
    throw InvalidArgumentError(
        "sample stream carries only one label; the optimum direction is "
        "pinned by the regularizer alone (set allow_single_class to accept)");
  }

  const Objective obj{samples, opts.l2};
  Eigen::VectorXd w = Eigen::VectorXd::Zero(feature_dim);
  double b = 0.0;
  Eigen::VectorXd gw(feature_dim);
  double gb = 0.0;
  Eigen::VectorXd w_try(feature_dim);

  HindsightOptimum out;
  out.l2 = opts.l2;

  double step = 1.0;
  double f = obj.value_and_gradient(w, b, gw, gb);
  int stalled = 0;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const double g2 = gw.squaredNorm() + gb * gb;
    if (std::sqrt(g2) <= opts.grad_tol) {
      out.converged_flag = true;
      break;
    }
    // Armijo backtracking, reusing (and growing) the last accepted step.
    step = std::min(step * 2.0, 1e12);
    bool accepted = false;
    while (step > 1e-18) {
      w_try = w - step * gw;
      const double b_try = b - step * gb;
      const double f_try = obj.value(w_try, b_try);
      if (f_try <= f - 1e-4 * step * g2) {
        const double decrease = f - f_try;
        w.swap(w_try);
        b = b_try;
        f = obj.value_and_gradient(w, b, gw, gb);
        accepted = true;
        // Track whether descent still makes representable progress; near
        // the total-loss ulp the gradient tolerance can be unreachable.
        const double ulp_scale =
            16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(f), 1e-12);
        stalled = decrease <= ulp_scale ? stalled + 1 : 0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || stalled >= 3) {
      break;
    }
  }

  out.weights = std::move(w);
  out.bias = b;
  out.training_loss = f;
  return out;
}

double regret(const MetricsLog& log, const HindsightOptimum& opt,
              std::span<const LabeledSample> samples) {
  if (log.sample_losses.size() != samples.size() ||
      log.sample_param_norms.size() != samples.size()) {
    throw InvalidArgumentError(
        fmt::format("recorded losses ({} plain, {} norms) misaligned with {} samples",
                    log.sample_losses.size(), log.sample_param_norms.size(), samples.size()));
  }
  const double opt_reg = opt.l2 * (opt.weights.squaredNorm() + opt.bias * opt.bias);
  double online = 0.0;
  double comparator = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    online += log.sample_losses[i] + opt.l2 * log.sample_param_norms[i];
    comparator += weighted_logistic_loss(opt.weights, opt.bias, samples[i]) + opt_reg;
  }
  return online - comparator;
}

}  // namespace tracklearn
