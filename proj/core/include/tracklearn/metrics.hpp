#pragma once

#include <span>
#include <vector>

#include "tracklearn/detectors.hpp"
#include "tracklearn/types.hpp"

namespace tracklearn {

/// One periodic evaluation of the online model on the fixed evaluation set.
struct EvalRecord {
  int t = 0;                   // 1-based evaluation index
  int frame = 0;               // frame at which the evaluation ran
  int u = 0;                   // correct predictions on the evaluation set
  double online_loss = 0.0;    // cumulative online loss up to this point
  double eval_accuracy = 0.0;  // u / eval_set_size
};

struct MetricsLog {
  std::vector<EvalRecord> records;
  int eval_set_size = 0;
  double baseline_accuracy = 0.0;  // expectation-band center
  // Per consumed sample, in consumption order, both measured against the
  // model *before* that update: the plain loss, and the squared parameter
  // norm |(w, b)|^2 from which the regret comparison builds its L2 term.
  std::vector<double> sample_losses;
  std::vector<double> sample_param_norms;
};

/// Correct predictions of m on an evaluation set (threshold 0.5).
int count_correct(const DynamicModel& m, std::span<const LabeledSample> eval);

/// Weighted logistic loss of one sample under arbitrary parameters.
double weighted_logistic_loss(const Eigen::VectorXd& weights, double bias,
                              const LabeledSample& s);

/// Sum of |u_t - u_{t+1}| for t = 1 .. T-1. The horizon form is summed to
/// T-1 so the quantity is well defined from the recorded evaluations alone.
/// Throws InsufficientDataError when T exceeds the available records.
double stability(const MetricsLog& log, int T);

/// stability(log, T) / T; vanishing as T grows signals stabilization.
double stability_rate(const MetricsLog& log, int T);

/// Mean |u_t - u_{t+1}| / eval_set_size over the trailing `window`
/// evaluations (window - 1 consecutive pairs).
double windowed_stability_rate(const MetricsLog& log, int window);

/// True iff, over the last `window` evaluations, the windowed stability
/// rate is <= tau and the mean evaluation accuracy stays within delta of
/// the baseline expectation.
bool converged(const MetricsLog& log, int window, double tau, double delta);

struct HindsightOptions {
  double l2 = 1e-8;  // keeps separable optima bounded
  double grad_tol = 1e-6;
  int max_iterations = 50000;
  bool allow_single_class = false;
};

/// Best fixed parameters in hindsight for a recorded sample stream.
struct HindsightOptimum {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double training_loss = 0.0;  // total objective value at the optimum
  bool converged_flag = false; // gradient norm reached grad_tol
  double l2 = 1e-8;
};

/// Batch minimization of the total weighted logistic loss (plus a tiny L2
/// term) by full-gradient descent with backtracking line search, run until
/// the gradient norm reaches grad_tol or the iteration cap.
///
/// Throws InvalidArgumentError on empty input, or when the positive-weight
/// samples carry only one label and allow_single_class is not set.
HindsightOptimum hindsight_optimum(std::span<const LabeledSample> samples,
                                   int feature_dim,
                                   const HindsightOptions& opts = {});

/// Cumulative online loss minus the loss of the hindsight optimum over the
/// same stream. Both sums use the regularized per-step loss that defined
/// the optimum. Throws InvalidArgumentError if the recorded losses and the
/// sample stream are misaligned.
double regret(const MetricsLog& log, const HindsightOptimum& opt,
              std::span<const LabeledSample> samples);

}  // namespace tracklearn
