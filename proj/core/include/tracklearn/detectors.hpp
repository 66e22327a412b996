#pragma once

#include <cstdint>

#include "tracklearn/fusion.hpp"
#include "tracklearn/rng.hpp"
#include "tracklearn/types.hpp"

namespace tracklearn {

/// Online-learned linear classifier: p(human | x) = sigmoid(w.x + b).
struct DynamicModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  std::int64_t updates = 0;  // applied learning steps
  double lr0 = 0.5;          // base learning rate; step t uses lr0 / sqrt(t)
};

DynamicModel make_model(int feature_dim, double lr0);

/// sigmoid(w.x + b); always in (0, 1). Throws ShapeError on a dimension
/// mismatch.
double dyn_predict(const DynamicModel& m, const FeatureVector& x);

struct LossGradient {
  double loss = 0.0;
  Eigen::VectorXd grad_weights;
  double grad_bias = 0.0;
};

/// Weighted logistic loss and its exact gradient:
///   loss = weight * (-y log p - (1-y) log(1-p)),  p = dyn_predict(m, x)
///   grad = weight * (p - y) * (x, 1)
LossGradient loss_and_gradient(const DynamicModel& m, const LabeledSample& s);

/// One online gradient step, w <- w - lr0/sqrt(updates+1) * grad.
/// On a non-finite gradient throws NumericalError and leaves the model
/// untouched.
DynamicModel dyn_update(DynamicModel m, const LabeledSample& s);

/// Numerically stable helpers shared with the metrics module.
double sigmoid(double z);
double softplus(double z);  // log(1 + e^z)

/// Stochastic ground-truth-informed oracle standing in for a pretrained
/// detector. Accuracy and confidence sharpness are configuration, making
/// teacher quality a controlled experimental variable.
struct StaticDetectorConfig {
  double accuracy = 0.9;        // probability of confidence on the correct side
  double concentration = 2.0;   // sharpness of emitted confidences
  std::uint64_t seed = 0;

  std::vector<std::string> validate() const;
};

class StaticDetector {
 public:
  explicit StaticDetector(const StaticDetectorConfig& cfg);

  /// Draws one confidence from the detector's own seeded stream. With
  /// probability `accuracy` the confidence lands on the correct side of 0.5,
  /// concentrated toward the extreme as `concentration` grows.
  DetectionConfidence detect(const FeatureCluster& cluster);

  const StaticDetectorConfig& config() const { return cfg_; }

 private:
  StaticDetectorConfig cfg_;
  RngStream rng_;
  int next_detection_id_ = 0;
};

}  // namespace tracklearn
