#include "tracklearn/detectors.hpp"

#include <cmath>

#include <fmt/core.h>

#include "tracklearn/errors.hpp"

namespace tracklearn {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::kSeed: return "seed";
    case Provenance::kPExpert: return "p_expert";
    case Provenance::kNExpert: return "n_expert";
    case Provenance::kFusion: return "fusion";
    case Provenance::kEval: return "eval";
  }
  return "unknown";
}

DynamicModel make_model(int feature_dim, double lr0) {
  if (feature_dim < 1) {
    throw InvalidArgumentError("feature dimension must be >= 1");
  }
  DynamicModel m;
  m.weights = Eigen::VectorXd::Zero(feature_dim);
  m.lr0 = lr0;
  return m;
}

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  if (z > 35.0) {
    return z;
  }
  if (z < -35.0) {
    return std::exp(z);
  }
  return std::log1p(std::exp(z));
}

namespace {

void check_dims(const DynamicModel& m, const FeatureVector& x) {
  if (m.weights.size() != x.size()) {
    throw ShapeError(fmt::format("feature dimension {} does not match model dimension {}",
                                 x.size(), m.weights.size()));
  }
}

}  // namespace

double dyn_predict(const DynamicModel& m, const FeatureVector& x) {
  check_dims(m, x);
  return sigmoid(m.weights.dot(x) + m.bias);
}

LossGradient loss_and_gradient(const DynamicModel& m, const LabeledSample& s) {
  check_dims(m, s.x);
  const double z = m.weights.dot(s.x) + m.bias;
  const double p = sigmoid(z);
  LossGradient lg;
  // softplus(z) - y*z  ==  -y log p - (1-y) log(1-p), stable for large |z|.
  lg.loss = s.weight * (softplus(z) - static_cast<double>(s.y) * z);
  const double r = s.weight * (p - static_cast<double>(s.y));
  lg.grad_weights = r * s.x;
  lg.grad_bias = r;
  return lg;
}

DynamicModel dyn_update(DynamicModel m, const LabeledSample& s) {
  const LossGradient lg = loss_and_gradient(m, s);
  if (!lg.grad_weights.allFinite() || !std::isfinite(lg.grad_bias)) {
    throw NumericalError("non-finite gradient; model left unchanged");
  }
  const double eta = m.lr0 / std::sqrt(static_cast<double>(m.updates + 1));
  m.weights.noalias() -= eta * lg.grad_weights;
  m.bias -= eta * lg.grad_bias;
  ++m.updates;
  return m;
}

std::vector<std::string> StaticDetectorConfig::validate() const {
  std::vector<std::string> v;
  if (!(accuracy > 0.5 && accuracy <= 1.0)) {
    v.push_back(fmt::format("static_detector.accuracy must be in (0.5, 1], got {}", accuracy));
  }
  if (!(concentration > 0.0)) {
    v.push_back(fmt::format("static_detector.concentration must be positive, got {}", concentration));
  }
  return v;
}

StaticDetector::StaticDetector(const StaticDetectorConfig& cfg)
    : cfg_(cfg), rng_(cfg.seed) {
  if (auto v = cfg.validate(); !v.empty()) {
    throw ValidationError(std::move(v));
  }
}

DetectionConfidence StaticDetector::detect(const FeatureCluster& cluster) {
  const bool correct = rng_.bernoulli(cfg_.accuracy);
  // Beta(concentration, 1) magnitude via inverse CDF; -> 1 as concentration
  // grows, so confidences approach the clamp bound in the perfect limit.
  const double magnitude = std::pow(rng_.uniform_pos(), 1.0 / cfg_.concentration);
  const bool is_human = cluster.truth == TruthLabel::kHuman;
  const bool say_human = correct == is_human;
  const double raw = say_human ? 0.5 + 0.5 * magnitude : 0.5 - 0.5 * magnitude;
  DetectionConfidence d;
  d.prob = clamp_probability(raw);
  d.detector_id = 0;
  d.detection_id = next_detection_id_++;
  return d;
}

}  // namespace tracklearn
