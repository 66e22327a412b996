#include "tracklearn/fusion.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "tracklearn/errors.hpp"

namespace tracklearn {

void DetectionSet::validate() const {
  if (detections.empty()) {
    throw InvalidArgumentError("detection set is empty");
  }
  if (detector_count < 1) {
    throw InvalidArgumentError("detection set needs at least one detector");
  }
  for (const auto& d : detections) {
    if (d.detector_id < 0 || d.detector_id >= detector_count) {
      throw InvalidArgumentError(
          fmt::format("detection {} references detector {} outside [0, {})",
                      d.detection_id, d.detector_id, detector_count));
    }
  }
}

DetectionSet make_detection_set(std::vector<DetectionConfidence> detections) {
  DetectionSet ds;
  ds.detections = std::move(detections);
  std::vector<int> counts;
  for (const auto& d : ds.detections) {
    ds.detector_count = std::max(ds.detector_count, d.detector_id + 1);
    if (d.detector_id >= 0) {
      if (static_cast<std::size_t>(d.detector_id) >= counts.size()) {
        counts.resize(d.detector_id + 1, 0);
      }
      ++counts[d.detector_id];
    }
  }
  for (const int c : counts) {
    ds.max_per_detector = std::max(ds.max_per_detector, c);
  }
  ds.validate();
  return ds;
}

double clamp_probability(double p) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
    throw InvalidArgumentError(fmt::format("invalid probability {}", p));
  }
  return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
}

double odds(double p) {
  const double q = clamp_probability(p);
  return q / (1.0 - q);
}

double log_odds(double p) {
  const double q = clamp_probability(p);
  return std::log(q) - std::log1p(-q);
}

namespace {

double fuse_log_odds(std::vector<double> terms) {
  // Canonical summation order makes fuse() exactly permutation-invariant.
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (const double t : terms) {
    sum += t;
  }
  // o / (1 + o) expressed through the logistic of the log-odds sum.
  if (sum >= 0.0) {
    return 1.0 / (1.0 + std::exp(-sum));
  }
  const double e = std::exp(sum);
  return e / (1.0 + e);
}

}  // namespace

double fuse(const DetectionSet& ds) {
  ds.validate();
  std::vector<double> terms;
  terms.reserve(ds.detections.size());
  for (const auto& d : ds.detections) {
    terms.push_back(log_odds(d.prob));
  }
  return fuse_log_odds(std::move(terms));
}

double fuse(std::span<const double> probs) {
  if (probs.empty()) {
    throw InvalidArgumentError("detection set is empty");
  }
  std::vector<double> terms;
  terms.reserve(probs.size());
  for (const double p : probs) {
    terms.push_back(log_odds(p));
  }
  return fuse_log_odds(std::move(terms));
}

}  // namespace tracklearn
