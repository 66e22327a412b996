#pragma once

#include <span>
#include <vector>

namespace tracklearn {

/// Probabilities are clamped into [kProbEpsilon, 1 - kProbEpsilon] before
/// odds conversion; the odds ratio is singular at p = 1.
inline constexpr double kProbEpsilon = 1e-6;

/// One detector's confidence that a detection belongs to the target class.
struct DetectionConfidence {
  double prob = 0.5;    // P(Y | d) in (0, 1) after clamping
  int detector_id = 0;  // j
  int detection_id = 0; // i
};

/// A non-empty collection of detections from `detector_count` detectors.
struct DetectionSet {
  std::vector<DetectionConfidence> detections;
  int detector_count = 0;       // o
  int max_per_detector = 0;     // k

  /// Throws InvalidArgumentError on an empty set, detector_count < 1, or a
  /// detection referencing an out-of-range detector.
  void validate() const;
};

/// Builds a DetectionSet, deriving detector_count and max_per_detector.
DetectionSet make_detection_set(std::vector<DetectionConfidence> detections);

/// Clamps p into [kProbEpsilon, 1 - kProbEpsilon]. Throws
/// InvalidArgumentError if p is outside [0, 1] or non-finite.
double clamp_probability(double p);

/// odds(p) = p / (1 - p), after clamping.
double odds(double p);

/// log odds(p), after clamping. Fusion accumulates in this space.
double log_odds(double p);

/// Fuses independent detection confidences into a single probability:
/// the per-detection odds are multiplied (as a sum of log odds) and mapped
/// back through o / (1 + o). Log-odds terms are sorted before summation so
/// the result is bit-identical under any reordering of the detections.
double fuse(const DetectionSet& ds);

/// Convenience overload over bare probabilities.
double fuse(std::span<const double> probs);

}  // namespace tracklearn
