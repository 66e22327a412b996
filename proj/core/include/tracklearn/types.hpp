#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>

namespace tracklearn {

using FeatureVector = Eigen::VectorXd;

/// Ground-truth class of a simulated cluster. Hidden from the learning
/// path; only the static oracle and the evaluation code may read it.
enum class TruthLabel { kHuman, kClutter };

/// One segmented observation: planar centroid plus a feature vector.
struct FeatureCluster {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  FeatureVector features;
  TruthLabel truth = TruthLabel::kClutter;
  std::optional<int> agent_id;  // absent for false-positive clusters
  int frame = 0;
};

enum class Provenance { kSeed, kPExpert, kNExpert, kFusion, kEval };

const char* to_string(Provenance p);

/// A training (or evaluation) sample with a soft label weight.
struct LabeledSample {
  FeatureVector x;
  int y = 0;              // 0 or 1
  double weight = 1.0;    // confidence in [0, 1]
  Provenance provenance = Provenance::kSeed;
  int frame = 0;
};

}  // namespace tracklearn
