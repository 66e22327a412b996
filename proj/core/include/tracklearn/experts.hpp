#pragma once

#include <span>
#include <string>
#include <vector>

#include "tracklearn/tracker.hpp"
#include "tracklearn/types.hpp"

namespace tracklearn {

/// Thresholds for the kinematic plausibility rules. The defaults describe a
/// human walking envelope; they are configuration, not ground truth.
struct ExpertConfig {
  double min_duration = 2.0;         // seconds
  double speed_min = 0.3;            // m/s
  double speed_max = 3.0;            // m/s
  double min_displacement = 1.0;     // meters
  double max_cov_trace = 2.0;        // m^2
  double static_displacement = 0.2;  // meters

  std::vector<std::string> validate() const;
};

/// True if the trajectory is kinematically human-plausible.
bool human_plausible(const TrackStats& stats, const ExpertConfig& cfg);

/// True if the trajectory is human-implausible (near-static over a long
/// window, or speed outside the envelope).
bool human_implausible(const TrackStats& stats, const ExpertConfig& cfg);

/// P-expert: on a human-plausible trajectory, re-labels as positive every
/// history cluster the dynamic classifier scored below 0.5. Recovers false
/// negatives; emits nothing otherwise.
std::vector<LabeledSample> p_expert(const TrackStats& stats,
                                    std::span<const TrackObservation> history,
                                    const ExpertConfig& cfg);

/// N-expert: on a human-implausible trajectory, re-labels as negative every
/// history cluster the dynamic classifier scored above 0.5. Purges false
/// positives; emits nothing otherwise.
std::vector<LabeledSample> n_expert(const TrackStats& stats,
                                    std::span<const TrackObservation> history,
                                    const ExpertConfig& cfg);

}  // namespace tracklearn
