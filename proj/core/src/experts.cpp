#include "tracklearn/experts.hpp"

#include <fmt/core.h>

namespace tracklearn {

std::vector<std::string> ExpertConfig::validate() const {
  std::vector<std::string> v;
  if (!(speed_min >= 0.0) || !(speed_max > speed_min)) {
    v.push_back(fmt::format("experts.speed range [{}, {}] must satisfy 0 <= min < max",
                            speed_min, speed_max));
  }
  if (!(min_duration > 0.0)) v.push_back("experts.min_duration must be > 0");
  if (!(min_displacement > 0.0)) v.push_back("experts.min_displacement must be > 0");
  if (!(max_cov_trace > 0.0)) v.push_back("experts.max_cov_trace must be > 0");
  if (!(static_displacement > 0.0)) v.push_back("experts.static_displacement must be > 0");
  // Keeps the P and N predicates mutually exclusive for any trajectory.
  if (!(min_displacement > static_displacement)) {
    v.push_back(fmt::format(
        "experts.min_displacement ({}) must exceed experts.static_displacement ({})",
        min_displacement, static_displacement));
  }
  return v;
}

bool human_plausible(const TrackStats& stats, const ExpertConfig& cfg) {
  return stats.duration >= cfg.min_duration && stats.avg_speed >= cfg.speed_min &&
         stats.avg_speed <= cfg.speed_max && stats.displacement >= cfg.min_displacement &&
         stats.max_cov_trace <= cfg.max_cov_trace;
}

bool human_implausible(const TrackStats& stats, const ExpertConfig& cfg) {
  const bool near_static =
      stats.displacement <= cfg.static_displacement && stats.duration >= cfg.min_duration;
  const bool speed_out = stats.avg_speed < cfg.speed_min || stats.avg_speed > cfg.speed_max;
  return near_static || speed_out;
}

namespace {

std::vector<LabeledSample> correct_misclassified(
    std::span<const TrackObservation> history, bool emit_positives) {
  std::vector<LabeledSample> samples;
  for (const auto& obs : history) {
    const bool misclassified =
        emit_positives ? obs.dyn_score < 0.5 : obs.dyn_score > 0.5;
    if (!misclassified) continue;
    LabeledSample s;
    s.x = obs.cluster.features;
    s.y = emit_positives ? 1 : 0;
    s.weight = 1.0;
    s.provenance = emit_positives ? Provenance::kPExpert : Provenance::kNExpert;
    s.frame = obs.frame;
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace

std::vector<LabeledSample> p_expert(const TrackStats& stats,
                                    std::span<const TrackObservation> history,
                                    const ExpertConfig& cfg) {
  if (!human_plausible(stats, cfg)) {
    return {};
  }
  return correct_misclassified(history, /*emit_positives=*/true);
}

std::vector<LabeledSample> n_expert(const TrackStats& stats,
                                    std::span<const TrackObservation> history,
                                    const ExpertConfig& cfg) {
  if (!human_implausible(stats, cfg)) {
    return {};
  }
  return correct_misclassified(history, /*emit_positives=*/false);
}

}  // namespace tracklearn
