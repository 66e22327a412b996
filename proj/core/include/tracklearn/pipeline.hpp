#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tracklearn/detectors.hpp"
#include "tracklearn/experts.hpp"
#include "tracklearn/tracker.hpp"
#include "tracklearn/types.hpp"

namespace tracklearn {

enum class Mode { kFrameworkA, kFrameworkB };

const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct LearnerConfig {
  double lr0 = 0.5;
  int fusion_window = 10;         // W most recent static confidences per track
  double ambiguity_margin = 0.1;  // fused labels within 0.5 +/- margin are dropped
  int expert_period = 20;         // frames between expert firings on live tracks
  int seed_positive = 1;          // framework A initial supervision
  int seed_negative = 0;

  std::vector<std::string> validate() const;
};

struct FrameOutput {
  std::vector<double> predictions;     // one per input cluster
  std::vector<double> static_outputs;  // one per input cluster, framework B only
  std::vector<LabeledSample> new_samples;
  std::vector<int> spawned_tracks;
  std::vector<int> confirmed_tracks;
  std::vector<int> dead_tracks;
};

/// Fuses the most recent `fusion_window` static confidences of a trajectory
/// window and, if the fused probability clears the ambiguity band, emits one
/// sample per window cluster with label round(p) and weight |2p - 1|.
/// Throws InvalidArgumentError on an empty window or one carrying no static
/// outputs.
std::vector<LabeledSample> generate_labels(std::span<const TrackObservation> history,
                                           int fusion_window, double ambiguity_margin);

/// Per-cluster confidence source standing in for the pretrained detector.
using StaticScorer = std::function<double(const FeatureCluster&)>;

/// Orchestrates one online-learning run over a cluster stream.
///
/// Framework A: the dynamic model scores every cluster, the tracker
/// correlates all clusters into trajectories, and the P/N experts harvest
/// corrective samples on track death and every expert_period frames.
///
/// Framework B: every cluster is scored by both detectors; static-positive
/// clusters drive track initiation while all clusters associate to existing
/// tracks, so each trajectory accumulates the full evidence the label
/// generator fuses. Labels are generated at confirmation and at the death
/// of confirmed tracks; there is no human-supervised input path.
///
/// Strictly sequential; owns all mutable state of a run.
class Pipeline {
 public:
  Pipeline(Mode mode, int feature_dim, LearnerConfig learner, TrackerConfig tracker,
           ExpertConfig experts, StaticScorer static_scorer = nullptr);

  /// Applies ground-truth seed samples before the first frame (framework A
  /// only; weight forced to 1, provenance to seed).
  void seed_supervision(std::span<const LabeledSample> seeds);

  FrameOutput step(std::span<const FeatureCluster> clusters, double dt);
  FrameOutput step_framework_a(std::span<const FeatureCluster> clusters, double dt);
  FrameOutput step_framework_b(std::span<const FeatureCluster> clusters, double dt);

  Mode mode() const { return mode_; }
  int frame() const { return frame_; }
  const DynamicModel& model() const { return model_; }
  const TrackSet& tracks() const { return tracks_; }
  const std::vector<LabeledSample>& sample_log() const { return sample_log_; }
  const std::vector<double>& sample_losses() const { return sample_losses_; }
  const std::vector<double>& sample_param_norms() const { return sample_param_norms_; }

 private:
  void apply_sample(const LabeledSample& s, FrameOutput* out);
  void fire_experts(Track& t, double dt, FrameOutput& out);
  void fire_fusion_labels(Track& t, FrameOutput& out);

  Mode mode_;
  LearnerConfig learner_;
  TrackerConfig tracker_cfg_;
  ExpertConfig expert_cfg_;
  StaticScorer static_scorer_;
  TrackSet tracks_;
  DynamicModel model_;
  std::vector<LabeledSample> sample_log_;
  std::vector<double> sample_losses_;
  std::vector<double> sample_param_norms_;
  int frame_ = 0;
  bool seeded_ = false;
};

}  // namespace tracklearn
