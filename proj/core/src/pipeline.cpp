#include "tracklearn/pipeline.hpp"

#include <cmath>

#include <fmt/core.h>

#include "tracklearn/errors.hpp"
#include "tracklearn/fusion.hpp"

namespace tracklearn {

const char* to_string(Mode m) {
  return m == Mode::kFrameworkA ? "framework_a" : "framework_b";
}

Mode mode_from_string(const std::string& s) {
  if (s == "framework_a" || s == "a") return Mode::kFrameworkA;
  if (s == "framework_b" || s == "b") return Mode::kFrameworkB;
  throw InvalidArgumentError(
      fmt::format("unknown mode '{}', expected framework_a or framework_b", s));
}

std::vector<std::string> LearnerConfig::validate() const {
  std::vector<std::string> v;
  if (!(lr0 > 0.0)) v.push_back(fmt::format("learner.lr0 must be > 0, got {}", lr0));
  if (fusion_window < 1) v.push_back("learner.fusion_window must be >= 1");
  if (!(ambiguity_margin >= 0.0 && ambiguity_margin < 0.5)) {
    v.push_back(fmt::format("learner.ambiguity_margin must be in [0, 0.5), got {}",
                            ambiguity_margin));
  }
  if (expert_period < 1) v.push_back("learner.expert_period must be >= 1");
  if (seed_positive < 0 || seed_negative < 0) {
    v.push_back("learner.seed sample counts must be >= 0");
  }
  return v;
}

std::vector<LabeledSample> generate_labels(std::span<const TrackObservation> history,
                                           int fusion_window, double ambiguity_margin) {
  if (history.empty()) {
    throw InvalidArgumentError("generate_labels needs a non-empty trajectory window");
  }
  // The window is the most recent fusion_window observations carrying a
  // static confidence.
  std::vector<const TrackObservation*> window;
  for (auto it = history.rbegin();
       it != history.rend() && static_cast<int>(window.size()) < fusion_window; ++it) {
    if (it->static_confidence.has_value()) {
      window.push_back(&*it);
    }
  }
  if (window.empty()) {
    throw InvalidArgumentError("trajectory window carries no static outputs");
  }
  std::vector<double> probs;
  probs.reserve(window.size());
  for (const TrackObservation* obs : window) {
    probs.push_back(*obs->static_confidence);
  }
  const double fused = fuse(probs);
  if (std::abs(fused - 0.5) <= ambiguity_margin) {
    return {};
  }
  const int label = fused > 0.5 ? 1 : 0;
  const double weight = std::abs(2.0 * fused - 1.0);
  std::vector<LabeledSample> samples;
  samples.reserve(window.size());
  // Restore chronological order (the window was collected newest-first).
  for (auto it = window.rbegin(); it != window.rend(); ++it) {
    LabeledSample s;
    s.x = (*it)->cluster.features;
    s.y = label;
    s.weight = weight;
    s.provenance = Provenance::kFusion;
    s.frame = (*it)->frame;
    samples.push_back(std::move(s));
  }
  return samples;
}

Pipeline::Pipeline(Mode mode, int feature_dim, LearnerConfig learner,
                   TrackerConfig tracker, ExpertConfig experts, StaticScorer static_scorer)
    : mode_(mode),
      learner_(std::move(learner)),
      tracker_cfg_(std::move(tracker)),
      expert_cfg_(std::move(experts)),
      static_scorer_(std::move(static_scorer)),
      model_(make_model(feature_dim, learner_.lr0)) {
  std::vector<std::string> violations = learner_.validate();
  for (auto& v : tracker_cfg_.validate()) violations.push_back(std::move(v));
  for (auto& v : expert_cfg_.validate()) violations.push_back(std::move(v));
  if (mode_ == Mode::kFrameworkB && !static_scorer_) {
    violations.push_back("framework B requires a static detector");
  }
  if (!violations.empty()) {
    throw ValidationError(std::move(violations));
  }
}

void Pipeline::apply_sample(const LabeledSample& s, FrameOutput* out) {
  sample_losses_.push_back(loss_and_gradient(model_, s).loss);
  sample_param_norms_.push_back(model_.weights.squaredNorm() + model_.bias * model_.bias);
  model_ = dyn_update(model_, s);
  sample_log_.push_back(s);
  if (out != nullptr) {
    out->new_samples.push_back(s);
  }
}

void Pipeline::seed_supervision(std::span<const LabeledSample> seeds) {
  if (mode_ != Mode::kFrameworkA) {
    throw InvalidPhaseError("seed supervision is a framework A operation");
  }
  if (frame_ != 0) {
    throw InvalidPhaseError(
        fmt::format("seed supervision must run before frame 0, current frame {}", frame_));
  }
  if (seeds.empty()) {
    throw InvalidArgumentError("seed supervision needs at least one sample");
  }
  for (const LabeledSample& seed : seeds) {
    LabeledSample s = seed;
    s.weight = 1.0;
    s.provenance = Provenance::kSeed;
    apply_sample(s, nullptr);
  }
  seeded_ = true;
}

void Pipeline::fire_experts(Track& t, double dt, FrameOutput& out) {
  if (t.history.size() < 2) {
    return;
  }
  const auto unlabeled =
      std::span<const TrackObservation>(t.history).subspan(t.label_cursor);
  if (unlabeled.empty()) {
    return;
  }
  const TrackStats stats = track_summary(t, dt);
  if (!human_plausible(stats, expert_cfg_) && !human_implausible(stats, expert_cfg_)) {
    return;  // no trajectory verdict yet; keep the observations for later
  }
  for (const LabeledSample& s : p_expert(stats, unlabeled, expert_cfg_)) {
    apply_sample(s, &out);
  }
  for (const LabeledSample& s : n_expert(stats, unlabeled, expert_cfg_)) {
    apply_sample(s, &out);
  }
  t.label_cursor = static_cast<int>(t.history.size());
}

void Pipeline::fire_fusion_labels(Track& t, FrameOutput& out) {
  const auto unlabeled =
      std::span<const TrackObservation>(t.history).subspan(t.label_cursor);
  if (unlabeled.empty()) {
    return;
  }
  const std::vector<LabeledSample> samples =
      generate_labels(unlabeled, learner_.fusion_window, learner_.ambiguity_margin);
  if (samples.empty()) {
    return;  // ambiguous fusion; the window may resolve with more evidence
  }
  for (const LabeledSample& s : samples) {
    apply_sample(s, &out);
  }
  t.label_cursor = static_cast<int>(t.history.size());
}

FrameOutput Pipeline::step(std::span<const FeatureCluster> clusters, double dt) {
  return mode_ == Mode::kFrameworkA ? step_framework_a(clusters, dt)
                                    : step_framework_b(clusters, dt);
}

FrameOutput Pipeline::step_framework_a(std::span<const FeatureCluster> clusters, double dt) {
  if (mode_ != Mode::kFrameworkA) {
    throw InvalidPhaseError("pipeline is not in framework A mode");
  }
  if (!seeded_) {
    throw InvalidPhaseError("framework A requires seed supervision before the first frame");
  }
  FrameOutput out;
  std::vector<ScoredCluster> scored;
  scored.reserve(clusters.size());
  out.predictions.reserve(clusters.size());
  for (const FeatureCluster& c : clusters) {
    const double p = dyn_predict(model_, c.features);
    out.predictions.push_back(p);
    scored.push_back({c, p, std::nullopt});
  }

  for (Track& t : tracks_.tracks) {
    t = kalman_predict(std::move(t), dt, tracker_cfg_);
  }
  std::vector<Eigen::Vector2d> measurements;
  measurements.reserve(scored.size());
  for (const ScoredCluster& sc : scored) {
    measurements.push_back(sc.cluster.centroid);
  }
  const Association assoc = associate(tracks_.tracks, measurements, tracker_cfg_);
  LifecycleResult life = lifecycle(tracks_, assoc, scored, frame_, tracker_cfg_);
  out.spawned_tracks = std::move(life.spawned);
  out.confirmed_tracks = std::move(life.confirmed);
  for (Track& dead : life.dead) {
    out.dead_tracks.push_back(dead.id);
    fire_experts(dead, dt, out);
  }
  for (Track& t : tracks_.tracks) {
    if (t.status == TrackStatus::kConfirmed &&
        frame_ - t.last_expert_frame >= learner_.expert_period) {
      fire_experts(t, dt, out);
      t.last_expert_frame = frame_;
    }
  }
  ++frame_;
  return out;
}

FrameOutput Pipeline::step_framework_b(std::span<const FeatureCluster> clusters, double dt) {
  if (mode_ != Mode::kFrameworkB) {
    throw InvalidPhaseError("pipeline is not in framework B mode");
  }
  FrameOutput out;
  std::vector<ScoredCluster> scored;
  scored.reserve(clusters.size());
  out.predictions.reserve(clusters.size());
  out.static_outputs.reserve(clusters.size());
  for (const FeatureCluster& c : clusters) {
    const double p = dyn_predict(model_, c.features);
    const double s = static_scorer_(c);
    out.predictions.push_back(p);
    out.static_outputs.push_back(s);
    ScoredCluster sc{c, p, s};
    // Detection-driven initiation: only static-positive clusters may open a
    // new trajectory. Existing tracks still associate against everything so
    // their windows carry the full evidence the fusion needs.
    sc.may_spawn = s > 0.5;
    scored.push_back(std::move(sc));
  }

  for (Track& t : tracks_.tracks) {
    t = kalman_predict(std::move(t), dt, tracker_cfg_);
  }
  std::vector<Eigen::Vector2d> measurements;
  measurements.reserve(scored.size());
  for (const ScoredCluster& sc : scored) {
    measurements.push_back(sc.cluster.centroid);
  }
  const Association assoc = associate(tracks_.tracks, measurements, tracker_cfg_);
  LifecycleResult life = lifecycle(tracks_, assoc, scored, frame_, tracker_cfg_);
  out.spawned_tracks = std::move(life.spawned);
  out.confirmed_tracks = std::move(life.confirmed);

  for (const int id : out.confirmed_tracks) {
    for (Track& t : tracks_.tracks) {
      if (t.id == id) {
        fire_fusion_labels(t, out);
        break;
      }
    }
  }
  for (Track& dead : life.dead) {
    out.dead_tracks.push_back(dead.id);
    if (dead.hits >= tracker_cfg_.confirm_hits) {
      fire_fusion_labels(dead, out);
    }
  }
  ++frame_;
  return out;
}

}  // namespace tracklearn
