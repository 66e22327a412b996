#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tracklearn/types.hpp"

namespace tracklearn {

struct TrackerConfig {
  double process_noise_density = 0.5;   // white-noise acceleration, m^2/s^3
  double measurement_noise_std = 0.05;  // meters
  double gate = 9.21;                   // chi-square 99%, 2 DoF, on squared distance
  int confirm_hits = 3;                 // M hits ...
  int confirm_window = 4;               // ... within the first N frames
  int max_misses = 5;                   // consecutive misses before death
  double initial_position_var = 0.25;
  double initial_velocity_var = 4.0;

  std::vector<std::string> validate() const;
  Eigen::Matrix2d measurement_noise() const {
    return Eigen::Matrix2d::Identity() * (measurement_noise_std * measurement_noise_std);
  }
};

enum class TrackStatus { kTentative, kConfirmed, kDead };

const char* to_string(TrackStatus s);

/// One associated observation, with the detector outputs recorded at the
/// time the cluster was processed.
struct TrackObservation {
  int frame = 0;
  FeatureCluster cluster;
  double dyn_score = 0.5;
  std::optional<double> static_confidence;
  double position_cov_trace = 0.0;
};

/// A tracked target with constant-velocity Kalman state (x, y, vx, vy).
struct Track {
  int id = 0;
  Eigen::Vector4d state = Eigen::Vector4d::Zero();
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();
  TrackStatus status = TrackStatus::kTentative;
  int hits = 0;
  int misses = 0;
  int spawn_frame = 0;
  std::vector<TrackObservation> history;
  int label_cursor = 0;       // history entries before this are already labeled
  int last_expert_frame = 0;  // periodic expert firing bookkeeping

  Eigen::Vector2d position() const { return state.head<2>(); }
  bool alive() const { return status != TrackStatus::kDead; }
  int age(int frame) const { return frame - spawn_frame + 1; }
};

/// Kinematic summary of a trajectory, computed from the associated cluster
/// centroids and the covariance history.
struct TrackStats {
  double duration = 0.0;       // seconds
  double displacement = 0.0;   // straight-line start -> end, meters
  double path_length = 0.0;    // meters
  double avg_speed = 0.0;      // path_length / duration
  double max_cov_trace = 0.0;  // max positional covariance trace seen
};

/// Advances an alive track by dt under the constant-velocity model.
/// Throws InvalidArgumentError on dt <= 0 or a dead track.
Track kalman_predict(Track t, double dt, const TrackerConfig& cfg);

/// Applies a position measurement z with noise R. Throws on a dead track
/// or a singular innovation covariance.
Track kalman_update(Track t, const Eigen::Vector2d& z, const Eigen::Matrix2d& R);

/// Gate-checked squared Mahalanobis distance from a track's predicted
/// position to a measurement.
double track_mahalanobis2(const Track& t, const Eigen::Vector2d& z,
                          const TrackerConfig& cfg);

struct Association {
  std::vector<std::pair<int, int>> matches;  // (track index, cluster index)
  std::vector<int> unmatched_tracks;
  std::vector<int> unmatched_clusters;
  double total_cost = 0.0;  // sum of matched squared Mahalanobis distances
};

/// One-to-one association between predicted tracks and cluster centroids:
/// maximum cardinality over gate-passing pairs, minimum total squared
/// Mahalanobis distance among those, deterministic tie-breaking in
/// (track index, cluster index) order. Gated-out pairs are never assigned.
Association associate(std::span<const Track> tracks,
                      std::span<const Eigen::Vector2d> measurements,
                      const TrackerConfig& cfg);

/// Detector outputs attached to a cluster entering the tracker this frame.
struct ScoredCluster {
  FeatureCluster cluster;
  double dyn_score = 0.5;
  std::optional<double> static_confidence;
  bool may_spawn = true;  // false suppresses track initiation from this cluster
};

struct TrackSet {
  std::vector<Track> tracks;  // alive tracks only
  int next_id = 1;            // ids are never reused within a run
};

struct LifecycleResult {
  std::vector<int> spawned;
  std::vector<int> confirmed;
  std::vector<Track> dead;  // emitted exactly once, removed from the set
};

/// Applies an association outcome to the track set: matched tracks get a
/// Kalman update and a history entry, unmatched clusters spawn tentative
/// tracks, tentative tracks confirm after M hits within the first N frames,
/// and tracks die after max_misses consecutive misses (or a failed
/// confirmation window).
LifecycleResult lifecycle(TrackSet& ts, const Association& assoc,
                          std::span<const ScoredCluster> clusters, int frame,
                          const TrackerConfig& cfg);

/// Throws InsufficientDataError unless the track has >= 2 observations.
TrackStats track_summary(const Track& t, double dt);

}  // namespace tracklearn
