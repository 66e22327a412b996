#include "tracklearn/tracker.hpp"

#include <cmath>

#include <fmt/core.h>

#include "tracklearn/assignment.hpp"
#include "tracklearn/errors.hpp"
#include "tracklearn/kalman.hpp"

namespace tracklearn {

namespace {

// Track assignment leaves an entity unmatched at this cost. It exceeds any
// feasible sum of gated pair costs at desk scale, so maximum cardinality is
// always preferred, while staying small enough for exact potentials.
constexpr double kUnmatchedCost = 1e4;

Eigen::Matrix<double, 2, 4> measurement_matrix() {
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  return h;
}

void require_alive(const Track& t, const char* op) {
  if (!t.alive()) {
    throw InvalidArgumentError(fmt::format("{} on dead track {}", op, t.id));
  }
}

}  // namespace

const char* to_string(TrackStatus s) {
  switch (s) {
    case TrackStatus::kTentative: return "tentative";
    case TrackStatus::kConfirmed: return "confirmed";
    case TrackStatus::kDead: return "dead";
  }
  return "unknown";
}

std::vector<std::string> TrackerConfig::validate() const {
  std::vector<std::string> v;
  if (!(process_noise_density >= 0.0)) v.push_back("tracker.process_noise_density must be >= 0");
  if (!(measurement_noise_std > 0.0)) v.push_back("tracker.measurement_noise_std must be > 0");
  if (!(gate > 0.0)) v.push_back("tracker.gate must be > 0");
  if (confirm_hits < 1) v.push_back("tracker.confirm_hits must be >= 1");
  if (confirm_window < confirm_hits) v.push_back("tracker.confirm_window must be >= confirm_hits");
  if (max_misses < 1) v.push_back("tracker.max_misses must be >= 1");
  if (!(initial_position_var > 0.0)) v.push_back("tracker.initial_position_var must be > 0");
  if (!(initial_velocity_var > 0.0)) v.push_back("tracker.initial_velocity_var must be > 0");
  return v;
}

Track kalman_predict(Track t, double dt, const TrackerConfig& cfg) {
  require_alive(t, "kalman_predict");
  if (!(dt > 0.0)) {
    throw InvalidArgumentError(fmt::format("dt must be positive, got {}", dt));
  }
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;

  // Continuous white-noise acceleration, integrated per axis.
  const double q = cfg.process_noise_density;
  const double q3 = q * dt * dt * dt / 3.0;
  const double q2 = q * dt * dt / 2.0;
  const double q1 = q * dt;
  Eigen::Matrix4d noise = Eigen::Matrix4d::Zero();
  noise(0, 0) = q3;
  noise(1, 1) = q3;
  noise(0, 2) = q2;
  noise(2, 0) = q2;
  noise(1, 3) = q2;
  noise(3, 1) = q2;
  noise(2, 2) = q1;
  noise(3, 3) = q1;

  kalman::predict<4>(t.state, t.covariance, f, noise);
  return t;
}

Track kalman_update(Track t, const Eigen::Vector2d& z, const Eigen::Matrix2d& R) {
  require_alive(t, "kalman_update");
  kalman::update<4, 2>(t.state, t.covariance, z, measurement_matrix(), R);
  return t;
}

double track_mahalanobis2(const Track& t, const Eigen::Vector2d& z,
                          const TrackerConfig& cfg) {
  return kalman::mahalanobis2<4, 2>(t.state, t.covariance, z,
                                    measurement_matrix(), cfg.measurement_noise());
}

Association associate(std::span<const Track> tracks,
                      std::span<const Eigen::Vector2d> measurements,
                      const TrackerConfig& cfg) {
  Association out;
  const int nt = static_cast<int>(tracks.size());
  const int nc = static_cast<int>(measurements.size());
  if (nt == 0 || nc == 0) {
    for (int i = 0; i < nt; ++i) out.unmatched_tracks.push_back(i);
    for (int j = 0; j < nc; ++j) out.unmatched_clusters.push_back(j);
    return out;
  }

  Eigen::MatrixXd pair_cost(nt, nc);
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < nc; ++j) {
      const double d2 = track_mahalanobis2(tracks[i], measurements[j], cfg);
      pair_cost(i, j) = d2 <= cfg.gate ? d2 : kForbiddenCost;
    }
  }

  // Square problem with explicit unmatched slots: column nc+i leaves track i
  // unmatched, row nt+j leaves cluster j unmatched, dummy-dummy pairs are
  // free.
  const int n = nt + nc;
  Eigen::MatrixXd cost(n, n);
  cost.setConstant(kForbiddenCost);
  cost.block(0, 0, nt, nc) = pair_cost;
  for (int i = 0; i < nt; ++i) cost(i, nc + i) = kUnmatchedCost;
  for (int j = 0; j < nc; ++j) cost(nt + j, j) = kUnmatchedCost;
  cost.block(nt, nc, nc, nt).setZero();

  const std::vector<int> row_to_col = solve_square_assignment(cost);
  for (int i = 0; i < nt; ++i) {
    const int j = row_to_col[i];
    if (j < nc && pair_cost(i, j) < kForbiddenCost) {
      out.matches.emplace_back(i, j);
      out.total_cost += pair_cost(i, j);
    } else {
      out.unmatched_tracks.push_back(i);
    }
  }
  std::vector<char> cluster_matched(nc, 0);
  for (const auto& [i, j] : out.matches) cluster_matched[j] = 1;
  for (int j = 0; j < nc; ++j) {
    if (!cluster_matched[j]) out.unmatched_clusters.push_back(j);
  }
  return out;
}

LifecycleResult lifecycle(TrackSet& ts, const Association& assoc,
                          std::span<const ScoredCluster> clusters, int frame,
                          const TrackerConfig& cfg) {
  LifecycleResult result;
  const Eigen::Matrix2d r = cfg.measurement_noise();

  for (const auto& [ti, cj] : assoc.matches) {
    Track& t = ts.tracks[ti];
    const ScoredCluster& sc = clusters[cj];
    t = kalman_update(std::move(t), sc.cluster.centroid, r);
    ++t.hits;
    t.misses = 0;
    TrackObservation obs;
    obs.frame = frame;
    obs.cluster = sc.cluster;
    obs.dyn_score = sc.dyn_score;
    obs.static_confidence = sc.static_confidence;
    obs.position_cov_trace = t.covariance.topLeftCorner<2, 2>().trace();
    t.history.push_back(std::move(obs));
    if (t.status == TrackStatus::kTentative && t.hits >= cfg.confirm_hits) {
      t.status = TrackStatus::kConfirmed;
      result.confirmed.push_back(t.id);
    }
  }

  for (const int ti : assoc.unmatched_tracks) {
    ++ts.tracks[ti].misses;
  }

  for (Track& t : ts.tracks) {
    const bool missed_out = t.misses >= cfg.max_misses;
    const bool failed_confirmation = t.status == TrackStatus::kTentative &&
                                     t.age(frame) >= cfg.confirm_window &&
                                     t.hits < cfg.confirm_hits;
    if (missed_out || failed_confirmation) {
      t.status = TrackStatus::kDead;
      result.dead.push_back(t);
    }
  }
  std::erase_if(ts.tracks, [](const Track& t) { return !t.alive(); });

  for (const int cj : assoc.unmatched_clusters) {
    const ScoredCluster& sc = clusters[cj];
    if (!sc.may_spawn) {
      continue;
    }
    Track t;
    t.id = ts.next_id++;
    t.state.head<2>() = sc.cluster.centroid;
    t.covariance = Eigen::Vector4d(cfg.initial_position_var, cfg.initial_position_var,
                                   cfg.initial_velocity_var, cfg.initial_velocity_var)
                       .asDiagonal();
    t.hits = 1;
    t.spawn_frame = frame;
    t.last_expert_frame = frame;
    TrackObservation obs;
    obs.frame = frame;
    obs.cluster = sc.cluster;
    obs.dyn_score = sc.dyn_score;
    obs.static_confidence = sc.static_confidence;
    obs.position_cov_trace = t.covariance.topLeftCorner<2, 2>().trace();
    t.history.push_back(std::move(obs));
    result.spawned.push_back(t.id);
    ts.tracks.push_back(std::move(t));
  }

  return result;
}

TrackStats track_summary(const Track& t, double dt) {
  if (t.history.size() < 2) {
    throw InsufficientDataError(
        fmt::format("track {} has {} observations, need at least 2", t.id, t.history.size()));
  }
  if (!(dt > 0.0)) {
    throw InvalidArgumentError("dt must be positive");
  }
  TrackStats s;
  s.duration = dt * static_cast<double>(t.history.back().frame - t.history.front().frame);
  const Eigen::Vector2d first = t.history.front().cluster.centroid;
  const Eigen::Vector2d last = t.history.back().cluster.centroid;
  s.displacement = (last - first).norm();
  for (std::size_t k = 1; k < t.history.size(); ++k) {
    s.path_length +=
        (t.history[k].cluster.centroid - t.history[k - 1].cluster.centroid).norm();
  }
  s.avg_speed = s.duration > 0.0 ? s.path_length / s.duration : 0.0;
  for (const auto& obs : t.history) {
    s.max_cov_trace = std::max(s.max_cov_trace, obs.position_cov_trace);
  }
  return s;
}

}  // namespace tracklearn
