#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tracklearn/rng.hpp"
#include "tracklearn/types.hpp"

namespace tracklearn {

/// Deterministic synthetic world emitting one cluster stream per config.
/// All randomness is derived from `seed` through fixed labeled substreams
/// (world, eval, seed samples, class means), so adding one consumer never
/// perturbs another.
struct WorldConfig {
  int n_humans = 10;
  int n_clutter = 10;
  double arena_width = 30.0;   // meters
  double arena_height = 30.0;
  double human_speed_min = 0.5;  // m/s, drawn once per agent
  double human_speed_max = 1.8;
  double clutter_speed_min = 0.0;  // slow drift
  double clutter_speed_max = 0.05;
  double agent_lifetime_min = 20.0;  // seconds until an agent respawns
  double agent_lifetime_max = 60.0;
  int feature_dim = 16;
  double class_feature_separation = 5.0;  // distance between class feature means
  double feature_noise = 0.6;             // per-dimension std
  double centroid_noise = 0.01;           // meters
  double miss_rate = 0.05;
  double false_positive_rate = 0.1;  // spurious clutter-featured clusters per frame
  int frames = 20000;
  double dt = 0.1;  // seconds
  std::uint64_t seed = 1;

  std::vector<std::string> validate() const;
};

struct ClassMeans {
  Eigen::VectorXd human;
  Eigen::VectorXd clutter;
};

/// Class feature means: +/- separation/2 along a seeded random unit
/// direction. A function of (seed, feature_dim, separation) only.
ClassMeans class_feature_means(const WorldConfig& cfg);

class World {
 public:
  /// Throws ValidationError listing every violated field.
  explicit World(const WorldConfig& cfg);

  bool done() const { return frame_ >= cfg_.frames; }
  int frame() const { return frame_; }
  const WorldConfig& config() const { return cfg_; }

  /// Advances agents by dt and emits this frame's clusters. Throws
  /// EndOfStreamError past the configured horizon.
  std::vector<FeatureCluster> tick();

  struct AgentView {
    int id;
    TruthLabel truth;
    Eigen::Vector2d position;
    Eigen::Vector2d velocity;
  };
  std::vector<AgentView> agents() const;

  const ClassMeans& means() const { return means_; }

 private:
  struct Agent {
    int id = 0;
    TruthLabel truth = TruthLabel::kClutter;
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
    Eigen::Vector2d waypoint = Eigen::Vector2d::Zero();  // humans only
    double speed = 0.0;
    double lifetime = 0.0;  // seconds
    double age = 0.0;
  };

  void spawn(Agent& a, TruthLabel truth);
  void advance(Agent& a);
  Eigen::Vector2d random_point();
  Eigen::VectorXd noisy_features(TruthLabel truth);

  WorldConfig cfg_;
  ClassMeans means_;
  RngStream rng_;  // the world substream
  std::vector<Agent> agents_;
  double min_leg_ = 3.0;
  int next_agent_id_ = 0;
  int frame_ = 0;
};

/// Balanced labeled set from the class feature distributions, drawn from an
/// evaluation-dedicated substream disjoint from the world stream. n must be
/// even and >= 2.
std::vector<LabeledSample> eval_set(const WorldConfig& cfg, int n);

/// Ground-truth seed samples for supervised initialization (positives
/// first), drawn from their own substream.
std::vector<LabeledSample> seed_samples(const WorldConfig& cfg, int n_positive,
                                        int n_negative);

}  // namespace tracklearn
