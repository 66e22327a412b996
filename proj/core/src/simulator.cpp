#include "tracklearn/simulator.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "tracklearn/errors.hpp"

namespace tracklearn {

namespace {

constexpr double kMinWaypointLeg = 3.0;  // meters
constexpr int kClutterRedirectFrames = 100;

Eigen::VectorXd draw_normals(RngStream& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    v[i] = rng.normal();
  }
  return v;
}

}  // namespace

std::vector<std::string> WorldConfig::validate() const {
  std::vector<std::string> v;
  if (n_humans < 0) v.push_back("world.n_humans must be >= 0");
  if (n_clutter < 0) v.push_back("world.n_clutter must be >= 0");
  if (!(arena_width > 0.0) || !(arena_height > 0.0)) {
    v.push_back("world.arena dimensions must be positive");
  }
  if (!(human_speed_min >= 0.0 && human_speed_max >= human_speed_min)) {
    v.push_back("world.human_speed range must satisfy 0 <= min <= max");
  }
  if (!(clutter_speed_min >= 0.0 && clutter_speed_max >= clutter_speed_min)) {
    v.push_back("world.clutter_speed range must satisfy 0 <= min <= max");
  }
  if (!(agent_lifetime_min > 0.0 && agent_lifetime_max >= agent_lifetime_min)) {
    v.push_back("world.agent_lifetime range must satisfy 0 < min <= max");
  }
  if (feature_dim < 2) {
    v.push_back(fmt::format("world.feature_dim must be >= 2, got {}", feature_dim));
  }
  if (!(class_feature_separation >= 0.0)) {
    v.push_back("world.class_feature_separation must be >= 0");
  }
  if (!(feature_noise >= 0.0)) v.push_back("world.feature_noise must be >= 0");
  if (!(centroid_noise >= 0.0)) v.push_back("world.centroid_noise must be >= 0");
  if (!(miss_rate >= 0.0 && miss_rate <= 1.0)) {
    v.push_back(fmt::format("world.miss_rate must be in [0, 1], got {}", miss_rate));
  }
  if (!(false_positive_rate >= 0.0 && false_positive_rate <= 1.0)) {
    v.push_back(fmt::format("world.false_positive_rate must be in [0, 1], got {}",
                            false_positive_rate));
  }
  if (frames < 1) v.push_back(fmt::format("world.frames must be >= 1, got {}", frames));
  if (!(dt > 0.0)) v.push_back(fmt::format("world.dt must be > 0, got {}", dt));
  return v;
}

ClassMeans class_feature_means(const WorldConfig& cfg) {
  if (cfg.feature_dim < 1) {
    throw InvalidArgumentError("feature_dim must be >= 1");
  }
  RngStream rng(derive_seed(cfg.seed, "class-means"));
  Eigen::VectorXd direction;
  double norm = 0.0;
  do {
    direction = draw_normals(rng, cfg.feature_dim);
    norm = direction.norm();
  } while (norm < 1e-12);
  direction /= norm;
  ClassMeans m;
  m.human = 0.5 * cfg.class_feature_separation * direction;
  m.clutter = -m.human;
  return m;
}

namespace {

WorldConfig validated(WorldConfig cfg) {
  if (auto violations = cfg.validate(); !violations.empty()) {
    throw ValidationError(std::move(violations));
  }
  return cfg;
}

}  // namespace

World::World(const WorldConfig& cfg)
    : cfg_(validated(cfg)),
      means_(class_feature_means(cfg_)),
      rng_(derive_seed(cfg_.seed, "world")) {
  min_leg_ = std::min(kMinWaypointLeg,
                      0.25 * std::hypot(cfg_.arena_width, cfg_.arena_height));
  agents_.resize(cfg_.n_humans + cfg_.n_clutter);
  for (int i = 0; i < cfg_.n_humans; ++i) {
    spawn(agents_[i], TruthLabel::kHuman);
  }
  for (int i = 0; i < cfg_.n_clutter; ++i) {
    spawn(agents_[cfg_.n_humans + i], TruthLabel::kClutter);
  }
}

Eigen::Vector2d World::random_point() {
  return {rng_.uniform(0.0, cfg_.arena_width), rng_.uniform(0.0, cfg_.arena_height)};
}

void World::spawn(Agent& a, TruthLabel truth) {
  a.id = next_agent_id_++;
  a.truth = truth;
  a.position = random_point();
  a.lifetime = rng_.uniform(cfg_.agent_lifetime_min, cfg_.agent_lifetime_max);
  a.age = 0.0;
  if (truth == TruthLabel::kHuman) {
    a.speed = rng_.uniform(cfg_.human_speed_min, cfg_.human_speed_max);
    do {
      a.waypoint = random_point();
    } while ((a.waypoint - a.position).norm() < min_leg_);
    const Eigen::Vector2d dir = (a.waypoint - a.position).normalized();
    a.velocity = a.speed * dir;
  } else {
    a.speed = rng_.uniform(cfg_.clutter_speed_min, cfg_.clutter_speed_max);
    const double angle = rng_.uniform(0.0, 2.0 * 3.141592653589793238462643383279502884);
    a.velocity = a.speed * Eigen::Vector2d(std::cos(angle), std::sin(angle));
  }
}

void World::advance(Agent& a) {
  a.age += cfg_.dt;
  if (a.age >= a.lifetime) {
    spawn(a, a.truth);
    return;
  }
  if (a.truth == TruthLabel::kHuman) {
    // Walk toward the waypoint; leftover motion carries into the next leg so
    // per-frame travel is exactly speed * dt.
    double remaining = a.speed * cfg_.dt;
    while (remaining > 0.0) {
      const Eigen::Vector2d to_wp = a.waypoint - a.position;
      const double dist = to_wp.norm();
      if (dist > remaining) {
        a.position += (remaining / dist) * to_wp;
        a.velocity = a.speed * (to_wp / dist);
        break;
      }
      a.position = a.waypoint;
      remaining -= dist;
      do {
        a.waypoint = random_point();
      } while ((a.waypoint - a.position).norm() < min_leg_);
    }
  } else {
    if (frame_ % kClutterRedirectFrames == 0) {
      const double angle =
          rng_.uniform(0.0, 2.0 * 3.141592653589793238462643383279502884);
      a.velocity = a.speed * Eigen::Vector2d(std::cos(angle), std::sin(angle));
    }
    a.position += a.velocity * cfg_.dt;
    // Reflect drift at the arena boundary.
    for (int k = 0; k < 2; ++k) {
      const double hi = k == 0 ? cfg_.arena_width : cfg_.arena_height;
      if (a.position[k] < 0.0) {
        a.position[k] = -a.position[k];
        a.velocity[k] = -a.velocity[k];
      } else if (a.position[k] > hi) {
        a.position[k] = 2.0 * hi - a.position[k];
        a.velocity[k] = -a.velocity[k];
      }
    }
  }
}

Eigen::VectorXd World::noisy_features(TruthLabel truth) {
  const Eigen::VectorXd& mean =
      truth == TruthLabel::kHuman ? means_.human : means_.clutter;
  return mean + cfg_.feature_noise * draw_normals(rng_, cfg_.feature_dim);
}

std::vector<FeatureCluster> World::tick() {
  if (done()) {
    throw EndOfStreamError(fmt::format("world horizon of {} frames reached", cfg_.frames));
  }
  for (Agent& a : agents_) {
    advance(a);
  }
  std::vector<FeatureCluster> clusters;
  clusters.reserve(agents_.size() + 1);
  for (Agent& a : agents_) {
    if (rng_.bernoulli(cfg_.miss_rate)) {
      continue;
    }
    FeatureCluster c;
    c.centroid = a.position + cfg_.centroid_noise * Eigen::Vector2d(rng_.normal(), rng_.normal());
    c.features = noisy_features(a.truth);
    c.truth = a.truth;
    c.agent_id = a.id;
    c.frame = frame_;
    clusters.push_back(std::move(c));
  }
  if (rng_.bernoulli(cfg_.false_positive_rate)) {
    FeatureCluster c;
    c.centroid = random_point();
    c.features = noisy_features(TruthLabel::kClutter);
    c.truth = TruthLabel::kClutter;
    c.frame = frame_;
    clusters.push_back(std::move(c));
  }
  ++frame_;
  return clusters;
}

std::vector<World::AgentView> World::agents() const {
  std::vector<AgentView> out;
  out.reserve(agents_.size());
  for (const Agent& a : agents_) {
    out.push_back({a.id, a.truth, a.position, a.velocity});
  }
  return out;
}

namespace {

std::vector<LabeledSample> draw_labeled(const WorldConfig& cfg, RngStream& rng,
                                        const ClassMeans& means, int n_human,
                                        int n_clutter, Provenance provenance,
                                        bool interleave) {
  std::vector<LabeledSample> out;
  out.reserve(n_human + n_clutter);
  int remaining_h = n_human;
  int remaining_c = n_clutter;
  while (remaining_h + remaining_c > 0) {
    const bool human = interleave
                           ? (remaining_h > 0 && (remaining_c == 0 || remaining_h >= remaining_c))
                           : remaining_h > 0;
    LabeledSample s;
    const Eigen::VectorXd& mean = human ? means.human : means.clutter;
    s.x = mean + cfg.feature_noise * draw_normals(rng, cfg.feature_dim);
    s.y = human ? 1 : 0;
    s.weight = 1.0;
    s.provenance = provenance;
    s.frame = -1;
    out.push_back(std::move(s));
    (human ? remaining_h : remaining_c)--;
  }
  return out;
}

}  // namespace

std::vector<LabeledSample> eval_set(const WorldConfig& cfg, int n) {
  if (n < 2) {
    throw InvalidArgumentError(fmt::format("evaluation set size must be >= 2, got {}", n));
  }
  if (n % 2 != 0) {
    throw InvalidArgumentError(
        fmt::format("evaluation set size must be even for a balanced set, got {}", n));
  }
  if (auto violations = cfg.validate(); !violations.empty()) {
    throw ValidationError(std::move(violations));
  }
  RngStream rng(derive_seed(cfg.seed, "eval"));
  const ClassMeans means = class_feature_means(cfg);
  return draw_labeled(cfg, rng, means, n / 2, n / 2, Provenance::kEval,
                      /*interleave=*/true);
}

std::vector<LabeledSample> seed_samples(const WorldConfig& cfg, int n_positive,
                                        int n_negative) {
  if (n_positive < 0 || n_negative < 0) {
    throw InvalidArgumentError("seed sample counts must be >= 0");
  }
  RngStream rng(derive_seed(cfg.seed, "seed-samples"));
  const ClassMeans means = class_feature_means(cfg);
  return draw_labeled(cfg, rng, means, n_positive, n_negative, Provenance::kSeed,
                      /*interleave=*/false);
}

}  // namespace tracklearn
