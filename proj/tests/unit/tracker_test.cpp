#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "oracles.hpp"
#include "tracklearn/assignment.hpp"
#include "tracklearn/errors.hpp"
#include "tracklearn/kalman.hpp"
#include "tracklearn/tracker.hpp"

using namespace tracklearn;

namespace {

Track make_track(int id, double x, double y, double vx = 0.0, double vy = 0.0) {
  Track t;
  t.id = id;
  t.state << x, y, vx, vy;
  t.covariance = Eigen::Vector4d(0.25, 0.25, 1.0, 1.0).asDiagonal();
  t.hits = 1;
  return t;
}

FeatureCluster cluster_at(double x, double y, int frame = 0) {
  FeatureCluster c;
  c.centroid << x, y;
  c.features = Eigen::VectorXd::Zero(2);
  c.frame = frame;
  return c;
}

TrackObservation observation_at(int frame, double x, double y, double cov_trace = 0.1) {
  TrackObservation obs;
  obs.frame = frame;
  obs.cluster = cluster_at(x, y, frame);
  obs.position_cov_trace = cov_trace;
  return obs;
}

}  // namespace

TEST_CASE("constant-velocity predict advances the position") {
  Track t = make_track(1, 0.0, 0.0, 1.0, 0.0);
  t = kalman_predict(t, 1.0, TrackerConfig{});
  CHECK(t.state[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.state[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("zero process noise and zero velocity uncertainty keep the covariance") {
  TrackerConfig cfg;
  cfg.process_noise_density = 0.0;
  Track t = make_track(1, 2.0, 3.0);
  t.covariance = Eigen::Vector4d(0.4, 0.4, 0.0, 0.0).asDiagonal();
  const Eigen::Matrix4d before = t.covariance;
  t = kalman_predict(t, 0.5, cfg);
  CHECK((t.covariance - before).norm() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("one-dimensional static predict accumulates process noise") {
  Eigen::Matrix<double, 1, 1> x, p, f, q;
  x << 0.0;
  p << 1.0;
  f << 1.0;
  q << 0.1;
  kalman::predict<1>(x, p, f, q);
  CHECK(p(0, 0) == doctest::Approx(1.1).epsilon(1e-12));
}

TEST_CASE("predict rejects non-positive dt and dead tracks") {
  Track t = make_track(1, 0.0, 0.0);
  CHECK_THROWS_AS(kalman_predict(t, 0.0, TrackerConfig{}), InvalidArgumentError);
  CHECK_THROWS_AS(kalman_predict(t, -0.1, TrackerConfig{}), InvalidArgumentError);
  t.status = TrackStatus::kDead;
  CHECK_THROWS_AS(kalman_predict(t, 0.1, TrackerConfig{}), InvalidArgumentError);
  CHECK_THROWS_AS(kalman_update(t, Eigen::Vector2d(0, 0), Eigen::Matrix2d::Identity()),
                  InvalidArgumentError);
}

TEST_CASE("one-dimensional update hand case") {
  Eigen::Matrix<double, 1, 1> x, p, z, h, r;
  x << 0.0;
  p << 1.0;
  z << 1.0;
  h << 1.0;
  r << 1.0;
  kalman::update<1, 1>(x, p, z, h, r);
  CHECK(x(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("an uninformative measurement leaves the state unchanged") {
  Track t = make_track(1, 1.0, -2.0, 0.3, 0.4);
  const Eigen::Vector4d before = t.state;
  t = kalman_update(t, Eigen::Vector2d(50.0, 50.0), Eigen::Matrix2d::Identity() * 1e12);
  CHECK((t.state - before).norm() < 1e-6);
}

TEST_CASE("zero innovation keeps the position and shrinks the covariance") {
  Track t = make_track(1, 1.0, 2.0);
  const double trace_before = t.covariance.topLeftCorner<2, 2>().trace();
  t = kalman_update(t, Eigen::Vector2d(1.0, 2.0), Eigen::Matrix2d::Identity() * 0.01);
  CHECK(t.state[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.state[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(t.covariance.topLeftCorner<2, 2>().trace() < trace_before);
}

TEST_CASE("singular innovation covariance is a numerical failure") {
  Track t = make_track(1, 0.0, 0.0);
  t.covariance.setZero();
  CHECK_THROWS_AS(kalman_update(t, Eigen::Vector2d(1.0, 1.0), Eigen::Matrix2d::Zero()),
                  NumericalError);
}

TEST_CASE("association resolves the two-track example") {
  const std::vector<Track> tracks = {make_track(1, 0.0, 0.0), make_track(2, 10.0, 0.0)};
  const std::vector<Eigen::Vector2d> meas = {{0.1, 0.0}, {9.8, 0.0}};
  const TrackerConfig cfg;
  const Association assoc = associate(tracks, meas, cfg);
  REQUIRE(assoc.matches.size() == 2);
  CHECK(assoc.matches[0] == std::pair<int, int>{0, 0});
  CHECK(assoc.matches[1] == std::pair<int, int>{1, 1});

  Eigen::MatrixXd cost(2, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double d2 = track_mahalanobis2(tracks[i], meas[j], cfg);
      cost(i, j) = d2 <= cfg.gate ? d2 : kForbiddenCost;
    }
  }
  const auto oracle = test::brute_force_matching(cost, kForbiddenCost);
  CHECK(assoc.total_cost == doctest::Approx(oracle.cost).epsilon(1e-12));
}

TEST_CASE("a track with no clusters stays unmatched") {
  const std::vector<Track> tracks = {make_track(1, 0.0, 0.0)};
  const Association assoc = associate(tracks, {}, TrackerConfig{});
  CHECK(assoc.matches.empty());
  CHECK(assoc.unmatched_tracks == std::vector<int>{0});
}

TEST_CASE("clusters beyond the gate are never assigned") {
  const std::vector<Track> tracks = {make_track(1, 0.0, 0.0)};
  const std::vector<Eigen::Vector2d> meas = {{100.0, 100.0}};
  const Association assoc = associate(tracks, meas, TrackerConfig{});
  CHECK(assoc.matches.empty());
  CHECK(assoc.unmatched_tracks == std::vector<int>{0});
  CHECK(assoc.unmatched_clusters == std::vector<int>{0});
}

TEST_CASE("association matches the brute-force optimum on random instances") {
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> pos(-4.0, 4.0);
  std::uniform_real_distribution<double> var(0.05, 1.5);
  const TrackerConfig cfg;
  for (int instance = 0; instance < 300; ++instance) {
    const int nt = static_cast<int>(gen() % 7);
    const int nc = static_cast<int>(gen() % 7);
    std::vector<Track> tracks;
    for (int i = 0; i < nt; ++i) {
      Track t = make_track(i + 1, pos(gen), pos(gen));
      t.covariance = Eigen::Vector4d(var(gen), var(gen), 1.0, 1.0).asDiagonal();
      tracks.push_back(t);
    }
    std::vector<Eigen::Vector2d> meas;
    for (int j = 0; j < nc; ++j) {
      meas.emplace_back(pos(gen), pos(gen));
    }
    const Association assoc = associate(tracks, meas, cfg);

    Eigen::MatrixXd cost(nt, nc);
    for (int i = 0; i < nt; ++i) {
      for (int j = 0; j < nc; ++j) {
        const double d2 = track_mahalanobis2(tracks[i], meas[j], cfg);
        cost(i, j) = d2 <= cfg.gate ? d2 : kForbiddenCost;
      }
    }
    const auto oracle = test::brute_force_matching(cost, kForbiddenCost);
    CHECK(static_cast<int>(assoc.matches.size()) == oracle.cardinality);
    CHECK(assoc.total_cost == doctest::Approx(oracle.cost).epsilon(1e-9));
    for (const auto& [i, j] : assoc.matches) {
      CHECK(cost(i, j) < kForbiddenCost);
    }
  }
}

TEST_CASE("lifecycle spawns tentative tracks from new clusters") {
  TrackSet ts;
  const std::vector<ScoredCluster> clusters = {{cluster_at(1.0, 1.0), 0.5, std::nullopt}};
  const Association assoc = associate(ts.tracks, std::vector<Eigen::Vector2d>{{1.0, 1.0}},
                                      TrackerConfig{});
  const LifecycleResult r = lifecycle(ts, assoc, clusters, 0, TrackerConfig{});
  REQUIRE(ts.tracks.size() == 1);
  CHECK(ts.tracks[0].status == TrackStatus::kTentative);
  CHECK(ts.tracks[0].hits == 1);
  CHECK(r.spawned == std::vector<int>{1});
}

namespace {

// Runs the predict/associate/lifecycle loop over scripted frames; each frame
// is a list of cluster positions.
struct MiniTracker {
  TrackerConfig cfg;
  TrackSet ts;
  int frame = 0;
  std::vector<LifecycleResult> results;

  void step(const std::vector<Eigen::Vector2d>& positions) {
    for (Track& t : ts.tracks) {
      t = kalman_predict(std::move(t), 0.1, cfg);
    }
    std::vector<ScoredCluster> clusters;
    for (const auto& p : positions) {
      clusters.push_back({cluster_at(p.x(), p.y(), frame), 0.5, std::nullopt});
    }
    const Association assoc = associate(ts.tracks, positions, cfg);
    results.push_back(lifecycle(ts, assoc, clusters, frame, cfg));
    ++frame;
  }
};

}  // namespace

TEST_CASE("three hits in four frames confirm a tentative track") {
  MiniTracker mt;
  mt.step({{0.0, 0.0}});
  mt.step({{0.0, 0.0}});
  CHECK(mt.ts.tracks[0].status == TrackStatus::kTentative);
  mt.step({{0.0, 0.0}});
  REQUIRE(mt.ts.tracks.size() == 1);
  CHECK(mt.ts.tracks[0].status == TrackStatus::kConfirmed);
  CHECK(mt.results.back().confirmed == std::vector<int>{1});
}

TEST_CASE("a tentative track that misses its window dies") {
  MiniTracker mt;
  mt.step({{0.0, 0.0}});
  mt.step({});
  mt.step({});
  mt.step({});  // age reaches confirm_window with hits < confirm_hits
  CHECK(mt.ts.tracks.empty());
  CHECK(mt.results.back().dead.size() == 1);
}

TEST_CASE("max_misses consecutive misses kill a confirmed track") {
  MiniTracker mt;
  for (int i = 0; i < 4; ++i) mt.step({{0.0, 0.0}});
  REQUIRE(mt.ts.tracks.size() == 1);
  REQUIRE(mt.ts.tracks[0].status == TrackStatus::kConfirmed);
  for (int i = 0; i < 4; ++i) {
    mt.step({});
    CHECK(!mt.ts.tracks.empty());
  }
  mt.step({});  // fifth consecutive miss
  CHECK(mt.ts.tracks.empty());
  REQUIRE(mt.results.back().dead.size() == 1);
  CHECK(mt.results.back().dead[0].status == TrackStatus::kDead);
}

TEST_CASE("track ids are never reused") {
  MiniTracker mt;
  std::vector<int> seen;
  for (int round = 0; round < 5; ++round) {
    mt.step({{double(round * 10), 0.0}});  // far from any previous track
    for (const int id : mt.results.back().spawned) {
      CHECK(std::find(seen.begin(), seen.end(), id) == seen.end());
      seen.push_back(id);
    }
    for (int i = 0; i < 6; ++i) mt.step({});
    CHECK(mt.ts.tracks.empty());
  }
  CHECK(seen.size() == 5);
}

TEST_CASE("covariance stays symmetric positive definite under random filtering") {
  std::mt19937_64 gen(43);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const TrackerConfig cfg;
  const Eigen::Matrix2d r = cfg.measurement_noise();
  int sequences = 0;
  for (; sequences < 10000; ++sequences) {
    Track t = make_track(1, noise(gen), noise(gen), noise(gen), noise(gen));
    const int steps = 1 + static_cast<int>(gen() % 12);
    for (int s = 0; s < steps; ++s) {
      t = kalman_predict(std::move(t), 0.01 + unit(gen), cfg);
      if (unit(gen) < 0.7) {
        const Eigen::Vector2d z = t.position() + Eigen::Vector2d(noise(gen), noise(gen));
        t = kalman_update(std::move(t), z, r);
      }
      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(t.covariance);
      REQUIRE(eig.eigenvalues().minCoeff() > 0.0);
      REQUIRE((t.covariance - t.covariance.transpose()).norm() == 0.0);
    }
  }
  CHECK(sequences == 10000);
}

TEST_CASE("updates never increase the positional covariance trace") {
  std::mt19937_64 gen(44);
  std::normal_distribution<double> noise(0.0, 2.0);
  std::uniform_real_distribution<double> var(0.01, 2.0);
  for (int trial = 0; trial < 2000; ++trial) {
    Track t = make_track(1, noise(gen), noise(gen));
    t.covariance = Eigen::Vector4d(var(gen), var(gen), var(gen), var(gen)).asDiagonal();
    const double before = t.covariance.topLeftCorner<2, 2>().trace();
    const Eigen::Matrix2d r = Eigen::Matrix2d::Identity() * var(gen);
    t = kalman_update(std::move(t), Eigen::Vector2d(noise(gen), noise(gen)), r);
    CHECK(t.covariance.topLeftCorner<2, 2>().trace() <= before + 1e-12);
  }
}

TEST_CASE("track summary of a straight two-point trajectory") {
  Track t = make_track(1, 0.0, 0.0);
  t.history = {observation_at(0, 0.0, 0.0), observation_at(10, 1.0, 0.0)};
  const TrackStats s = track_summary(t, 0.1);
  CHECK(s.duration == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.displacement == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.path_length == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.avg_speed == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("track summary of a stationary trajectory") {
  Track t = make_track(1, 0.0, 0.0);
  t.history = {observation_at(0, 2.0, 2.0), observation_at(5, 2.0, 2.0),
               observation_at(10, 2.0, 2.0)};
  const TrackStats s = track_summary(t, 0.1);
  CHECK(s.displacement == 0.0);
  CHECK(s.avg_speed == 0.0);
}

TEST_CASE("track summary around a unit square") {
  Track t = make_track(1, 0.0, 0.0);
  t.history = {observation_at(0, 0.0, 0.0), observation_at(10, 1.0, 0.0),
               observation_at(20, 1.0, 1.0), observation_at(30, 0.0, 1.0),
               observation_at(40, 0.0, 0.0)};
  const TrackStats s = track_summary(t, 0.1);
  CHECK(s.displacement == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.path_length == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(s.duration == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("track summary needs at least two observations") {
  Track t = make_track(1, 0.0, 0.0);
  t.history = {observation_at(0, 0.0, 0.0)};
  CHECK_THROWS_AS(track_summary(t, 0.1), InsufficientDataError);
}

TEST_CASE("summary reports the worst covariance in history") {
  Track t = make_track(1, 0.0, 0.0);
  t.history = {observation_at(0, 0.0, 0.0, 0.3), observation_at(1, 0.1, 0.0, 1.7),
               observation_at(2, 0.2, 0.0, 0.5)};
  CHECK(track_summary(t, 0.1).max_cov_trace == doctest::Approx(1.7));
}
