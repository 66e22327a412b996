#include "tracklearn/runner.hpp"

#include <chrono>
#include <fstream>
#include <memory>

#include <fmt/core.h>
#include <json.hpp>

#include "tracklearn/errors.hpp"
#include "tracklearn/pipeline.hpp"
#include "tracklearn/simulator.hpp"

namespace tracklearn {

using nlohmann::json;

namespace {

FeatureCluster cluster_from_sample(const LabeledSample& s) {
  FeatureCluster c;
  c.features = s.x;
  c.truth = s.y == 1 ? TruthLabel::kHuman : TruthLabel::kClutter;
  c.frame = s.frame;
  return c;
}

/// Accuracy of a static detector instance over an evaluation set; consumes
/// one draw per sample from the given detector's stream.
double measure_static_accuracy(StaticDetector& det, std::span<const LabeledSample> eval) {
  if (eval.empty()) return 0.0;
  int correct = 0;
  for (const auto& s : eval) {
    const double conf = det.detect(cluster_from_sample(s)).prob;
    const int said = conf > 0.5 ? 1 : 0;
    if (said == s.y) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(eval.size());
}

MetricsLog prefix_log(const MetricsLog& log, std::size_t n) {
  MetricsLog p;
  p.records.assign(log.records.begin(), log.records.begin() + n);
  p.eval_set_size = log.eval_set_size;
  p.baseline_accuracy = log.baseline_accuracy;
  return p;
}

}  // namespace

std::string summary_to_json(const RunSummary& s) {
  json j;
  j["mode"] = s.mode;
  j["master_seed"] = s.master_seed;
  j["frames"] = s.frames;
  j["samples_consumed"] = s.samples_consumed;
  j["model_updates"] = s.model_updates;
  j["final_eval_accuracy"] = s.final_eval_accuracy;
  j["static_eval_accuracy"] = s.static_eval_accuracy;
  if (s.has_hindsight) {
    j["hindsight_eval_accuracy"] = s.hindsight_eval_accuracy;
    j["hindsight_training_loss"] = s.hindsight_training_loss;
    j["hindsight_converged"] = s.hindsight_converged;
    j["regret"] = s.regret_total;
  }
  j["final_stability_rate"] = s.final_stability_rate;
  j["final_cum_online_loss"] = s.final_cum_online_loss;
  if (s.converged_frame) {
    j["converged_frame"] = *s.converged_frame;
  } else {
    j["converged_frame"] = nullptr;
  }
  j["converged_final"] = s.converged_final;
  j["failed"] = s.failed;
  if (s.failed) j["error"] = s.error;
  return j.dump(2);
}

RunArtifacts run_experiment(const RunConfig& cfg) {
  if (auto violations = cfg.validate(); !violations.empty()) {
    throw ValidationError(std::move(violations));
  }

  RunArtifacts art;
  art.output_dir = resolve_output_dir(cfg);
  std::filesystem::create_directories(art.output_dir);
  art.metrics_csv = art.output_dir / "metrics.csv";
  art.events_jsonl = art.output_dir / "events.jsonl";
  art.summary_json = art.output_dir / "summary.json";
  art.config_json = art.output_dir / "config_resolved.json";

  const std::string cfg_json = config_to_json(cfg);
  {
    std::ofstream out(art.config_json);
    out << cfg_json << '\n';
  }

  JsonlWriter events(art.events_jsonl);
  events.write_line(run_config_event(cfg_json, cfg.master_seed()));

  // Replayed stream or live world.
  std::vector<std::vector<FeatureCluster>> replay_frames;
  std::unique_ptr<World> world;
  int horizon = cfg.world.frames;
  if (!cfg.replay_stream.empty()) {
    replay_frames = read_stream(cfg.replay_stream);
    horizon = std::min<int>(horizon, static_cast<int>(replay_frames.size()));
  } else {
    world = std::make_unique<World>(cfg.world);
  }

  std::unique_ptr<JsonlWriter> stream_dump;
  if (!cfg.dump_stream.empty()) {
    stream_dump = std::make_unique<JsonlWriter>(art.output_dir / cfg.dump_stream);
  }

  const std::vector<LabeledSample> eval = eval_set(cfg.world, cfg.metrics.eval_set_size);

  // A dedicated instance measures the teacher's accuracy so the pipeline's
  // own detector stream is not perturbed.
  StaticDetectorConfig eval_det_cfg = cfg.static_detector;
  eval_det_cfg.seed = derive_seed(cfg.master_seed(), "static-eval");
  StaticDetector eval_detector(eval_det_cfg);
  const double static_eval_accuracy = measure_static_accuracy(eval_detector, eval);

  StaticDetectorConfig det_cfg = cfg.static_detector;
  det_cfg.seed = derive_seed(cfg.master_seed(), "static-detector");
  auto detector = std::make_shared<StaticDetector>(det_cfg);
  StaticScorer scorer;
  if (cfg.mode == Mode::kFrameworkB) {
    scorer = [detector](const FeatureCluster& c) { return detector->detect(c).prob; };
  }

  Pipeline pipeline(cfg.mode, cfg.world.feature_dim, cfg.learner, cfg.tracker,
                    cfg.experts, scorer);
  int sample_seq = 0;
  if (cfg.mode == Mode::kFrameworkA) {
    pipeline.seed_supervision(
        seed_samples(cfg.world, cfg.learner.seed_positive, cfg.learner.seed_negative));
    // Seeds are consumed before the first frame; they belong to the log the
    // replay path reads back.
    for (const LabeledSample& s : pipeline.sample_log()) {
      events.write_line(sample_event(sample_seq++, s));
    }
  }

  MetricsLog log;
  log.eval_set_size = cfg.metrics.eval_set_size;

  RunSummary& summary = art.summary;
  summary.mode = to_string(cfg.mode);
  summary.master_seed = cfg.master_seed();
  summary.static_eval_accuracy = static_eval_accuracy;

  double cum_loss = 0.0;
  std::size_t losses_seen = 0;

  auto snapshot_of = [&](const DynamicModel& m) {
    ModelSnapshot snap;
    snap.feature_dim = cfg.world.feature_dim;
    snap.weights = m.weights;
    snap.bias = m.bias;
    snap.updates = m.updates;
    snap.lr0 = m.lr0;
    snap.seed = cfg.master_seed();
    return snap;
  };

  bool run_failed = false;
  try {
    for (int t = 0; t < horizon; ++t) {
      std::vector<FeatureCluster> clusters =
          world ? world->tick() : replay_frames[static_cast<std::size_t>(t)];
      if (stream_dump) {
        stream_dump->write_line(stream_frame_line(t, clusters));
      }
      const FrameOutput out = pipeline.step(clusters, cfg.world.dt);
      for (const LabeledSample& s : out.new_samples) {
        events.write_line(sample_event(sample_seq++, s));
      }
      events.write_line(frame_event(t, out.predictions, out.static_outputs,
                                    out.spawned_tracks, out.confirmed_tracks,
                                    out.dead_tracks, static_cast<int>(out.new_samples.size())));

      const auto& losses = pipeline.sample_losses();
      for (; losses_seen < losses.size(); ++losses_seen) {
        cum_loss += losses[losses_seen];
      }

      const int frames_done = t + 1;
      if (frames_done % cfg.metrics.eval_cadence == 0) {
        EvalRecord r;
        r.t = static_cast<int>(log.records.size()) + 1;
        r.frame = frames_done;
        r.u = count_correct(pipeline.model(), eval);
        r.online_loss = cum_loss;
        r.eval_accuracy =
            static_cast<double>(r.u) / static_cast<double>(cfg.metrics.eval_set_size);
        events.write_line(eval_event(r));
        log.records.push_back(r);
      }
      if (cfg.snapshot_every > 0 && frames_done % cfg.snapshot_every == 0) {
        const auto path =
            art.output_dir / fmt::format("snapshot_{:07d}.json", frames_done);
        write_snapshot(path, snapshot_of(pipeline.model()));
        art.snapshots.push_back(path);
      }
      summary.frames = frames_done;
    }
  } catch (const Error& e) {
    run_failed = true;
    summary.failed = true;
    summary.error = e.what();
  }
  events.flush();

  const auto final_path = art.output_dir / "snapshot_final.json";
  write_snapshot(final_path, snapshot_of(pipeline.model()));
  art.snapshots.push_back(final_path);

  summary.samples_consumed = static_cast<int>(pipeline.sample_log().size());
  summary.model_updates = pipeline.model().updates;

  // Post-hoc metrics: hindsight optimum, baseline, regret, convergence flags.
  std::optional<HindsightOptimum> opt;
  if (!pipeline.sample_log().empty()) {
    HindsightOptions opts;
    opts.allow_single_class = true;
    opt = hindsight_optimum(pipeline.sample_log(), cfg.world.feature_dim, opts);
    summary.has_hindsight = true;
    summary.hindsight_training_loss = opt->training_loss;
    summary.hindsight_converged = opt->converged_flag;
    DynamicModel opt_model = make_model(cfg.world.feature_dim, cfg.learner.lr0);
    opt_model.weights = opt->weights;
    opt_model.bias = opt->bias;
    summary.hindsight_eval_accuracy =
        static_cast<double>(count_correct(opt_model, eval)) /
        static_cast<double>(cfg.metrics.eval_set_size);
  }

  log.baseline_accuracy = cfg.mode == Mode::kFrameworkB
                              ? static_eval_accuracy
                              : (summary.has_hindsight ? summary.hindsight_eval_accuracy : 0.5);

  log.sample_losses = pipeline.sample_losses();
  log.sample_param_norms = pipeline.sample_param_norms();
  if (opt) {
    summary.regret_total = regret(log, *opt, pipeline.sample_log());
  }

  std::vector<bool> flags(log.records.size(), false);
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    if (static_cast<int>(i) + 1 < cfg.metrics.window) continue;
    flags[i] = converged(prefix_log(log, i + 1), cfg.metrics.window, cfg.metrics.tau,
                         cfg.metrics.delta);
    if (flags[i] && !summary.converged_frame) {
      summary.converged_frame = log.records[i].frame;
    }
  }
  {
    // std::vector<bool> has no data(); materialize for the span interface.
    std::unique_ptr<bool[]> flat(new bool[flags.size()]);
    for (std::size_t i = 0; i < flags.size(); ++i) flat[i] = flags[i];
    write_metrics_csv(art.metrics_csv, log, static_eval_accuracy,
                      std::span<const bool>(flat.get(), flags.size()));
  }

  if (!log.records.empty()) {
    summary.final_eval_accuracy = log.records.back().eval_accuracy;
    summary.final_cum_online_loss = log.records.back().online_loss;
    summary.final_stability_rate =
        stability_rate(log, static_cast<int>(log.records.size()));
    summary.converged_final = flags.back();
  }

  {
    std::ofstream out(art.summary_json);
    out << summary_to_json(summary) << '\n';
  }

  if (run_failed) {
    throw NumericalError(fmt::format("run failed at frame {}: {} (partial artifacts in {})",
                                     summary.frames, summary.error,
                                     art.output_dir.string()));
  }
  return art;
}

SnapshotReport evaluate_snapshot(const std::filesystem::path& snapshot_path,
                                 const RunConfig& cfg) {
  if (auto violations = cfg.validate(); !violations.empty()) {
    throw ValidationError(std::move(violations));
  }
  SnapshotReport report;
  report.snapshot = read_snapshot(snapshot_path);
  if (report.snapshot.feature_dim != cfg.world.feature_dim) {
    throw ShapeError(fmt::format("snapshot feature_dim {} does not match config feature_dim {}",
                                 report.snapshot.feature_dim, cfg.world.feature_dim));
  }
  const std::vector<LabeledSample> eval = eval_set(cfg.world, cfg.metrics.eval_set_size);
  DynamicModel m = make_model(report.snapshot.feature_dim, report.snapshot.lr0);
  m.weights = report.snapshot.weights;
  m.bias = report.snapshot.bias;
  m.updates = report.snapshot.updates;
  report.correct = count_correct(m, eval);
  report.eval_size = static_cast<int>(eval.size());
  report.accuracy = static_cast<double>(report.correct) / static_cast<double>(eval.size());
  return report;
}

namespace {

double time_predictions_ns(int feature_dim, int calls, std::uint64_t seed, double* sink) {
  RngStream rng(seed);
  DynamicModel m = make_model(feature_dim, 0.5);
  for (Eigen::Index i = 0; i < m.weights.size(); ++i) {
    m.weights[i] = rng.normal() * 0.1;
  }
  constexpr int kPool = 64;
  std::vector<FeatureVector> pool;
  pool.reserve(kPool);
  for (int i = 0; i < kPool; ++i) {
    FeatureVector x(feature_dim);
    for (int k = 0; k < feature_dim; ++k) x[k] = rng.normal();
    pool.push_back(std::move(x));
  }
  double acc = 0.0;
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < calls; ++i) {
    acc += dyn_predict(m, pool[i % kPool]);
  }
  const auto stop = std::chrono::steady_clock::now();
  *sink += acc;
  return std::chrono::duration<double, std::nano>(stop - start).count() / calls;
}

}  // namespace

BenchReport bench(const RunConfig& cfg) {
  if (auto violations = cfg.validate(); !violations.empty()) {
    throw ValidationError(std::move(violations));
  }
  BenchReport report;
  report.feature_dim = cfg.world.feature_dim;

  // Frame stepping on a fresh pipeline (no artifact I/O).
  {
    World world(cfg.world);
    StaticDetectorConfig det_cfg = cfg.static_detector;
    det_cfg.seed = derive_seed(cfg.master_seed(), "static-detector");
    auto detector = std::make_shared<StaticDetector>(det_cfg);
    StaticScorer scorer;
    if (cfg.mode == Mode::kFrameworkB) {
      scorer = [detector](const FeatureCluster& c) { return detector->detect(c).prob; };
    }
    Pipeline pipeline(cfg.mode, cfg.world.feature_dim, cfg.learner, cfg.tracker,
                      cfg.experts, scorer);
    if (cfg.mode == Mode::kFrameworkA) {
      pipeline.seed_supervision(
          seed_samples(cfg.world, cfg.learner.seed_positive, cfg.learner.seed_negative));
    }
    report.frames_timed = std::min(cfg.world.frames, 2000);
    const auto start = std::chrono::steady_clock::now();
    for (int t = 0; t < report.frames_timed; ++t) {
      pipeline.step(world.tick(), cfg.world.dt);
    }
    const auto stop = std::chrono::steady_clock::now();
    report.per_frame_us = std::chrono::duration<double, std::micro>(stop - start).count() /
                          report.frames_timed;
  }

  double sink = 0.0;
  constexpr int kCalls = 1000000;
  report.per_prediction_ns =
      time_predictions_ns(cfg.world.feature_dim, kCalls, 17, &sink);
  report.per_prediction_ns_4f =
      time_predictions_ns(4 * cfg.world.feature_dim, kCalls, 18, &sink);
  report.prediction_scaling_ratio = report.per_prediction_ns_4f / report.per_prediction_ns;

  {
    RngStream rng(19);
    DynamicModel m = make_model(cfg.world.feature_dim, cfg.learner.lr0);
    LabeledSample s;
    s.x = FeatureVector(cfg.world.feature_dim);
    for (int k = 0; k < cfg.world.feature_dim; ++k) s.x[k] = rng.normal();
    s.y = 1;
    constexpr int kUpdates = 100000;
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < kUpdates; ++i) {
      m = dyn_update(m, s);
    }
    const auto stop = std::chrono::steady_clock::now();
    report.per_update_ns =
        std::chrono::duration<double, std::nano>(stop - start).count() / kUpdates;
    sink += m.bias;
  }
  // Keep the accumulator alive so the timed loops cannot be elided.
  if (!std::isfinite(sink)) {
    throw NumericalError("benchmark accumulator overflowed");
  }
  return report;
}

ReplayCheck replay_samples(const std::filesystem::path& events_path,
                           const std::filesystem::path& snapshot_path) {
  const ModelSnapshot snap = read_snapshot(snapshot_path);
  const std::vector<LabeledSample> samples = samples_from_events(events_path);
  DynamicModel m = make_model(snap.feature_dim, snap.lr0);
  for (const LabeledSample& s : samples) {
    m = dyn_update(m, s);
  }
  ReplayCheck check;
  check.samples_replayed = static_cast<int>(samples.size());
  check.updates_expected = snap.updates;
  bool exact = m.updates == snap.updates && m.bias == snap.bias &&
               m.weights.size() == snap.weights.size();
  double max_delta = std::abs(m.bias - snap.bias);
  if (m.weights.size() == snap.weights.size()) {
    for (Eigen::Index i = 0; i < m.weights.size(); ++i) {
      if (m.weights[i] != snap.weights[i]) exact = false;
      max_delta = std::max(max_delta, std::abs(m.weights[i] - snap.weights[i]));
    }
  } else {
    exact = false;
  }
  check.bit_exact = exact;
  check.max_weight_delta = max_delta;
  return check;
}

}  // namespace tracklearn
