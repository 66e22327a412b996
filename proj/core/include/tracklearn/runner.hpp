#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tracklearn/config.hpp"
#include "tracklearn/io.hpp"
#include "tracklearn/metrics.hpp"

namespace tracklearn {

struct RunSummary {
  std::string mode;
  std::uint64_t master_seed = 0;
  int frames = 0;
  int samples_consumed = 0;
  std::int64_t model_updates = 0;
  double final_eval_accuracy = 0.0;
  double static_eval_accuracy = 0.0;
  bool has_hindsight = false;
  double hindsight_eval_accuracy = 0.0;
  double hindsight_training_loss = 0.0;
  bool hindsight_converged = false;
  double regret_total = 0.0;
  double final_stability_rate = 0.0;
  double final_cum_online_loss = 0.0;
  std::optional<int> converged_frame;  // first frame with the flag set
  bool converged_final = false;        // flag state on the last record
  bool failed = false;
  std::string error;
};

struct RunArtifacts {
  std::filesystem::path output_dir;
  std::filesystem::path metrics_csv;
  std::filesystem::path events_jsonl;
  std::filesystem::path summary_json;
  std::filesystem::path config_json;
  std::vector<std::filesystem::path> snapshots;  // chronological; final last
  RunSummary summary;
};

/// Executes the configured pipeline over the full horizon, writing
/// metrics.csv, events.jsonl, snapshots, summary.json and the resolved
/// config under the output directory. On a mid-run failure the partial
/// artifacts are retained, summary.json is flagged, and the error rethrown.
RunArtifacts run_experiment(const RunConfig& cfg);

struct SnapshotReport {
  ModelSnapshot snapshot;
  int correct = 0;
  int eval_size = 0;
  double accuracy = 0.0;
};

/// Evaluates a stored model snapshot on the config's evaluation set.
/// Throws VersionError / ShapeError per the snapshot contract.
SnapshotReport evaluate_snapshot(const std::filesystem::path& snapshot_path,
                                 const RunConfig& cfg);

struct BenchReport {
  int feature_dim = 0;
  double per_frame_us = 0.0;
  int frames_timed = 0;
  double per_prediction_ns = 0.0;      // at feature_dim
  double per_prediction_ns_4f = 0.0;   // at 4 * feature_dim
  double prediction_scaling_ratio = 0.0;
  double per_update_ns = 0.0;
};

/// Times frame stepping, single predictions at f and 4f, and updates.
BenchReport bench(const RunConfig& cfg);

struct ReplayCheck {
  bool bit_exact = false;
  int samples_replayed = 0;
  std::int64_t updates_expected = 0;
  double max_weight_delta = 0.0;
};

/// Replays a recorded sample log through a fresh model and compares the
/// final parameters bit-for-bit against a snapshot.
ReplayCheck replay_samples(const std::filesystem::path& events_path,
                           const std::filesystem::path& snapshot_path);

std::string summary_to_json(const RunSummary& s);

}  // namespace tracklearn
