#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "tracklearn/metrics.hpp"
#include "tracklearn/types.hpp"

namespace tracklearn {

/// Versioned on-disk model record. Doubles are serialized with
/// shortest-round-trip formatting, so read(write(m)) is bit-exact.
struct ModelSnapshot {
  int version = 1;
  int feature_dim = 0;
  Eigen::VectorXd weights;
  double bias = 0.0;
  std::int64_t updates = 0;
  double lr0 = 0.5;
  std::uint64_t seed = 0;  // the run's master seed
};

void write_snapshot(const std::filesystem::path& path, const ModelSnapshot& snap);

/// Throws VersionError on an unsupported version, Error on a missing or
/// malformed file.
ModelSnapshot read_snapshot(const std::filesystem::path& path);

/// Line-oriented JSON writer for event logs and stream dumps.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path);
  void write_line(const std::string& serialized_json);
  void flush();

 private:
  std::ofstream out_;
};

/// Event-log record helpers (serialized JSON, one line each).
std::string run_config_event(const std::string& config_json, std::uint64_t master_seed);
std::string frame_event(int frame, std::span<const double> predictions,
                        std::span<const double> static_outputs,
                        std::span<const int> spawned, std::span<const int> confirmed,
                        std::span<const int> dead, int samples_applied);
std::string sample_event(int seq, const LabeledSample& s);
std::string eval_event(const EvalRecord& r);

/// Recovers the consumed sample stream, in order, from an events file.
std::vector<LabeledSample> samples_from_events(const std::filesystem::path& events_path);

/// Cluster-stream dump (one frame per line, ground truth included) and its
/// replay reader.
std::string stream_frame_line(int frame, std::span<const FeatureCluster> clusters);
std::vector<std::vector<FeatureCluster>> read_stream(const std::filesystem::path& path);

/// metrics.csv with the exact column contract:
/// step,u,eval_accuracy,stability_rate,cum_online_loss,dyn_eval_accuracy,static_eval_accuracy,converged_flag
void write_metrics_csv(const std::filesystem::path& path, const MetricsLog& log,
                       double static_eval_accuracy, std::span<const bool> converged_flags);

inline constexpr const char* kMetricsCsvHeader =
    "step,u,eval_accuracy,stability_rate,cum_online_loss,dyn_eval_accuracy,"
    "static_eval_accuracy,converged_flag";

}  // namespace tracklearn
