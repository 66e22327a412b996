#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tracklearn/detectors.hpp"
#include "tracklearn/experts.hpp"
#include "tracklearn/pipeline.hpp"
#include "tracklearn/simulator.hpp"
#include "tracklearn/tracker.hpp"

namespace tracklearn {

struct MetricsConfig {
  int eval_set_size = 500;
  int eval_cadence = 50;  // frames between evaluations
  int window = 40;        // evaluations in the convergence window
  double tau = 0.02;      // stability-rate tolerance
  double delta = 0.02;    // accuracy band below the baseline

  std::vector<std::string> validate() const;
};

/// Full experiment description. The master seed lives in world.seed; every
/// other stream (static detector, evaluation, seeds) is derived from it by
/// fixed labels.
struct RunConfig {
  Mode mode = Mode::kFrameworkB;
  WorldConfig world;
  TrackerConfig tracker;
  ExpertConfig experts;
  StaticDetectorConfig static_detector;
  LearnerConfig learner;
  MetricsConfig metrics;
  std::string output_dir;    // empty = resolve from environment/default
  int snapshot_every = 1000; // frames; 0 disables periodic snapshots
  std::string dump_stream;   // optional filename (relative, inside output_dir)
  std::string replay_stream; // optional recorded stream to consume instead of simulating

  std::uint64_t master_seed() const { return world.seed; }

  /// Collects violations across every section; empty means valid.
  std::vector<std::string> validate() const;
};

/// Parses a JSON config file over the defaults. Unknown keys are
/// validation errors. Throws ValidationError with per-field messages.
RunConfig load_config(const std::filesystem::path& path);

/// Parses a JSON string (same rules as load_config).
RunConfig parse_config(const std::string& text);

/// Serializes the fully resolved config (for embedding into artifacts).
std::string config_to_json(const RunConfig& cfg);

/// Command-line values that take precedence over file values.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> output_dir;
  std::optional<int> frames;
};

void apply_overrides(RunConfig& cfg, const ConfigOverrides& ov);

/// Final output directory: override > config > $TRACKLEARN_OUTPUT_ROOT/run > ./out.
std::filesystem::path resolve_output_dir(const RunConfig& cfg);

}  // namespace tracklearn
