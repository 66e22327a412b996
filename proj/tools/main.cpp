#include <atomic>
#include <cstdio>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "tracklearn/config.hpp"
#include "tracklearn/errors.hpp"
#include "tracklearn/runner.hpp"

namespace {

using namespace tracklearn;

struct CommonArgs {
  std::string config_path;
  ConfigOverrides overrides;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file (defaults used when omitted)");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&args](std::uint64_t v) { args.overrides.seed = v; }, "Master seed override");
  cmd->add_option_function<std::string>(
      "--mode", [&args](const std::string& v) { args.overrides.mode = v; },
      "framework_a or framework_b");
  cmd->add_option_function<std::string>(
      "--output-dir", [&args](const std::string& v) { args.overrides.output_dir = v; },
      "Output directory (else config, else $TRACKLEARN_OUTPUT_ROOT)");
  cmd->add_option_function<int>(
      "--frames", [&args](int v) { args.overrides.frames = v; }, "Frame horizon override");
}

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig cfg = args.config_path.empty() ? RunConfig{} : load_config(args.config_path);
  apply_overrides(cfg, args.overrides);
  return cfg;
}

void print_summary(const RunSummary& s, const RunArtifacts& art) {
  fmt::print("run complete: mode={} seed={} frames={} samples={}\n", s.mode, s.master_seed,
             s.frames, s.samples_consumed);
  fmt::print("  dyn eval accuracy    {:.4f}\n", s.final_eval_accuracy);
  fmt::print("  static eval accuracy {:.4f}\n", s.static_eval_accuracy);
  if (s.has_hindsight) {
    fmt::print("  hindsight accuracy   {:.4f}\n", s.hindsight_eval_accuracy);
    fmt::print("  regret               {:.4f}\n", s.regret_total);
  }
  fmt::print("  stability rate       {:.6f}\n", s.final_stability_rate);
  if (s.converged_frame) {
    fmt::print("  converged at frame   {}\n", *s.converged_frame);
  } else {
    fmt::print("  converged            no\n");
  }
  fmt::print("  artifacts            {}\n", art.output_dir.string());
}

// "a..b" inclusive.
bool parse_seed_range(const std::string& text, std::uint64_t& lo, std::uint64_t& hi) {
  const auto pos = text.find("..");
  if (pos == std::string::npos) return false;
  try {
    lo = std::stoull(text.substr(0, pos));
    hi = std::stoull(text.substr(pos + 2));
  } catch (const std::exception&) {
    return false;
  }
  return hi >= lo;
}

int run_sweep(const RunConfig& base, std::uint64_t lo, std::uint64_t hi) {
  const auto root = resolve_output_dir(base);
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  const unsigned workers =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(seeds.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= seeds.size()) return;
        RunConfig cfg = base;
        cfg.world.seed = seeds[i];
        cfg.output_dir = (root / fmt::format("seed_{}", seeds[i])).string();
        try {
          const RunArtifacts art = run_experiment(cfg);
          fmt::print("seed {} done: accuracy {:.4f} -> {}\n", seeds[i],
                     art.summary.final_eval_accuracy, art.output_dir.string());
        } catch (const Error& e) {
          fmt::print(stderr, "seed {} failed: {}\n", seeds[i], e.what());
          failures.fetch_add(1);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  return failures.load() == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tracklearn: online self-supervised detection learning harness"};
  app.require_subcommand(1);

  CommonArgs run_args;
  std::string seeds_range;
  std::string dump_stream;
  auto* run_cmd = app.add_subcommand("run", "Execute an experiment over the full horizon");
  add_common_flags(run_cmd, run_args);
  run_cmd->add_option("--seeds", seeds_range, "Sweep 'a..b': one run per seed, in parallel");
  run_cmd->add_option("--dump-stream", dump_stream,
                      "Dump the cluster stream to this file (inside the output dir)");

  CommonArgs eval_args;
  std::string snapshot_path;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model snapshot on the eval set");
  add_common_flags(eval_cmd, eval_args);
  eval_cmd->add_option("snapshot", snapshot_path, "Snapshot file")->required();

  CommonArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Time frame stepping, predictions and updates");
  add_common_flags(bench_cmd, bench_args);

  CommonArgs replay_args;
  std::string replay_stream, replay_events, replay_snapshot;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run from a recorded stream or sample log");
  add_common_flags(replay_cmd, replay_args);
  replay_cmd->add_option("--stream", replay_stream, "Recorded cluster stream (stream dump)");
  replay_cmd->add_option("--samples", replay_events,
                         "events.jsonl whose sample log to replay through a fresh model");
  replay_cmd->add_option("--snapshot", replay_snapshot,
                         "Snapshot to compare against in --samples mode");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      RunConfig cfg = resolve_config(run_args);
      if (!dump_stream.empty()) cfg.dump_stream = dump_stream;
      if (!seeds_range.empty()) {
        std::uint64_t lo = 0, hi = 0;
        if (!parse_seed_range(seeds_range, lo, hi)) {
          fmt::print(stderr, "invalid --seeds range '{}', expected a..b\n", seeds_range);
          return 1;
        }
        return run_sweep(cfg, lo, hi);
      }
      const RunArtifacts art = run_experiment(cfg);
      print_summary(art.summary, art);
      return 0;
    }
    if (eval_cmd->parsed()) {
      const RunConfig cfg = resolve_config(eval_args);
      const SnapshotReport report = evaluate_snapshot(snapshot_path, cfg);
      fmt::print("snapshot {}: updates={} f={}\n", snapshot_path, report.snapshot.updates,
                 report.snapshot.feature_dim);
      fmt::print("eval accuracy {:.4f} ({}/{})\n", report.accuracy, report.correct,
                 report.eval_size);
      return 0;
    }
    if (bench_cmd->parsed()) {
      const RunConfig cfg = resolve_config(bench_args);
      const BenchReport r = bench(cfg);
      fmt::print("bench at f={} ({} frames timed)\n", r.feature_dim, r.frames_timed);
      fmt::print("  per frame       {:.1f} us\n", r.per_frame_us);
      fmt::print("  per prediction  {:.1f} ns (f={})\n", r.per_prediction_ns, r.feature_dim);
      fmt::print("  per prediction  {:.1f} ns (f={})\n", r.per_prediction_ns_4f,
                 4 * r.feature_dim);
      fmt::print("  scaling ratio   {:.2f}\n", r.prediction_scaling_ratio);
      fmt::print("  per update      {:.1f} ns\n", r.per_update_ns);
      return 0;
    }
    if (replay_cmd->parsed()) {
      if (!replay_events.empty()) {
        if (replay_snapshot.empty()) {
          fmt::print(stderr, "--samples mode needs --snapshot to compare against\n");
          return 1;
        }
        const ReplayCheck check = replay_samples(replay_events, replay_snapshot);
        fmt::print("replayed {} samples, expected {} updates\n", check.samples_replayed,
                   check.updates_expected);
        fmt::print("bit-exact: {} (max weight delta {})\n", check.bit_exact ? "yes" : "no",
                   check.max_weight_delta);
        return check.bit_exact ? 0 : 2;
      }
      if (replay_stream.empty()) {
        fmt::print(stderr, "replay needs --stream or --samples\n");
        return 1;
      }
      RunConfig cfg = resolve_config(replay_args);
      cfg.replay_stream = replay_stream;
      const RunArtifacts art = run_experiment(cfg);
      print_summary(art.summary, art);
      return 0;
    }
  } catch (const ValidationError& e) {
    fmt::print(stderr, "{}\n", e.what());
    return 1;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
