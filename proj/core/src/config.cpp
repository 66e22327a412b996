#include "tracklearn/config.hpp"

#include <cstdlib>
#include <fstream>

#include <fmt/core.h>
#include <json.hpp>

#include "tracklearn/errors.hpp"

namespace tracklearn {

using nlohmann::json;

std::vector<std::string> MetricsConfig::validate() const {
  std::vector<std::string> v;
  if (eval_set_size < 2 || eval_set_size % 2 != 0) {
    v.push_back(fmt::format("metrics.eval_set_size must be even and >= 2, got {}", eval_set_size));
  }
  if (eval_cadence < 1) v.push_back("metrics.eval_cadence must be >= 1");
  if (window < 1) v.push_back("metrics.window must be >= 1");
  if (!(tau >= 0.0)) v.push_back("metrics.tau must be >= 0");
  if (!(delta >= 0.0)) v.push_back("metrics.delta must be >= 0");
  return v;
}

std::vector<std::string> RunConfig::validate() const {
  std::vector<std::string> violations = world.validate();
  for (auto& s : tracker.validate()) violations.push_back(std::move(s));
  for (auto& s : experts.validate()) violations.push_back(std::move(s));
  for (auto& s : static_detector.validate()) violations.push_back(std::move(s));
  for (auto& s : learner.validate()) violations.push_back(std::move(s));
  for (auto& s : metrics.validate()) violations.push_back(std::move(s));
  if (snapshot_every < 0) violations.push_back("snapshot_every must be >= 0");
  if (mode == Mode::kFrameworkA && learner.seed_positive + learner.seed_negative < 1) {
    violations.push_back("framework A needs at least one seed sample (learner.seed_positive/negative)");
  }
  if (!dump_stream.empty() && std::filesystem::path(dump_stream).is_absolute()) {
    violations.push_back("dump_stream must be a relative filename inside output_dir");
  }
  return violations;
}

namespace {

class SectionReader {
 public:
  SectionReader(const json& j, std::string prefix, std::vector<std::string>& violations)
      : j_(j), prefix_(std::move(prefix)), violations_(violations) {
    if (!j_.is_object()) {
      violations_.push_back(fmt::format("{} must be an object", prefix_.empty() ? "config" : prefix_));
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!j_.is_object()) return;
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    seen_.push_back(key);
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      violations_.push_back(fmt::format("{}{} has the wrong type", prefix_, key));
    }
  }

  const json* subsection(const char* key) {
    if (!j_.is_object()) return nullptr;
    const auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.push_back(key);
    return &*it;
  }

  // Flags typos: every present key must have been consumed.
  void finish() {
    if (!j_.is_object()) return;
    for (const auto& [key, value] : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        violations_.push_back(fmt::format("unknown config key {}{}", prefix_, key));
      }
    }
  }

 private:
  const json& j_;
  std::string prefix_;
  std::vector<std::string>& violations_;
  std::vector<std::string> seen_;
};

void read_world(const json& j, WorldConfig& w, std::vector<std::string>& violations) {
  SectionReader r(j, "world.", violations);
  r.get("n_humans", w.n_humans);
  r.get("n_clutter", w.n_clutter);
  r.get("arena_width", w.arena_width);
  r.get("arena_height", w.arena_height);
  r.get("human_speed_min", w.human_speed_min);
  r.get("human_speed_max", w.human_speed_max);
  r.get("clutter_speed_min", w.clutter_speed_min);
  r.get("clutter_speed_max", w.clutter_speed_max);
  r.get("agent_lifetime_min", w.agent_lifetime_min);
  r.get("agent_lifetime_max", w.agent_lifetime_max);
  r.get("feature_dim", w.feature_dim);
  r.get("class_feature_separation", w.class_feature_separation);
  r.get("feature_noise", w.feature_noise);
  r.get("centroid_noise", w.centroid_noise);
  r.get("miss_rate", w.miss_rate);
  r.get("false_positive_rate", w.false_positive_rate);
  r.get("frames", w.frames);
  r.get("dt", w.dt);
  r.get("seed", w.seed);
  r.finish();
}

void read_tracker(const json& j, TrackerConfig& t, std::vector<std::string>& violations) {
  SectionReader r(j, "tracker.", violations);
  r.get("process_noise_density", t.process_noise_density);
  r.get("measurement_noise_std", t.measurement_noise_std);
  r.get("gate", t.gate);
  r.get("confirm_hits", t.confirm_hits);
  r.get("confirm_window", t.confirm_window);
  r.get("max_misses", t.max_misses);
  r.get("initial_position_var", t.initial_position_var);
  r.get("initial_velocity_var", t.initial_velocity_var);
  r.finish();
}

void read_experts(const json& j, ExpertConfig& e, std::vector<std::string>& violations) {
  SectionReader r(j, "experts.", violations);
  r.get("min_duration", e.min_duration);
  r.get("speed_min", e.speed_min);
  r.get("speed_max", e.speed_max);
  r.get("min_displacement", e.min_displacement);
  r.get("max_cov_trace", e.max_cov_trace);
  r.get("static_displacement", e.static_displacement);
  r.finish();
}

void read_static(const json& j, StaticDetectorConfig& s, std::vector<std::string>& violations) {
  SectionReader r(j, "static_detector.", violations);
  r.get("accuracy", s.accuracy);
  r.get("concentration", s.concentration);
  r.finish();
}

void read_learner(const json& j, LearnerConfig& l, std::vector<std::string>& violations) {
  SectionReader r(j, "learner.", violations);
  r.get("lr0", l.lr0);
  r.get("fusion_window", l.fusion_window);
  r.get("ambiguity_margin", l.ambiguity_margin);
  r.get("expert_period", l.expert_period);
  r.get("seed_positive", l.seed_positive);
  r.get("seed_negative", l.seed_negative);
  r.finish();
}

void read_metrics(const json& j, MetricsConfig& m, std::vector<std::string>& violations) {
  SectionReader r(j, "metrics.", violations);
  r.get("eval_set_size", m.eval_set_size);
  r.get("eval_cadence", m.eval_cadence);
  r.get("window", m.window);
  r.get("tau", m.tau);
  r.get("delta", m.delta);
  r.finish();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError({fmt::format("config is not valid JSON: {}", e.what())});
  }

  RunConfig cfg;
  std::vector<std::string> violations;
  SectionReader top(j, "", violations);

  std::string mode_str;
  top.get("mode", mode_str);
  if (!mode_str.empty()) {
    try {
      cfg.mode = mode_from_string(mode_str);
    } catch (const InvalidArgumentError& e) {
      violations.push_back(e.what());
    }
  }
  top.get("seed", cfg.world.seed);
  top.get("output_dir", cfg.output_dir);
  top.get("snapshot_every", cfg.snapshot_every);
  top.get("dump_stream", cfg.dump_stream);
  top.get("replay_stream", cfg.replay_stream);

  if (const json* s = top.subsection("world")) read_world(*s, cfg.world, violations);
  if (const json* s = top.subsection("tracker")) read_tracker(*s, cfg.tracker, violations);
  if (const json* s = top.subsection("experts")) read_experts(*s, cfg.experts, violations);
  if (const json* s = top.subsection("static_detector")) read_static(*s, cfg.static_detector, violations);
  if (const json* s = top.subsection("learner")) read_learner(*s, cfg.learner, violations);
  if (const json* s = top.subsection("metrics")) read_metrics(*s, cfg.metrics, violations);
  top.finish();

  for (auto& v : cfg.validate()) {
    violations.push_back(std::move(v));
  }
  if (!violations.empty()) {
    throw ValidationError(std::move(violations));
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError({fmt::format("cannot open config file {}", path.string())});
  }
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::string config_to_json(const RunConfig& cfg) {
  json j;
  j["mode"] = to_string(cfg.mode);
  j["seed"] = cfg.world.seed;
  j["output_dir"] = cfg.output_dir;
  j["snapshot_every"] = cfg.snapshot_every;
  if (!cfg.dump_stream.empty()) j["dump_stream"] = cfg.dump_stream;
  if (!cfg.replay_stream.empty()) j["replay_stream"] = cfg.replay_stream;
  j["world"] = {{"n_humans", cfg.world.n_humans},
                {"n_clutter", cfg.world.n_clutter},
                {"arena_width", cfg.world.arena_width},
                {"arena_height", cfg.world.arena_height},
                {"human_speed_min", cfg.world.human_speed_min},
                {"human_speed_max", cfg.world.human_speed_max},
                {"clutter_speed_min", cfg.world.clutter_speed_min},
                {"clutter_speed_max", cfg.world.clutter_speed_max},
                {"agent_lifetime_min", cfg.world.agent_lifetime_min},
                {"agent_lifetime_max", cfg.world.agent_lifetime_max},
                {"feature_dim", cfg.world.feature_dim},
                {"class_feature_separation", cfg.world.class_feature_separation},
                {"feature_noise", cfg.world.feature_noise},
                {"centroid_noise", cfg.world.centroid_noise},
                {"miss_rate", cfg.world.miss_rate},
                {"false_positive_rate", cfg.world.false_positive_rate},
                {"frames", cfg.world.frames},
                {"dt", cfg.world.dt},
                {"seed", cfg.world.seed}};
  j["tracker"] = {{"process_noise_density", cfg.tracker.process_noise_density},
                  {"measurement_noise_std", cfg.tracker.measurement_noise_std},
                  {"gate", cfg.tracker.gate},
                  {"confirm_hits", cfg.tracker.confirm_hits},
                  {"confirm_window", cfg.tracker.confirm_window},
                  {"max_misses", cfg.tracker.max_misses},
                  {"initial_position_var", cfg.tracker.initial_position_var},
                  {"initial_velocity_var", cfg.tracker.initial_velocity_var}};
  j["experts"] = {{"min_duration", cfg.experts.min_duration},
                  {"speed_min", cfg.experts.speed_min},
                  {"speed_max", cfg.experts.speed_max},
                  {"min_displacement", cfg.experts.min_displacement},
                  {"max_cov_trace", cfg.experts.max_cov_trace},
                  {"static_displacement", cfg.experts.static_displacement}};
  j["static_detector"] = {{"accuracy", cfg.static_detector.accuracy},
                          {"concentration", cfg.static_detector.concentration}};
  j["learner"] = {{"lr0", cfg.learner.lr0},
                  {"fusion_window", cfg.learner.fusion_window},
                  {"ambiguity_margin", cfg.learner.ambiguity_margin},
                  {"expert_period", cfg.learner.expert_period},
                  {"seed_positive", cfg.learner.seed_positive},
                  {"seed_negative", cfg.learner.seed_negative}};
  j["metrics"] = {{"eval_set_size", cfg.metrics.eval_set_size},
                  {"eval_cadence", cfg.metrics.eval_cadence},
                  {"window", cfg.metrics.window},
                  {"tau", cfg.metrics.tau},
                  {"delta", cfg.metrics.delta}};
  return j.dump();
}

void apply_overrides(RunConfig& cfg, const ConfigOverrides& ov) {
  if (ov.seed) cfg.world.seed = *ov.seed;
  if (ov.mode) cfg.mode = mode_from_string(*ov.mode);
  if (ov.output_dir) cfg.output_dir = *ov.output_dir;
  if (ov.frames) cfg.world.frames = *ov.frames;
}

std::filesystem::path resolve_output_dir(const RunConfig& cfg) {
  if (!cfg.output_dir.empty()) {
    return cfg.output_dir;
  }
  if (const char* root = std::getenv("TRACKLEARN_OUTPUT_ROOT"); root != nullptr && *root != '\0') {
    return std::filesystem::path(root) / "run";
  }
  return "out";
}

}  // namespace tracklearn
