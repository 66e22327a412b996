#include "tracklearn/io.hpp"

#include <fmt/core.h>
#include <json.hpp>

#include "tracklearn/errors.hpp"

namespace tracklearn {

using nlohmann::json;

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    arr.push_back(v[i]);
  }
  return arr;
}

Eigen::VectorXd json_to_vector(const json& arr) {
  Eigen::VectorXd v(arr.size());
  Eigen::Index i = 0;
  for (const auto& x : arr) {
    v[i++] = x.get<double>();
  }
  return v;
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "seed") return Provenance::kSeed;
  if (s == "p_expert") return Provenance::kPExpert;
  if (s == "n_expert") return Provenance::kNExpert;
  if (s == "fusion") return Provenance::kFusion;
  if (s == "eval") return Provenance::kEval;
  throw Error(fmt::format("unknown provenance '{}'", s));
}

json parse_line(const std::string& line, const std::filesystem::path& path, int lineno) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw Error(fmt::format("{}:{}: malformed JSON line: {}", path.string(), lineno, e.what()));
  }
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const ModelSnapshot& snap) {
  json j;
  j["format"] = "tracklearn-model";
  j["version"] = snap.version;
  j["feature_dim"] = snap.feature_dim;
  j["weights"] = vector_to_json(snap.weights);
  j["bias"] = snap.bias;
  j["updates"] = snap.updates;
  j["lr0"] = snap.lr0;
  j["seed"] = snap.seed;
  std::ofstream out(path);
  if (!out) {
    throw Error(fmt::format("cannot write snapshot {}", path.string()));
  }
  out << j.dump() << '\n';
}

ModelSnapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(fmt::format("cannot open snapshot {}", path.string()));
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(fmt::format("malformed snapshot {}: {}", path.string(), e.what()));
  }
  ModelSnapshot snap;
  snap.version = j.value("version", -1);
  if (snap.version != 1) {
    throw VersionError(fmt::format("unsupported snapshot version {} in {}", snap.version,
                                   path.string()));
  }
  try {
    snap.feature_dim = j.at("feature_dim").get<int>();
    snap.weights = json_to_vector(j.at("weights"));
    snap.bias = j.at("bias").get<double>();
    snap.updates = j.at("updates").get<std::int64_t>();
    snap.lr0 = j.at("lr0").get<double>();
    snap.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(fmt::format("malformed snapshot {}: {}", path.string(), e.what()));
  }
  if (snap.weights.size() != snap.feature_dim) {
    throw Error(fmt::format("snapshot {} has {} weights but feature_dim {}", path.string(),
                            snap.weights.size(), snap.feature_dim));
  }
  return snap;
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path) : out_(path) {
  if (!out_) {
    throw Error(fmt::format("cannot open {} for writing", path.string()));
  }
}

void JsonlWriter::write_line(const std::string& serialized_json) {
  out_ << serialized_json << '\n';
}

void JsonlWriter::flush() { out_.flush(); }

std::string run_config_event(const std::string& config_json, std::uint64_t master_seed) {
  json j;
  j["type"] = "run_config";
  j["master_seed"] = master_seed;
  j["config"] = json::parse(config_json);
  return j.dump();
}

namespace {

template <typename T>
json span_to_json(std::span<const T> s) {
  json arr = json::array();
  for (const T& v : s) {
    arr.push_back(v);
  }
  return arr;
}

}  // namespace

std::string frame_event(int frame, std::span<const double> predictions,
                        std::span<const double> static_outputs,
                        std::span<const int> spawned, std::span<const int> confirmed,
                        std::span<const int> dead, int samples_applied) {
  json j;
  j["type"] = "frame";
  j["frame"] = frame;
  j["predictions"] = span_to_json(predictions);
  if (!static_outputs.empty()) {
    j["static_outputs"] = span_to_json(static_outputs);
  }
  if (!spawned.empty()) j["spawned"] = span_to_json(spawned);
  if (!confirmed.empty()) j["confirmed"] = span_to_json(confirmed);
  if (!dead.empty()) j["dead"] = span_to_json(dead);
  j["samples"] = samples_applied;
  return j.dump();
}

std::string sample_event(int seq, const LabeledSample& s) {
  json j;
  j["type"] = "sample";
  j["seq"] = seq;
  j["frame"] = s.frame;
  j["y"] = s.y;
  j["weight"] = s.weight;
  j["provenance"] = to_string(s.provenance);
  j["x"] = vector_to_json(s.x);
  return j.dump();
}

std::string eval_event(const EvalRecord& r) {
  json j;
  j["type"] = "eval";
  j["t"] = r.t;
  j["frame"] = r.frame;
  j["u"] = r.u;
  j["accuracy"] = r.eval_accuracy;
  j["cum_online_loss"] = r.online_loss;
  return j.dump();
}

std::vector<LabeledSample> samples_from_events(const std::filesystem::path& events_path) {
  std::ifstream in(events_path);
  if (!in) {
    throw Error(fmt::format("cannot open events file {}", events_path.string()));
  }
  std::vector<LabeledSample> samples;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = parse_line(line, events_path, lineno);
    if (j.value("type", "") != "sample") continue;
    LabeledSample s;
    s.x = json_to_vector(j.at("x"));
    s.y = j.at("y").get<int>();
    s.weight = j.at("weight").get<double>();
    s.provenance = provenance_from_string(j.at("provenance").get<std::string>());
    s.frame = j.at("frame").get<int>();
    samples.push_back(std::move(s));
  }
  return samples;
}

std::string stream_frame_line(int frame, std::span<const FeatureCluster> clusters) {
  json arr = json::array();
  for (const FeatureCluster& c : clusters) {
    json jc;
    jc["centroid"] = {c.centroid.x(), c.centroid.y()};
    jc["features"] = vector_to_json(c.features);
    jc["truth"] = c.truth == TruthLabel::kHuman ? "human" : "clutter";
    if (c.agent_id) jc["agent_id"] = *c.agent_id;
    arr.push_back(std::move(jc));
  }
  json j;
  j["type"] = "stream_frame";
  j["frame"] = frame;
  j["clusters"] = std::move(arr);
  return j.dump();
}

std::vector<std::vector<FeatureCluster>> read_stream(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(fmt::format("cannot open stream file {}", path.string()));
  }
  std::vector<std::vector<FeatureCluster>> frames;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = parse_line(line, path, lineno);
    if (j.value("type", "") != "stream_frame") continue;
    std::vector<FeatureCluster> clusters;
    const int frame = j.at("frame").get<int>();
    for (const auto& jc : j.at("clusters")) {
      FeatureCluster c;
      c.centroid = Eigen::Vector2d(jc.at("centroid")[0].get<double>(),
                                   jc.at("centroid")[1].get<double>());
      c.features = json_to_vector(jc.at("features"));
      c.truth = jc.at("truth").get<std::string>() == "human" ? TruthLabel::kHuman
                                                             : TruthLabel::kClutter;
      if (jc.contains("agent_id")) c.agent_id = jc.at("agent_id").get<int>();
      c.frame = frame;
      clusters.push_back(std::move(c));
    }
    frames.push_back(std::move(clusters));
  }
  return frames;
}

void write_metrics_csv(const std::filesystem::path& path, const MetricsLog& log,
                       double static_eval_accuracy, std::span<const bool> converged_flags) {
  if (converged_flags.size() != log.records.size()) {
    throw InvalidArgumentError("converged flags misaligned with metric records");
  }
  std::ofstream out(path);
  if (!out) {
    throw Error(fmt::format("cannot write {}", path.string()));
  }
  out << kMetricsCsvHeader << '\n';
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const EvalRecord& r = log.records[i];
    const double rate = stability_rate(log, r.t);
    out << fmt::format("{},{},{},{},{},{},{},{}\n", r.frame, r.u, r.eval_accuracy, rate,
                       r.online_loss, r.eval_accuracy, static_eval_accuracy,
                       converged_flags[i] ? 1 : 0);
  }
}

}  // namespace tracklearn
