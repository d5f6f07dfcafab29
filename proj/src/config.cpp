#include "orient/config.hpp"

#include <fstream>

#include "orient/error.hpp"
#include "orient/model_io.hpp"

namespace orient {

using nlohmann::json;

namespace {

// Rejects keys that the reference layout does not know about.
void check_keys(const json& user, const json& reference, const std::string& path) {
  if (!user.is_object()) return;
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!reference.is_object() || !reference.contains(it.key())) throw DataError("unknown config key '" + key + "'");
    const json& ref = reference.at(it.key());
    if (ref.is_object()) {
      if (!it.value().is_object()) throw DataError("config key '" + key + "' must be an object");
      check_keys(it.value(), ref, key);
    }
  }
}

template <typename T>
void take(const json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

const char* alternative_name(Alternative a) {
  switch (a) {
    case Alternative::kTwoSided: return "two-sided";
    case Alternative::kGreater: return "greater";
    case Alternative::kLess: return "less";
  }
  return "two-sided";
}

Alternative parse_alternative(const std::string& s) {
  if (s == "two-sided") return Alternative::kTwoSided;
  if (s == "greater") return Alternative::kGreater;
  if (s == "less") return Alternative::kLess;
  throw DataError("unknown alternative '" + s + "' (two-sided, greater, less)");
}

json to_json(const PreprocessConfig& c) {
  return {{"crop_radius", c.crop_radius},
          {"upper_body_fraction", c.upper_body_fraction},
          {"knn_k", c.knn_k},
          {"knn_threshold", c.knn_threshold},
          {"initial_split_offset", c.initial_split_offset},
          {"refined_split_offset", c.refined_split_offset},
          {"head_radius", c.head_radius},
          {"body_radius", c.body_radius},
          {"discrepancy_threshold", c.discrepancy_threshold},
          {"crown_gap", c.crown_gap},
          {"crown_neighbors", c.crown_neighbors},
          {"min_crop_points", c.min_crop_points},
          {"min_head_points", c.min_head_points}};
}

json to_json(const BehaviorConfig& c) {
  return {{"half_width", c.half_width},
          {"contact_min_frames", c.contact_min_frames},
          {"exclusion_window", c.exclusion_window},
          {"exclusion_quorum", c.exclusion_quorum},
          {"alternative", alternative_name(c.alternative)}};
}

json to_json(const BenchmarkConfig& c) {
  return {{"n_subjects", c.n_subjects},         {"min_frames", c.min_frames},
          {"max_frames", c.max_frames},         {"yaw_min", c.yaw_min},
          {"yaw_max", c.yaw_max},               {"body_jitter", c.body_jitter},
          {"noise_sigma", c.noise_sigma},       {"outlier_fraction", c.outlier_fraction},
          {"frame_period", c.frame_period},     {"seed", c.seed}};
}

json to_json(const ConversationConfig& c) {
  return {{"setup", c.setup == Setup::kSetup90 ? 90 : 45},
          {"frame_period", c.frame_period},
          {"dwell_jitter", c.dwell_jitter},
          {"with_clouds", c.with_clouds},
          {"seed", c.seed}};
}

json to_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"preprocess", to_json(c.preprocess)},
          {"learn", to_json(c.learn)},
          {"behavior", to_json(c.behavior)},
          {"synth", {{"benchmark", to_json(c.benchmark)}, {"conversation", to_json(c.conversation)}}}};
}

RunConfig run_config_from_json(const json& j, RunConfig c) {
  if (!j.is_object()) throw DataError("config must be a JSON object");
  check_keys(j, to_json(c), "");
  take(j, "seed", c.seed);
  if (j.contains("preprocess")) {
    const json& p = j["preprocess"];
    auto& d = c.preprocess;
    take(p, "crop_radius", d.crop_radius);
    take(p, "upper_body_fraction", d.upper_body_fraction);
    take(p, "knn_k", d.knn_k);
    take(p, "knn_threshold", d.knn_threshold);
    take(p, "initial_split_offset", d.initial_split_offset);
    take(p, "refined_split_offset", d.refined_split_offset);
    take(p, "head_radius", d.head_radius);
    take(p, "body_radius", d.body_radius);
    take(p, "discrepancy_threshold", d.discrepancy_threshold);
    take(p, "crown_gap", d.crown_gap);
    take(p, "crown_neighbors", d.crown_neighbors);
    take(p, "min_crop_points", d.min_crop_points);
    take(p, "min_head_points", d.min_head_points);
  }
  if (j.contains("learn")) c.learn = learn_config_from_json(j["learn"], c.learn);
  if (j.contains("behavior")) {
    const json& b = j["behavior"];
    take(b, "half_width", c.behavior.half_width);
    take(b, "contact_min_frames", c.behavior.contact_min_frames);
    take(b, "exclusion_window", c.behavior.exclusion_window);
    take(b, "exclusion_quorum", c.behavior.exclusion_quorum);
    if (b.contains("alternative")) c.behavior.alternative = parse_alternative(b["alternative"].get<std::string>());
  }
  if (j.contains("synth")) {
    const json& s = j["synth"];
    if (s.contains("benchmark")) {
      const json& b = s["benchmark"];
      auto& d = c.benchmark;
      take(b, "n_subjects", d.n_subjects);
      take(b, "min_frames", d.min_frames);
      take(b, "max_frames", d.max_frames);
      take(b, "yaw_min", d.yaw_min);
      take(b, "yaw_max", d.yaw_max);
      take(b, "body_jitter", d.body_jitter);
      take(b, "noise_sigma", d.noise_sigma);
      take(b, "outlier_fraction", d.outlier_fraction);
      take(b, "frame_period", d.frame_period);
      take(b, "seed", d.seed);
    }
    if (s.contains("conversation")) {
      const json& v = s["conversation"];
      int setup = c.conversation.setup == Setup::kSetup90 ? 90 : 45;
      take(v, "setup", setup);
      if (setup != 90 && setup != 45) throw DataError("config key 'synth.conversation.setup' must be 90 or 45");
      c.conversation.setup = setup == 90 ? Setup::kSetup90 : Setup::kSetup45;
      take(v, "frame_period", c.conversation.frame_period);
      take(v, "dwell_jitter", c.conversation.dwell_jitter);
      take(v, "with_clouds", c.conversation.with_clouds);
      take(v, "seed", c.conversation.seed);
    }
  }
  validate(c);
  return c;
}

void validate(const RunConfig& c) {
  const auto& p = c.preprocess;
  auto require = [](bool ok, const char* what) {
    if (!ok) throw DataError(std::string("config: ") + what);
  };
  require(p.crop_radius > 0 && p.head_radius > 0 && p.body_radius > 0, "radii must be positive");
  require(p.upper_body_fraction > 0 && p.upper_body_fraction <= 1, "upper_body_fraction must lie in (0, 1]");
  require(p.knn_k >= 1 && p.knn_threshold > 0, "knn_k >= 1 and knn_threshold > 0 required");
  require(p.crown_neighbors >= 1 && p.crown_gap >= 0, "crown rule parameters out of range");
  require(p.min_head_points >= 6, "min_head_points must be at least 6");
  require(c.behavior.half_width > 0, "behavior.half_width must be positive");
  require(c.behavior.contact_min_frames >= 1, "behavior.contact_min_frames must be >= 1");
  require(c.behavior.exclusion_window >= 1 && c.behavior.exclusion_quorum >= 1 &&
              c.behavior.exclusion_quorum <= c.behavior.exclusion_window,
          "exclusion quorum must lie in [1, window]");
  require(c.learn.pool_size >= c.learn.initial_ensemble && c.learn.initial_ensemble >= 1, "pool_size >= initial_ensemble >= 1");
  require(c.learn.val_fraction > 0 && c.learn.val_fraction < 1, "learn.val_fraction must lie in (0, 1)");
  require(c.learn.mlp.max_epochs >= 1 && c.learn.mlp.batch_size >= 1 && c.learn.mlp.learning_rate > 0,
          "mlp training parameters out of range");
  require(c.benchmark.n_subjects >= 1 && c.benchmark.min_frames >= 1 && c.benchmark.max_frames >= c.benchmark.min_frames,
          "benchmark subject and frame counts out of range");
  require(c.conversation.frame_period > 0, "conversation.frame_period must be positive");
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace orient
