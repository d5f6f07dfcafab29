#pragma once

#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "orient/ensemble.hpp"
#include "orient/preprocess.hpp"
#include "orient/stats.hpp"
#include "orient/synth.hpp"

namespace orient {

struct BehaviorConfig {
  double half_width = 15.0;  // degrees around each interviewer
  int contact_min_frames = 3;
  int exclusion_window = 20;
  int exclusion_quorum = 15;
  Alternative alternative = Alternative::kTwoSided;
};

// Everything a run depends on. Worker count is deliberately absent: it
// never changes results.
struct RunConfig {
  std::uint64_t seed = 42;
  PreprocessConfig preprocess;
  LearnConfig learn;
  BehaviorConfig behavior;
  BenchmarkConfig benchmark;
  ConversationConfig conversation;
};

nlohmann::json to_json(const PreprocessConfig& c);
nlohmann::json to_json(const BehaviorConfig& c);
nlohmann::json to_json(const BenchmarkConfig& c);
nlohmann::json to_json(const ConversationConfig& c);
nlohmann::json to_json(const RunConfig& c);

// Overlays `j` on `base`. Unknown keys and out-of-range values throw
// DataError.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path);
void validate(const RunConfig& c);

const char* alternative_name(Alternative a);
Alternative parse_alternative(const std::string& s);

}  // namespace orient
