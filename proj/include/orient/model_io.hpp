#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "orient/ensemble.hpp"

namespace orient {

nlohmann::json to_json(const LearnConfig& cfg);
LearnConfig learn_config_from_json(const nlohmann::json& j, LearnConfig base = {});

nlohmann::json to_json(const MlpModel& m);
MlpModel mlp_from_json(const nlohmann::json& j);

// Model bundle: schema (names + hash), selected features, standardisation,
// member weights, ensemble roster, config and seeds.
nlohmann::json to_json(const HeadYawModel& model);
HeadYawModel model_from_json(const nlohmann::json& j);

void write_model(const std::filesystem::path& path, const HeadYawModel& model);
HeadYawModel read_model(const std::filesystem::path& path);

}  // namespace orient
