#include "orient/model_io.hpp"

#include <fstream>

#include "orient/error.hpp"

namespace orient {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(r)].size()) != cols) throw DataError("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json vector_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

json to_json(const LearnConfig& c) {
  return {
      {"use_rfe", c.use_rfe},
      {"pool_size", c.pool_size},
      {"initial_ensemble", c.initial_ensemble},
      {"val_fraction", c.val_fraction},
      {"min_subject_samples", c.min_subject_samples},
      {"rfe",
       {{"n_trees", c.rfe.forest.n_trees},
        {"max_depth", c.rfe.forest.max_depth},
        {"min_samples_leaf", c.rfe.forest.min_samples_leaf},
        {"mtry", c.rfe.forest.mtry},
        {"bootstrap", c.rfe.forest.bootstrap},
        {"val_fraction", c.rfe.val_fraction}}},
      {"mlp",
       {{"hidden", c.mlp.hidden},
        {"learning_rate", c.mlp.learning_rate},
        {"batch_size", c.mlp.batch_size},
        {"max_epochs", c.mlp.max_epochs},
        {"patience", c.mlp.patience},
        {"weight_decay", c.mlp.weight_decay},
        {"target_scale", c.mlp.target_scale}}},
  };
}

LearnConfig learn_config_from_json(const json& j, LearnConfig c) {
  c.use_rfe = j.value("use_rfe", c.use_rfe);
  c.pool_size = j.value("pool_size", c.pool_size);
  c.initial_ensemble = j.value("initial_ensemble", c.initial_ensemble);
  c.val_fraction = j.value("val_fraction", c.val_fraction);
  c.min_subject_samples = j.value("min_subject_samples", c.min_subject_samples);
  if (j.contains("rfe")) {
    const auto& r = j["rfe"];
    c.rfe.forest.n_trees = r.value("n_trees", c.rfe.forest.n_trees);
    c.rfe.forest.max_depth = r.value("max_depth", c.rfe.forest.max_depth);
    c.rfe.forest.min_samples_leaf = r.value("min_samples_leaf", c.rfe.forest.min_samples_leaf);
    c.rfe.forest.mtry = r.value("mtry", c.rfe.forest.mtry);
    c.rfe.forest.bootstrap = r.value("bootstrap", c.rfe.forest.bootstrap);
    c.rfe.val_fraction = r.value("val_fraction", c.rfe.val_fraction);
  }
  if (j.contains("mlp")) {
    const auto& m = j["mlp"];
    c.mlp.hidden = m.value("hidden", c.mlp.hidden);
    c.mlp.learning_rate = m.value("learning_rate", c.mlp.learning_rate);
    c.mlp.batch_size = m.value("batch_size", c.mlp.batch_size);
    c.mlp.max_epochs = m.value("max_epochs", c.mlp.max_epochs);
    c.mlp.patience = m.value("patience", c.mlp.patience);
    c.mlp.weight_decay = m.value("weight_decay", c.mlp.weight_decay);
    c.mlp.target_scale = m.value("target_scale", c.mlp.target_scale);
  }
  if (c.pool_size < c.initial_ensemble || c.initial_ensemble < 1) throw DataError("config: pool_size < initial_ensemble");
  return c;
}

json to_json(const MlpModel& m) {
  json layers = json::array();
  for (std::size_t l = 0; l < m.weights.size(); ++l)
    layers.push_back({{"w", matrix_json(m.weights[l])}, {"b", vector_json(m.biases[l])}});
  return {{"seed", m.seed},
          {"val_mae", m.val_mae},
          {"epochs", m.epochs},
          {"target_scale", m.target_scale},
          {"standardizer", {{"mean", vector_json(m.standardizer.mean)}, {"scale", vector_json(m.standardizer.scale)}}},
          {"layers", layers}};
}

MlpModel mlp_from_json(const json& j) {
  MlpModel m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.val_mae = j.at("val_mae").get<double>();
  m.epochs = j.at("epochs").get<int>();
  m.target_scale = j.at("target_scale").get<double>();
  m.standardizer.mean = vector_from(j.at("standardizer").at("mean"));
  m.standardizer.scale = vector_from(j.at("standardizer").at("scale"));
  for (const auto& l : j.at("layers")) {
    m.weights.push_back(matrix_from(l.at("w")));
    m.biases.push_back(vector_from(l.at("b")));
  }
  return m;
}

json to_json(const HeadYawModel& model) {
  json schema = {{"version", model.schema.version()}, {"hash", model.schema.hash()}, {"features", json::array()}};
  for (const auto& e : model.schema.entries())
    schema["features"].push_back({{"name", e.name}, {"family", family_name(e.family)}});
  json members = json::array();
  for (const auto& m : model.ensemble.members) members.push_back(to_json(m));
  return {{"format", model.format},
          {"seed", model.seed},
          {"schema", schema},
          {"selected", model.selected},
          {"config", to_json(model.config)},
          {"ensemble",
           {{"pool_rank", model.ensemble.pool_rank},
            {"initial_val_mae", model.ensemble.initial_val_mae},
            {"val_mae", model.ensemble.val_mae},
            {"members", members}}}};
}

HeadYawModel model_from_json(const json& j) {
  HeadYawModel model;
  model.format = j.at("format").get<std::string>();
  if (model.format != "orient-model/1") throw DataError("unsupported model format '" + model.format + "'");
  model.seed = j.at("seed").get<std::uint64_t>();
  std::vector<FeatureEntry> entries;
  for (const auto& f : j.at("schema").at("features")) {
    entries.push_back({f.at("name").get<std::string>(), family_from_name(f.at("family").get<std::string>())});
  }
  model.schema = FeatureSchema(j.at("schema").at("version").get<std::string>(), std::move(entries));
  if (model.schema.hash() != j.at("schema").at("hash").get<std::string>()) throw DataError("model schema hash mismatch");
  model.selected = j.at("selected").get<std::vector<Eigen::Index>>();
  model.config = learn_config_from_json(j.at("config"));
  const auto& e = j.at("ensemble");
  model.ensemble.pool_rank = e.at("pool_rank").get<std::vector<std::size_t>>();
  model.ensemble.initial_val_mae = e.at("initial_val_mae").get<double>();
  model.ensemble.val_mae = e.at("val_mae").get<double>();
  for (const auto& m : e.at("members")) model.ensemble.members.push_back(mlp_from_json(m));
  return model;
}

void write_model(const std::filesystem::path& path, const HeadYawModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json(model).dump() << '\n';
}

HeadYawModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return model_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model bundle: ") + e.what());
  }
}

}  // namespace orient
