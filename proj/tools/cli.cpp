#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "orient/behavior.hpp"
#include "orient/config.hpp"
#include "orient/error.hpp"
#include "orient/model_io.hpp"
#include "orient/pipeline.hpp"
#include "orient/rng.hpp"
#include "orient/stats.hpp"
#include "orient/synth.hpp"

namespace orient::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string out_dir = ".";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "master seed");
  sub->add_option("--workers", c.workers, "worker threads (never changes results)")->check(CLI::PositiveNumber);
  sub->add_option("--out-dir", c.out_dir, "output directory");
}

// Shortest round-trip representation.
std::string num(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

void write_json(const fs::path& p, const json& j) { open_out(p) << j.dump(2) << '\n'; }

json read_json(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_run_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  cfg.learn.workers = c.workers;
  fs::create_directories(c.out_dir);
  write_json(fs::path(c.out_dir) / "config.resolved.json", to_json(cfg));
  return cfg;
}

std::vector<fs::path> sessions_in(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".jsonl") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  if (out.empty()) throw DataError("no session files in " + dir.string());
  return out;
}

// Sessions from --session and/or --bench-dir, plus labels when available.
struct Inputs {
  std::vector<fs::path> sessions;
  std::optional<std::vector<BenchmarkLabel>> labels;
};

Inputs gather(const std::vector<std::string>& sessions, const std::string& bench_dir, const std::string& labels) {
  Inputs in;
  for (const auto& s : sessions) in.sessions.emplace_back(s);
  if (!bench_dir.empty()) {
    for (auto& p : sessions_in(bench_dir)) in.sessions.push_back(p);
    if (labels.empty() && fs::exists(fs::path(bench_dir) / "labels.csv"))
      in.labels = read_labels(fs::path(bench_dir) / "labels.csv");
  }
  if (!labels.empty()) in.labels = read_labels(labels);
  if (in.sessions.empty()) throw DataError("no input sessions (use --session or --bench-dir)");
  return in;
}

SessionRecording load_session(const fs::path& p, std::ostream& out) {
  ParseReport report;
  SessionRecording s = parse_session(p, &report);
  for (const auto& v : report.violations)
    out << p.string() << ":" << v.line << ": skipped line: " << v.message << '\n';
  return s;
}

struct Processed {
  FeatureTable table;
  std::vector<std::pair<std::string, FrameRecord>> records;  // (session stem, record)
};

Processed process_all(const Inputs& in, const RunConfig& cfg, int workers, std::ostream& out) {
  Processed p;
  for (const auto& path : in.sessions) {
    const SessionRecording s = load_session(path, out);
    SessionFeatures sf = process_session(s, cfg.preprocess, workers);
    append_rows(p.table, sf.table);
    for (auto& r : sf.records) p.records.emplace_back(path.stem().string(), std::move(r));
  }
  if (p.table.frame_ids.empty()) p.table.schema = FeatureSchema::default_schema();
  if (in.labels) attach_labels(p.table, *in.labels);
  return p;
}

void write_records(const fs::path& path, const std::vector<std::pair<std::string, FrameRecord>>& recs) {
  auto o = open_out(path);
  o << "session,frame,subject,t,usable,rejected,reason,flags,cropped_points,head_points,body_points,z_head,head_x,"
       "head_y,body_yaw\n";
  for (const auto& [sess, r] : recs) {
    o << sess << ',' << r.frame << ',' << r.subject << ',' << num(r.t) << ',' << r.usable << ',' << r.rejected << ','
      << r.reason << ',' << describe_flags(r.flags) << ',' << r.cropped_points << ',' << r.head_points << ','
      << r.body_points << ',' << num(r.z_head) << ',' << num(r.head_center.x()) << ',' << num(r.head_center.y())
      << ',' << (r.body_yaw ? num(*r.body_yaw) : "NA") << '\n';
  }
}

// ---------------------------------------------------------------- synth

ScriptStep parse_step(const json& j) {
  ScriptStep s;
  s.duration = j.at("duration").get<double>();
  const auto t = j.at("target").get<std::string>();
  if (t == "i1") s.target = Target::kInterviewer1;
  else if (t == "i2") s.target = Target::kInterviewer2;
  else if (t == "neutral") s.target = Target::kNeutral;
  else throw DataError("script: unknown target '" + t + "' (i1, i2, neutral)");
  const auto sp = j.value("speaker", std::string("none"));
  if (sp == "subject") s.speaker = Speaker::kSubject;
  else if (sp == "i1") s.speaker = Speaker::kInterviewer1;
  else if (sp == "i2") s.speaker = Speaker::kInterviewer2;
  else if (sp == "none") s.speaker = Speaker::kNone;
  else throw DataError("script: unknown speaker '" + sp + "'");
  return s;
}

json span_json(const FrameSpan& s) { return {{"party", region_name(s.party)}, {"begin", s.begin}, {"end", s.end}}; }

json refs_json(const ReferenceAngles& r) {
  return {{"interviewer1", r.interviewer1}, {"interviewer2", r.interviewer2}, {"midpoint", r.midpoint}};
}

void write_yaw_csv(const fs::path& path, const std::vector<YawSample>& yaw) {
  auto o = open_out(path);
  o << "t,head_yaw\n";
  for (const auto& y : yaw) o << num(y.t) << ',' << num(y.yaw) << '\n';
}

int cmd_synth(const Common& c, bool benchmark, bool conversation, const std::string& script_path, int setup,
              bool clouds, std::optional<int> subjects, std::ostream& out) {
  if (benchmark == conversation) throw CLI::ValidationError("synth", "choose exactly one of --benchmark, --conversation");
  RunConfig cfg = resolve(c);
  const fs::path dir(c.out_dir);
  if (benchmark) {
    BenchmarkConfig bc = cfg.benchmark;
    if (c.seed) bc.seed = *c.seed;
    if (subjects) bc.n_subjects = *subjects;
    const Benchmark bench = generate_benchmark(bc);
    write_benchmark(dir, bench);
    out << "wrote " << bench.subjects.size() << " sessions, " << bench.labels.size() << " labelled frames to "
        << dir.string() << '\n';
    return kOk;
  }
  if (script_path.empty()) throw CLI::ValidationError("synth", "--conversation needs --script");
  const json sj = read_json(script_path);
  if (!sj.is_array()) throw DataError("script must be a JSON array of steps");
  std::vector<ScriptStep> script;
  try {
    for (const auto& s : sj) script.push_back(parse_step(s));
  } catch (const json::exception& e) {
    throw DataError(std::string("script: ") + e.what());
  }
  ConversationConfig cc = cfg.conversation;
  if (c.seed) cc.seed = *c.seed;
  if (setup != 0) {
    if (setup != 90 && setup != 45) throw CLI::ValidationError("synth", "--setup must be 90 or 45");
    cc.setup = setup == 90 ? Setup::kSetup90 : Setup::kSetup45;
  }
  if (clouds) cc.with_clouds = true;
  const Conversation conv = generate_conversation(script, cc);
  write_yaw_csv(dir / "yaw.csv", conv.yaw);
  write_roles(dir / "roles.jsonl", conv.roles);
  json refs = refs_json(conv.refs);
  refs["subject_zero"] = conv.subject_zero;
  refs["positions"] = {{"subject", {conv.subject.x(), conv.subject.y()}},
                       {"interviewer1", {conv.interviewer1.x(), conv.interviewer1.y()}},
                       {"interviewer2", {conv.interviewer2.x(), conv.interviewer2.y()}}};
  write_json(dir / "refs.json", refs);
  json ex = {{"contacts", json::array()}, {"exclusions", json::array()}};
  for (const auto& s : conv.expected.contacts) ex["contacts"].push_back(span_json(s));
  for (const auto& s : conv.expected.exclusions) ex["exclusions"].push_back(span_json(s));
  ex["contact_count"] = conv.expected.contacts.size();
  ex["exclusion_count"] = conv.expected.exclusions.size();
  write_json(dir / "expected.json", ex);
  if (cc.with_clouds) write_session(dir / "session.jsonl", conv.session);
  out << "wrote conversation of " << conv.yaw.size() << " frames to " << dir.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------- preprocess / fit-body / features

int cmd_preprocess(const Common& c, const Inputs& in, std::ostream& out) {
  const RunConfig cfg = resolve(c);
  Processed p = process_all(in, cfg, c.workers, out);
  write_records(fs::path(c.out_dir) / "frames.csv", p.records);
  std::size_t clean = 0;
  for (const auto& r : p.records) clean += r.second.in_table;
  out << p.records.size() << " subject frames, " << clean << " clean\n";
  return kOk;
}

int cmd_fit_body(const Common& c, const Inputs& in, std::ostream& out) {
  const RunConfig cfg = resolve(c);
  Processed p = process_all(in, cfg, c.workers, out);
  std::map<std::pair<std::string, std::string>, double> truth;
  if (in.labels)
    for (const auto& l : *in.labels) truth[{l.subject, l.frame}] = l.body_yaw;
  auto o = open_out(fs::path(c.out_dir) / "body_yaw.csv");
  o << "session,frame,subject,t,body_yaw,true_body_yaw,abs_error\n";
  double sum = 0.0;
  std::size_t n = 0, estimated = 0;
  for (const auto& [sess, r] : p.records) {
    o << sess << ',' << r.frame << ',' << r.subject << ',' << num(r.t) << ',' << (r.body_yaw ? num(*r.body_yaw) : "NA");
    auto it = truth.find({r.subject, r.frame});
    if (it != truth.end() && r.body_yaw && r.usable) {
      const double e = std::abs(angle_diff_deg(*r.body_yaw, it->second));
      sum += e;
      ++n;
      o << ',' << num(it->second) << ',' << num(e) << '\n';
    } else {
      o << ",NA,NA\n";
    }
    estimated += r.body_yaw.has_value();
  }
  json summary = {{"frames", p.records.size()}, {"estimated", estimated}};
  if (n > 0) {
    summary["labelled"] = n;
    summary["mae"] = sum / static_cast<double>(n);
    out << "body yaw MAE " << sum / static_cast<double>(n) << " deg over " << n << " frames\n";
  }
  write_json(fs::path(c.out_dir) / "body_summary.json", summary);
  return kOk;
}

int cmd_extract(const Common& c, const Inputs& in, std::ostream& out) {
  const RunConfig cfg = resolve(c);
  Processed p = process_all(in, cfg, c.workers, out);
  write_feature_csv(fs::path(c.out_dir) / "features.csv", p.table);
  write_records(fs::path(c.out_dir) / "frames.csv", p.records);
  out << p.table.values.rows() << " feature rows written\n";
  return kOk;
}

// ---------------------------------------------------------------- learning

Dataset load_dataset(const std::string& features, const Inputs* in, const RunConfig& cfg, int workers,
                     const fs::path& out_dir, std::ostream& out, FeatureTable* table_out = nullptr) {
  FeatureTable table;
  if (!features.empty()) {
    table = read_feature_csv(features);
  } else {
    Processed p = process_all(*in, cfg, workers, out);
    table = std::move(p.table);
    write_feature_csv(out_dir / "features.csv", table);
    write_records(out_dir / "frames.csv", p.records);
  }
  if (table_out) *table_out = table;
  Dataset d = dataset_from_table(table);
  if (d.rows() == 0) throw DataError("no labelled feature rows");
  return d;
}

json rfe_json(const RfeTrace& t, const FeatureSchema& schema) {
  json steps = json::array();
  for (const auto& s : t.steps)
    steps.push_back({{"n_features", s.active.size()},
                     {"val_mae", s.val_mae},
                     {"eliminated", s.eliminated >= 0 ? schema.entries()[static_cast<std::size_t>(s.eliminated)].name : ""}});
  json optimal = json::array();
  for (auto i : t.optimal) optimal.push_back(schema.entries()[static_cast<std::size_t>(i)].name);
  return {{"steps", steps}, {"optimal", optimal}, {"optimal_mae", t.optimal_mae}};
}

void write_rfe_csv(std::ostream& o, const std::string& subject, const RfeTrace& t, const FeatureSchema& schema) {
  for (const auto& s : t.steps)
    o << subject << ',' << s.active.size() << ',' << num(s.val_mae) << ','
      << (s.eliminated >= 0 ? schema.entries()[static_cast<std::size_t>(s.eliminated)].name : "") << '\n';
}

int cmd_rfe(const Common& c, const std::string& features, const Inputs* in, int noise, std::ostream& out) {
  const RunConfig cfg = resolve(c);
  Dataset d = load_dataset(features, in, cfg, c.workers, c.out_dir, out);
  if (noise > 0) d = append_noise_features(d, noise, derive_seed(cfg.seed, "noise-features"));
  const RfeTrace t = rf_rfe(d, cfg.learn.rfe, derive_seed(cfg.seed, "rfe"));
  auto o = open_out(fs::path(c.out_dir) / "rfe_trace.csv");
  o << "subject,n_features,val_mae,eliminated\n";
  write_rfe_csv(o, "all", t, d.schema);
  write_json(fs::path(c.out_dir) / "rfe.json", rfe_json(t, d.schema));
  out << "optimal set: " << t.optimal.size() << " of " << d.cols() << " features, validation MAE "
      << t.optimal_mae << '\n';
  return kOk;
}

json selection_json(const SubsetSelection& s) {
  return {{"ranking", s.ranking},
          {"selected", s.selected},
          {"initial_mae", s.initial_mae},
          {"final_mae", s.final_mae},
          {"trace", s.trace},
          {"rejected_mae", s.rejected_mae}};
}

int cmd_train(const Common& c, const std::string& features, const Inputs* in, std::ostream& out) {
  const RunConfig cfg = resolve(c);
  const Dataset d = load_dataset(features, in, cfg, c.workers, c.out_dir, out);
  TrainReport report;
  const HeadYawModel model = train_head_model(d, cfg.learn, cfg.seed, &report);
  write_model(fs::path(c.out_dir) / "model.json", model);
  json rep = {{"rows", d.rows()},
              {"pool_val_mae", report.pool_val_mae},
              {"selection", selection_json(report.selection)},
              {"ensemble_size", model.ensemble.members.size()},
              {"selected_features", model.selected.size()}};
  if (cfg.learn.use_rfe) rep["rfe"] = rfe_json(report.rfe, d.schema);
  write_json(fs::path(c.out_dir) / "train_report.json", rep);
  out << "ensemble of " << model.ensemble.members.size() << " networks on " << model.selected.size()
      << " features, validation MAE " << model.ensemble.val_mae << '\n';
  return kOk;
}

int cmd_evaluate(const Common& c, const std::string& features, const Inputs* in, std::ostream& out) {
  const RunConfig cfg = resolve(c);
  const fs::path dir(c.out_dir);
  FeatureTable table;
  const Dataset d = load_dataset(features, in, cfg, c.workers, dir, out, &table);
  const auto t0 = std::chrono::steady_clock::now();
  const LosoResult res = leave_one_subject_out(d, cfg.learn, cfg.seed);

  // Row i of the dataset is the i-th labelled table row.
  std::vector<std::string> frame_of;
  for (Eigen::Index i = 0; i < table.labels.size(); ++i)
    if (std::isfinite(table.labels[i])) frame_of.push_back(table.frame_ids[static_cast<std::size_t>(i)]);

  fs::create_directories(dir / "models");
  auto mae_csv = open_out(dir / "loso_mae.csv");
  mae_csv << "subject,n_test,mae\n";
  auto pred_csv = open_out(dir / "predictions.csv");
  pred_csv << "frame,subject,label,prediction,abs_error\n";
  auto rfe_csv = open_out(dir / "rfe_trace.csv");
  rfe_csv << "subject,n_features,val_mae,eliminated\n";
  auto ens_csv = open_out(dir / "ensembles.csv");
  ens_csv << "subject,rank,pool_index,seed,val_mae,selected\n";
  json folds = json::array();
  std::size_t n_total = 0;
  for (const auto& f : res.folds) {
    mae_csv << f.subject << ',' << f.test_rows.size() << ',' << num(f.mae) << '\n';
    n_total += f.test_rows.size();
    for (std::size_t k = 0; k < f.test_rows.size(); ++k) {
      const auto row = f.test_rows[k];
      const double y = d.y[row], p = f.predictions[static_cast<Eigen::Index>(k)];
      pred_csv << frame_of[static_cast<std::size_t>(row)] << ',' << f.subject << ',' << num(y) << ',' << num(p) << ','
               << num(std::abs(p - y)) << '\n';
    }
    if (cfg.learn.use_rfe) write_rfe_csv(rfe_csv, f.subject, f.report.rfe, d.schema);
    const auto& sel = f.report.selection;
    for (std::size_t r = 0; r < sel.ranking.size(); ++r) {
      const std::size_t idx = sel.ranking[r];
      ens_csv << f.subject << ',' << r + 1 << ',' << idx << ',' << derive_seed(derive_seed(cfg.seed, f.subject), idx + 1000)
              << ',' << num(f.report.pool_val_mae[idx]) << ',' << (r < sel.selected.size()) << '\n';
    }
    write_model(dir / "models" / (f.subject + ".json"), f.model);
    folds.push_back({{"subject", f.subject},
                     {"n_test", f.test_rows.size()},
                     {"mae", f.mae},
                     {"n_selected_features", f.model.selected.size()},
                     {"ensemble_size", f.model.ensemble.members.size()},
                     {"initial_val_mae", f.model.ensemble.initial_val_mae},
                     {"val_mae", f.model.ensemble.val_mae},
                     {"selection", selection_json(f.report.selection)}});
  }
  mae_csv << "mean," << n_total << ',' << num(res.mean_mae) << '\n';
  write_json(dir / "report.json", {{"mean_mae", res.mean_mae},
                                   {"folds", folds},
                                   {"excluded", res.excluded},
                                   {"schema_hash", d.schema.hash()},
                                   {"seed", cfg.seed}});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out << "leave-one-subject-out mean MAE " << res.mean_mae << " deg over " << res.folds.size() << " subjects ("
      << secs << " s)\n";
  return kOk;
}

int cmd_infer(const Common& c, const std::string& model_path, const Inputs& in, std::ostream& out) {
  const RunConfig cfg = resolve(c);
  const HeadYawModel model = read_model(model_path);
  auto o = open_out(fs::path(c.out_dir) / "yaw.csv");
  o << "session,frame,subject,t,body_yaw,head_yaw,head_yaw_abs\n";
  std::size_t n = 0;
  for (const auto& path : in.sessions) {
    const SessionRecording s = load_session(path, out);
    const SessionFeatures sf = process_session(s, cfg.preprocess, c.workers);
    const Eigen::VectorXd yaw = sf.table.values.rows() > 0 ? model.predict(sf.table.values, sf.table.schema)
                                                            : Eigen::VectorXd();
    Eigen::Index k = 0;
    for (const auto& r : sf.records) {
      o << path.stem().string() << ',' << r.frame << ',' << r.subject << ',' << num(r.t) << ','
        << (r.body_yaw ? num(*r.body_yaw) : "NA") << ',';
      if (r.in_table) {
        const double h = yaw[k++];
        o << num(h) << ',' << num(normalize_deg(*r.body_yaw + h)) << '\n';
        ++n;
      } else {
        o << "NA,NA\n";
      }
    }
  }
  out << n << " head yaw estimates written\n";
  return kOk;
}

// ---------------------------------------------------------------- analyze

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<YawSample> read_yaw_csv(const fs::path& path, const std::string& subject) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  auto col = [&](const std::string& name) -> int {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int ct = col("t");
  int cy = col("head_yaw");
  if (cy < 0) cy = col("yaw");
  const int cs = col("subject");
  if (ct < 0 || cy < 0) throw DataError(path.string() + ": needs 't' and 'head_yaw' columns");
  std::vector<YawSample> out;
  std::set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw DataError(path.string() + ":" + std::to_string(line_no) + ": column count");
    if (cs >= 0) {
      if (!subject.empty() && cells[static_cast<std::size_t>(cs)] != subject) continue;
      seen.insert(cells[static_cast<std::size_t>(cs)]);
    }
    const std::string& ys = cells[static_cast<std::size_t>(cy)];
    if (ys == "NA") continue;
    try {
      out.push_back({std::stod(cells[static_cast<std::size_t>(ct)]), std::stod(ys)});
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  if (seen.size() > 1) throw DataError(path.string() + ": several subjects, choose one with --subject");
  if (out.empty()) throw DataError(path.string() + ": no yaw samples");
  return out;
}

ReferenceAngles read_refs(const fs::path& path) {
  const json j = read_json(path);
  try {
    if (j.contains("interviewer1") && j["interviewer1"].is_number()) {
      ReferenceAngles r;
      r.interviewer1 = j["interviewer1"].get<double>();
      r.interviewer2 = j.at("interviewer2").get<double>();
      const double both[] = {r.interviewer1, r.interviewer2};
      r.midpoint = circular_mean_deg(both);
      return r;
    }
    const auto& p = j.at("positions");
    auto pt = [&](const char* k) {
      const auto v = p.at(k).get<std::vector<double>>();
      if (v.size() != 2) throw DataError(std::string("refs: position '") + k + "' needs [x, y]");
      return Point2(v[0], v[1]);
    };
    return reference_angles(pt("subject"), pt("interviewer1"), pt("interviewer2"), j.at("subject_zero").get<double>());
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

struct SessionSpec {
  std::string id;
  std::string group;
  fs::path yaw, refs, roles;
  std::string subject;
};

struct SessionResult {
  SessionSpec spec;
  RegionSequence seq;
  SessionBehavior behavior;
};

json events_json(const SessionResult& r) {
  json contacts = json::array(), exclusions = json::array();
  for (const auto& e : r.behavior.contacts.events)
    contacts.push_back({{"target", region_name(e.target)},
                        {"begin", e.begin},
                        {"end", e.end},
                        {"start_time", e.start_time},
                        {"duration", e.duration}});
  for (const auto& e : r.behavior.exclusions.events)
    exclusions.push_back({{"excluded", region_name(e.excluded)},
                          {"begin", e.begin},
                          {"end", e.end},
                          {"start_time", e.start_time},
                          {"duration", e.duration}});
  json j = {{"id", r.spec.id},
            {"group", r.spec.group},
            {"frames", r.seq.size()},
            {"duration", r.seq.session_duration()},
            {"contact_count", r.behavior.contacts.events.size()},
            {"exclusion_count", r.behavior.exclusions.events.size()},
            {"contacts", contacts},
            {"exclusions", exclusions}};
  if (r.behavior.roles) j["role_excluded_frames"] = r.behavior.roles->excluded_frames;
  return j;
}

int cmd_analyze(const Common& c, const std::string& manifest, const std::string& yaw, const std::string& refs,
                const std::string& roles, const std::string& subject, std::ostream& out) {
  const RunConfig cfg = resolve(c);
  const auto& bc = cfg.behavior;
  std::vector<SessionSpec> specs;
  if (!manifest.empty()) {
    if (!yaw.empty() || !refs.empty()) throw CLI::ValidationError("analyze", "--manifest excludes --yaw/--refs");
    const json m = read_json(manifest);
    const fs::path base = fs::path(manifest).parent_path();
    try {
      for (const auto& s : m.at("sessions")) {
        SessionSpec sp;
        sp.id = s.at("id").get<std::string>();
        sp.group = s.value("group", std::string());
        sp.yaw = base / s.at("yaw").get<std::string>();
        sp.refs = base / s.at("refs").get<std::string>();
        if (s.contains("roles")) sp.roles = base / s["roles"].get<std::string>();
        sp.subject = s.value("subject", std::string());
        specs.push_back(sp);
      }
    } catch (const json::exception& e) {
      throw DataError(std::string("manifest: ") + e.what());
    }
    if (specs.empty()) throw DataError("manifest lists no sessions");
  } else {
    if (yaw.empty() || refs.empty()) throw CLI::ValidationError("analyze", "needs --manifest or both --yaw and --refs");
    specs.push_back({"session", "", yaw, refs, roles, subject});
  }

  std::vector<SessionResult> results(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    SessionResult& r = results[i];
    r.spec = specs[i];
    r.seq = classify_frames(read_yaw_csv(r.spec.yaw, r.spec.subject), read_refs(r.spec.refs), bc.half_width);
    r.behavior.contacts = detect_contacts(r.seq, static_cast<std::size_t>(bc.contact_min_frames));
    r.behavior.exclusions = detect_exclusions(r.seq, static_cast<std::size_t>(bc.exclusion_window),
                                              static_cast<std::size_t>(bc.exclusion_quorum));
    if (!r.spec.roles.empty()) r.behavior.roles = role_distribution(r.seq, read_roles(r.spec.roles));
  }

  const fs::path dir(c.out_dir);
  {
    auto o = open_out(dir / "behavior.csv");
    o << "session,group";
    for (const char* s : kBehaviorStatistics) o << ",\"" << s << '"';
    o << '\n';
    for (const auto& r : results) {
      o << r.spec.id << ',' << r.spec.group;
      for (double v : behavior_values(r.behavior)) o << ',' << num(v);
      o << '\n';
    }
  }
  const bool all_roles = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.behavior.roles.has_value(); });
  if (std::any_of(results.begin(), results.end(), [](const auto& r) { return r.behavior.roles.has_value(); })) {
    auto o = open_out(dir / "roles.csv");
    o << "session,group";
    for (const char* s : kRoleStatistics) o << ",\"" << s << '"';
    o << ",excluded_frames\n";
    for (const auto& r : results) {
      if (!r.behavior.roles) continue;
      o << r.spec.id << ',' << r.spec.group;
      for (double v : role_values(*r.behavior.roles)) o << ',' << num(v);
      o << ',' << r.behavior.roles->excluded_frames << '\n';
    }
  }
  json events = json::array();
  for (const auto& r : results) events.push_back(events_json(r));
  write_json(dir / "events.json", {{"sessions", events}});

  // Group comparison when exactly two groups are present.
  std::vector<std::string> groups;
  for (const auto& r : results)
    if (std::find(groups.begin(), groups.end(), r.spec.group) == groups.end()) groups.push_back(r.spec.group);
  std::sort(groups.begin(), groups.end());
  json comparisons = json::array();
  if (groups.size() == 2) {
    auto o = open_out(dir / "groups.csv");
    o << "statistic,group1,group2,n1,n2,mean1,mean2,t,df,p,cohens_d,status\n";
    auto compare = [&](const std::string& name, auto&& values_of) {
      std::vector<double> a, b;
      for (const auto& r : results) (r.spec.group == groups[0] ? a : b).push_back(values_of(r));
      json row = {{"statistic", name}, {"group1", groups[0]}, {"group2", groups[1]}};
      o << '"' << name << "\"," << groups[0] << ',' << groups[1] << ',' << a.size() << ',' << b.size() << ',';
      try {
        const GroupStats g = compare_groups(a, b, bc.alternative);
        o << num(g.mean1) << ',' << num(g.mean2) << ',' << num(g.t_statistic) << ',' << num(g.df) << ','
          << num(g.p_value) << ',' << num(g.cohens_d) << ",ok\n";
        row.update({{"mean1", g.mean1}, {"mean2", g.mean2}, {"t", g.t_statistic}, {"df", g.df},
                    {"p", g.p_value}, {"cohens_d", g.cohens_d}, {"status", "ok"}});
      } catch (const std::runtime_error& e) {
        o << "NA,NA,NA,NA,NA,NA,\"" << e.what() << "\"\n";
        row["status"] = e.what();
      }
      comparisons.push_back(row);
    };
    for (std::size_t k = 0; k < kBehaviorStatistics.size(); ++k)
      compare(kBehaviorStatistics[k], [k](const SessionResult& r) { return behavior_values(r.behavior)[k]; });
    if (all_roles)
      for (std::size_t k = 0; k < kRoleStatistics.size(); ++k)
        compare(kRoleStatistics[k], [k](const SessionResult& r) { return role_values(*r.behavior.roles)[k]; });
  }
  write_json(dir / "analysis.json", {{"sessions", results.size()},
                                     {"groups", groups},
                                     {"alternative", alternative_name(bc.alternative)},
                                     {"comparisons", comparisons}});
  std::size_t contacts = 0, exclusions = 0;
  for (const auto& r : results) {
    contacts += r.behavior.contacts.events.size();
    exclusions += r.behavior.exclusions.events.size();
  }
  out << results.size() << " sessions: " << contacts << " contacts, " << exclusions << " exclusions\n";
  return kOk;
}

// ---------------------------------------------------------------- report

int cmd_report(const Common& c, const std::string& in_dir, std::ostream& out) {
  resolve(c);
  const fs::path src(in_dir), dir(c.out_dir);
  json summary = json::object();
  bool any = false;
  if (fs::exists(src / "report.json")) {
    any = true;
    const json rep = read_json(src / "report.json");
    auto table = open_out(dir / "mae_table.csv");
    table << "subject,mae\n";
    for (const auto& f : rep.at("folds")) table << f.at("subject").get<std::string>() << ',' << num(f.at("mae").get<double>()) << '\n';
    table << "mean," << num(rep.at("mean_mae").get<double>()) << '\n';
    summary["head_yaw"] = {{"mean_mae", rep.at("mean_mae")}, {"subjects", rep.at("folds").size()}};

    // MAE against feature count, averaged over folds.
    if (fs::exists(src / "rfe_trace.csv")) {
      std::ifstream in(src / "rfe_trace.csv", std::ios::binary);
      std::string line;
      std::getline(in, line);
      std::map<int, std::vector<double>> by_n;
      while (std::getline(in, line)) {
        const auto cells = split_csv(line);
        if (cells.size() < 3) continue;
        by_n[std::stoi(cells[1])].push_back(std::stod(cells[2]));
      }
      auto curve = open_out(dir / "rfe_curve.csv");
      curve << "n_features,mean_val_mae,min_val_mae,max_val_mae,folds\n";
      int best_n = 0;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [n, v] : by_n) {
        double s = 0.0;
        for (double x : v) s += x;
        const double m = s / static_cast<double>(v.size());
        if (m < best) best = m, best_n = n;
        curve << n << ',' << num(m) << ',' << num(*std::min_element(v.begin(), v.end())) << ','
              << num(*std::max_element(v.begin(), v.end())) << ',' << v.size() << '\n';
      }
      if (!by_n.empty()) {
        summary["rfe_curve"] = {{"full_features", by_n.rbegin()->first},
                                {"full_mae", [&] {
                                   double s = 0.0;
                                   for (double x : by_n.rbegin()->second) s += x;
                                   return s / static_cast<double>(by_n.rbegin()->second.size());
                                 }()},
                                {"best_features", best_n},
                                {"best_mae", best}};
      }
    }
  }
  if (fs::exists(src / "analysis.json")) {
    any = true;
    summary["behavior"] = read_json(src / "analysis.json");
  }
  if (fs::exists(src / "body_summary.json")) {
    any = true;
    summary["body_yaw"] = read_json(src / "body_summary.json");
  }
  if (!any) throw DataError("nothing to report in " + src.string() + " (expected evaluate, analyze or fit-body outputs)");
  write_json(dir / "summary.json", summary);
  out << "report written to " << dir.string() << '\n';
  return kOk;
}

void emit_error(std::ostream& err, const char* kind, int code, const std::string& message) {
  err << json{{"error", kind}, {"code", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Head and body yaw estimation from overhead point clouds, and attention analytics", "orient"};
  app.require_subcommand(1);

  Common common;
  std::vector<std::string> sessions;
  std::string bench_dir, labels, features, model, manifest, yaw, refs, roles, subject, script, in_dir;
  bool benchmark = false, conversation = false, clouds = false;
  int setup = 0, noise_features = 0;
  std::optional<int> subjects;

  auto session_inputs = [&](CLI::App* sub) {
    sub->add_option("--session", sessions, "session files (JSON lines)");
    sub->add_option("--bench-dir", bench_dir, "directory of session files, with labels.csv");
    sub->add_option("--labels", labels, "label CSV (frame,subject,head_yaw,body_yaw)");
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark or scripted conversation");
  add_common(synth, common);
  synth->add_flag("--benchmark", benchmark, "labelled multi-subject benchmark");
  synth->add_flag("--conversation", conversation, "scripted conversation");
  synth->add_option("--script", script, "conversation script (JSON array of steps)");
  synth->add_option("--setup", setup, "interviewer separation: 90 or 45");
  synth->add_flag("--clouds", clouds, "also emit point clouds for the conversation");
  synth->add_option("--subjects", subjects, "benchmark subject count");

  auto* pre = app.add_subcommand("preprocess", "crop, denoise, split and validate every subject frame");
  add_common(pre, common);
  session_inputs(pre);

  auto* body = app.add_subcommand("fit-body", "estimate body yaw per subject frame");
  add_common(body, common);
  session_inputs(body);

  auto* extract = app.add_subcommand("extract-features", "write the feature table");
  add_common(extract, common);
  session_inputs(extract);

  auto* rfe = app.add_subcommand("rfe", "random-forest recursive feature elimination trace");
  add_common(rfe, common);
  session_inputs(rfe);
  rfe->add_option("--features", features, "feature CSV");
  rfe->add_option("--noise-features", noise_features, "append this many pure-noise columns")->check(CLI::NonNegativeNumber);

  auto* train = app.add_subcommand("train", "train a head-yaw model bundle");
  add_common(train, common);
  session_inputs(train);
  train->add_option("--features", features, "feature CSV");

  auto* evaluate = app.add_subcommand("evaluate", "leave-one-subject-out evaluation");
  add_common(evaluate, common);
  session_inputs(evaluate);
  evaluate->add_option("--features", features, "feature CSV");

  auto* infer = app.add_subcommand("infer", "head yaw for new sessions");
  add_common(infer, common);
  infer->add_option("--model", model, "model bundle")->required();
  infer->add_option("--session", sessions, "session files")->required();

  auto* analyze = app.add_subcommand("analyze", "contact, exclusion and role statistics");
  add_common(analyze, common);
  analyze->add_option("--manifest", manifest, "JSON list of sessions with groups");
  analyze->add_option("--yaw", yaw, "yaw CSV (t, head_yaw)");
  analyze->add_option("--refs", refs, "reference angles JSON");
  analyze->add_option("--roles", roles, "role annotations (JSON lines)");
  analyze->add_option("--subject", subject, "subject id when the yaw CSV holds several");

  auto* report = app.add_subcommand("report", "summaries and plot-ready tables");
  add_common(report, common);
  report->add_option("--in-dir", in_dir, "directory written by evaluate, analyze or fit-body")->required();

  std::vector<std::string> argv_store;
  argv_store.emplace_back("orient");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "usage", kUsage, e.what());
    return kUsage;
  }

  try {
    auto needs_sessions = [&]() {
      if (!features.empty()) return std::optional<Inputs>{};
      return std::optional<Inputs>{gather(sessions, bench_dir, labels)};
    };
    if (synth->parsed())
      return cmd_synth(common, benchmark, conversation, script, setup, clouds, subjects, out);
    if (pre->parsed()) return cmd_preprocess(common, gather(sessions, bench_dir, labels), out);
    if (body->parsed()) return cmd_fit_body(common, gather(sessions, bench_dir, labels), out);
    if (extract->parsed()) return cmd_extract(common, gather(sessions, bench_dir, labels), out);
    if (rfe->parsed()) {
      const auto in = needs_sessions();
      return cmd_rfe(common, features, in ? &*in : nullptr, noise_features, out);
    }
    if (train->parsed()) {
      const auto in = needs_sessions();
      return cmd_train(common, features, in ? &*in : nullptr, out);
    }
    if (evaluate->parsed()) {
      const auto in = needs_sessions();
      return cmd_evaluate(common, features, in ? &*in : nullptr, out);
    }
    if (infer->parsed()) return cmd_infer(common, model, gather(sessions, "", ""), out);
    if (analyze->parsed()) return cmd_analyze(common, manifest, yaw, refs, roles, subject, out);
    if (report->parsed()) return cmd_report(common, in_dir, out);
  } catch (const CLI::ValidationError& e) {
    emit_error(err, "usage", kUsage, e.what());
    return kUsage;
  } catch (const NumericalError& e) {
    emit_error(err, "numerical", kNumericalError, e.what());
    return kNumericalError;
  } catch (const DataError& e) {
    emit_error(err, "data", kDataError, e.what());
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    emit_error(err, "data", kDataError, e.what());
    return kDataError;
  } catch (const std::exception& e) {
    emit_error(err, "data", kDataError, e.what());
    return kDataError;
  }
  return kUsage;
}

}  // namespace orient::cli
