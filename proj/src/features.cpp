#include "orient/features.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <limits>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "orient/error.hpp"

namespace orient {

const char* family_name(FeatureFamily f) {
  switch (f) {
    case FeatureFamily::kSensorCentroid: return "sensor_centroid";
    case FeatureFamily::kHeadStats: return "head_stats";
    case FeatureFamily::kHeadPca: return "head_pca";
    case FeatureFamily::kQuadrantStats: return "quadrant_stats";
    case FeatureFamily::kQuadrantPca: return "quadrant_pca";
    case FeatureFamily::kNose: return "nose";
    case FeatureFamily::kHeadEllipse: return "head_ellipse";
    case FeatureFamily::kAuxiliary: return "auxiliary";
  }
  return "unknown";
}

FeatureFamily family_from_name(const std::string& s) {
  for (auto f : {FeatureFamily::kSensorCentroid, FeatureFamily::kHeadStats, FeatureFamily::kHeadPca,
                 FeatureFamily::kQuadrantStats, FeatureFamily::kQuadrantPca, FeatureFamily::kNose,
                 FeatureFamily::kHeadEllipse, FeatureFamily::kAuxiliary})
    if (s == family_name(f)) return f;
  throw DataError("unknown feature family '" + s + "'");
}

namespace {

FeatureSchema build_default_schema() {
  std::vector<FeatureEntry> e;
  const char* axes[] = {"x", "y", "z"};
  e.push_back({"centroid_x", FeatureFamily::kSensorCentroid});
  e.push_back({"centroid_y", FeatureFamily::kSensorCentroid});
  for (const char* stat : {"mean", "std", "min", "max"})
    for (const char* a : axes) e.push_back({std::string("head_") + stat + "_" + a, FeatureFamily::kHeadStats});
  for (int i = 1; i <= 3; ++i) e.push_back({"head_pca_eval" + std::to_string(i), FeatureFamily::kHeadPca});
  for (int v = 1; v <= 2; ++v)
    for (const char* a : axes) e.push_back({"head_pca_v" + std::to_string(v) + "_" + a, FeatureFamily::kHeadPca});
  for (int q = 1; q <= 4; ++q)
    for (const char* stat : {"mean", "std"})
      for (const char* a : axes)
        e.push_back({"q" + std::to_string(q) + "_" + stat + "_" + a, FeatureFamily::kQuadrantStats});
  for (int q = 1; q <= 4; ++q) {
    const std::string p = "q" + std::to_string(q) + "_";
    e.push_back({p + "pca_eval1", FeatureFamily::kQuadrantPca});
    e.push_back({p + "pca_eval2", FeatureFamily::kQuadrantPca});
    e.push_back({p + "pca_v1_x", FeatureFamily::kQuadrantPca});
    e.push_back({p + "pca_v1_y", FeatureFamily::kQuadrantPca});
    e.push_back({p + "frac", FeatureFamily::kQuadrantPca});
  }
  e.push_back({"nose_x", FeatureFamily::kNose});
  e.push_back({"nose_y", FeatureFamily::kNose});
  e.push_back({"nose_bearing", FeatureFamily::kNose});
  e.push_back({"head_ell_major", FeatureFamily::kHeadEllipse});
  e.push_back({"head_ell_minor", FeatureFamily::kHeadEllipse});
  e.push_back({"head_ell_orient", FeatureFamily::kHeadEllipse});
  e.push_back({"head_ell_dx", FeatureFamily::kHeadEllipse});
  e.push_back({"head_ell_dy", FeatureFamily::kHeadEllipse});
  return FeatureSchema("v1", std::move(e));
}

}  // namespace

FeatureSchema::FeatureSchema(std::string version, std::vector<FeatureEntry> entries)
    : version_(std::move(version)), entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    for (std::size_t j = i + 1; j < entries_.size(); ++j)
      if (entries_[i].name == entries_[j].name) throw DataError("duplicate feature name '" + entries_[i].name + "'");
}

const FeatureSchema& FeatureSchema::default_schema() {
  static const FeatureSchema schema = build_default_schema();
  return schema;
}

std::vector<std::string> FeatureSchema::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

std::optional<std::size_t> FeatureSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].name == name) return i;
  return std::nullopt;
}

std::string FeatureSchema::hash() const {
  // FNV-1a over the version and the ordered names.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  mix(version_);
  for (const auto& e : entries_) mix(e.name);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FeatureSchema FeatureSchema::extended(const std::string& version, const std::vector<FeatureEntry>& extra) const {
  auto e = entries_;
  e.insert(e.end(), extra.begin(), extra.end());
  return FeatureSchema(version, std::move(e));
}

double angular_spread_deg(const std::vector<double>& bearings_deg) {
  if (bearings_deg.size() < 2) return 0.0;
  std::vector<double> a;
  a.reserve(bearings_deg.size());
  for (double b : bearings_deg) a.push_back(normalize_deg(b) + 180.0);  // [0, 360)
  std::sort(a.begin(), a.end());
  double max_gap = a.front() + 360.0 - a.back();
  for (std::size_t i = 1; i < a.size(); ++i) max_gap = std::max(max_gap, a[i] - a[i - 1]);
  return 360.0 - max_gap;
}

NoseEstimate estimate_nose(const Cloud2& head_xy, const Point2& head_center) {
  NoseEstimate out;
  const Eigen::Index n = head_xy.cols();
  if (n == 0) throw DataError("nose estimate of empty head cloud");
  const Eigen::VectorXd dist = (head_xy.colwise() - head_center).colwise().norm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return dist[a] > dist[b]; });
  const std::size_t take = std::min<std::size_t>(10, order.size());
  out.too_few_points = order.size() < 10;
  order.resize(take);
  out.position = head_xy(Eigen::all, order).rowwise().mean();
  std::vector<double> bearings;
  for (Eigen::Index i : order) {
    const Point2 d = head_xy.col(i) - head_center;
    if (d.norm() > 0) bearings.push_back(std::atan2(d.y(), d.x()) * kDegPerRad);
  }
  out.uninformative = angular_spread_deg(bearings) > 120.0;
  return out;
}

Cloud to_subject_frame(const Cloud& pts, const Point2& origin, double facing_deg, double z_ref) {
  const double r = facing_deg * kRadPerDeg;
  const double c = std::cos(r), s = std::sin(r);
  Eigen::Matrix3d rot;
  rot << c, s, 0, -s, c, 0, 0, 0, 1;
  const Eigen::Vector3d o(origin.x(), origin.y(), z_ref);
  return rot * (pts.colwise() - o);
}

namespace {

struct Writer {
  Eigen::VectorXd& v;
  Eigen::Index i = 0;
  void put(double x) { v[i++] = std::isfinite(x) ? x : 0.0; }
};

void axis_stats(Writer& w, const Cloud& p, bool with_extrema) {
  const Eigen::Index n = p.cols();
  Eigen::Vector3d mean = Eigen::Vector3d::Zero(), sd = Eigen::Vector3d::Zero();
  Eigen::Vector3d mn = Eigen::Vector3d::Zero(), mx = Eigen::Vector3d::Zero();
  if (n > 0) {
    mean = p.rowwise().mean();
    sd = ((p.colwise() - mean).array().square().rowwise().sum() / static_cast<double>(n)).sqrt();
    mn = p.rowwise().minCoeff();
    mx = p.rowwise().maxCoeff();
  }
  for (int a = 0; a < 3; ++a) w.put(mean[a]);
  for (int a = 0; a < 3; ++a) w.put(sd[a]);
  if (with_extrema) {
    for (int a = 0; a < 3; ++a) w.put(mn[a]);
    for (int a = 0; a < 3; ++a) w.put(mx[a]);
  }
}

}  // namespace

Eigen::VectorXd extract_features(const FeatureInputs& in) {
  const FeatureSchema& schema = FeatureSchema::default_schema();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(schema.dimension()));
  Writer w{v};
  const Point2 origin = in.body_ellipse.center;
  const Cloud local = to_subject_frame(in.pc_head, origin, in.facing_deg, in.z_head);
  const double n_head = static_cast<double>(local.cols());

  w.put(in.sensor_centroid.x());
  w.put(in.sensor_centroid.y());

  axis_stats(w, local, true);

  if (local.cols() >= 4) {
    const Pca3 p = pca3(local);
    for (int i = 0; i < 3; ++i) w.put(p.eigenvalues[i]);
    for (int c = 0; c < 2; ++c)
      for (int a = 0; a < 3; ++a) w.put(p.eigenvectors(a, c));
  } else {
    w.i += 9;
  }

  for (int q = 0; q < 4; ++q) {
    const Cloud qp = local(Eigen::all, in.quadrants.indices[static_cast<std::size_t>(q)]);
    axis_stats(w, qp, false);
  }

  for (int q = 0; q < 4; ++q) {
    const auto& idx = in.quadrants.indices[static_cast<std::size_t>(q)];
    if (idx.size() >= 3) {
      const Cloud2 qp = local(Eigen::seqN(0, 2), idx);
      const Pca2 p = pca2(qp);
      w.put(p.eigenvalues[0]);
      w.put(p.eigenvalues[1]);
      w.put(p.eigenvectors(0, 0));
      w.put(p.eigenvectors(1, 0));
    } else {
      w.i += 4;
    }
    w.put(n_head > 0 ? static_cast<double>(idx.size()) / n_head : 0.0);
  }

  // Nose: bearing measured from the head centre, relative to the facing direction.
  const Cloud2 head_xy = project_xy(in.pc_head);
  const NoseEstimate nose = estimate_nose(head_xy, in.head_center);
  Cloud nose3(3, 1);
  nose3 << nose.position.x(), nose.position.y(), in.z_head;
  const Cloud nose_local = to_subject_frame(nose3, origin, in.facing_deg, in.z_head);
  w.put(nose_local(0, 0));
  w.put(nose_local(1, 0));
  const Point2 nd = nose.position - in.head_center;
  w.put(nd.norm() > 0 ? angle_diff_deg(std::atan2(nd.y(), nd.x()) * kDegPerRad, in.facing_deg) : 0.0);

  if (in.head_ellipse) {
    const EllipseFit& he = *in.head_ellipse;
    w.put(he.semi_major);
    w.put(he.semi_minor);
    w.put(normalize_half_deg(he.orientation_deg - in.facing_deg));
    Cloud c3(3, 1);
    c3 << he.center.x(), he.center.y(), in.z_head;
    const Cloud cl = to_subject_frame(c3, origin, in.facing_deg, in.z_head);
    w.put(cl(0, 0));
    w.put(cl(1, 0));
  } else {
    w.i += 5;
  }
  if (w.i != v.size()) throw std::logic_error("feature writer out of step with schema");
  return v;
}

Eigen::VectorXd extract_features(const SubjectObservation& obs) {
  if (!obs.usable()) throw DataError("cannot extract features from an unusable frame: " + obs.error);
  const FeatureInputs in{obs.pc_head,
                         obs.quadrants,
                         obs.body->ellipse,
                         obs.body->yaw_deg,
                         obs.head_ellipse ? &*obs.head_ellipse : nullptr,
                         obs.head.head_center,
                         obs.head.z_head,
                         obs.detection.centroid()};
  return extract_features(in);
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "NA" || s == "nan" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw DataError("bad number '" + s + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::filesystem::path sidecar(const std::filesystem::path& p) { return std::filesystem::path(p.string() + ".schema.json"); }

}  // namespace

void write_feature_csv(const std::filesystem::path& path, const FeatureTable& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "frame,subject,label";
  for (const auto& e : t.schema.entries()) out << ',' << e.name;
  out << '\n';
  for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
    out << t.frame_ids[static_cast<std::size_t>(r)] << ',' << t.subject_ids[static_cast<std::size_t>(r)] << ','
        << fmt(t.labels[r]);
    for (Eigen::Index c = 0; c < t.values.cols(); ++c) out << ',' << fmt(t.values(r, c));
    out << '\n';
  }
  nlohmann::json j;
  j["version"] = t.schema.version();
  j["hash"] = t.schema.hash();
  j["features"] = nlohmann::json::array();
  for (const auto& e : t.schema.entries()) j["features"].push_back({{"name", e.name}, {"family", family_name(e.family)}});
  std::ofstream side(sidecar(path), std::ios::binary);
  side << j.dump(2) << '\n';
}

FeatureTable read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty feature file " + path.string());
  const auto header = split_csv(line);
  if (header.size() < 4 || header[0] != "frame" || header[1] != "subject" || header[2] != "label")
    throw DataError("feature file header must start with frame,subject,label");
  const std::vector<std::string> names(header.begin() + 3, header.end());

  FeatureTable t;
  std::ifstream side(sidecar(path), std::ios::binary);
  if (side) {
    const auto j = nlohmann::json::parse(side);
    std::vector<FeatureEntry> entries;
    for (const auto& f : j.at("features"))
      entries.push_back({f.at("name").get<std::string>(), family_from_name(f.at("family").get<std::string>())});
    t.schema = FeatureSchema(j.at("version").get<std::string>(), std::move(entries));
    if (t.schema.hash() != j.at("hash").get<std::string>()) throw DataError("schema sidecar hash mismatch");
  } else if (names == FeatureSchema::default_schema().names()) {
    t.schema = FeatureSchema::default_schema();
  } else {
    throw DataError("feature file has no schema sidecar and a non-default header");
  }
  if (t.schema.names() != names) throw DataError("feature header does not match schema sidecar");

  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": wrong number of columns");
    t.frame_ids.push_back(cells[0]);
    t.subject_ids.push_back(cells[1]);
    labels.push_back(parse_double(cells[2]));
    std::vector<double> r;
    r.reserve(names.size());
    for (std::size_t c = 3; c < cells.size(); ++c) {
      const double v = parse_double(cells[c]);
      if (!std::isfinite(v))
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-finite feature value");
      r.push_back(v);
    }
    rows.push_back(std::move(r));
  }
  t.labels = Eigen::Map<Eigen::VectorXd>(labels.data(), static_cast<Eigen::Index>(labels.size()));
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < names.size(); ++c)
      t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return t;
}

}  // namespace orient
