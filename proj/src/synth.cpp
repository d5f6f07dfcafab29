#include "orient/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "orient/error.hpp"
#include "orient/kdtree.hpp"
#include "orient/rng.hpp"

namespace orient {

namespace {

constexpr double kPi = std::numbers::pi;

// Sample densities in points per mm^2 of surface.
constexpr double kTorsoDensity = 0.006;
constexpr double kHeadDensity = 0.0105;  // on upward-facing surface, see kHeadSideWeight
constexpr double kHeadSideWeight = 0.15;
constexpr double kNoseDensity = 0.02;
constexpr double kNeckDensity = 0.004;
constexpr double kArmDensity = 0.005;

struct Sample {
  Eigen::Vector3d p;
  Eigen::Vector3d n;  // outward unit normal
  Part part;
};

class Sampler {
 public:
  Sampler(Rng& rng, double density_scale) : rng_(rng), scale_(density_scale) {}

  std::size_t count(double area, double density) const {
    return static_cast<std::size_t>(std::llround(area * density * scale_));
  }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

  // Axis-aligned ellipsoid in a local frame (forward, left, up) rotated by
  // `yaw` about z; area-uniform by rejection on the area element.
  void ellipsoid(std::vector<Sample>& out, const Eigen::Vector3d& c, double rx, double ry, double rz, double yaw,
                 double density, Part part, const std::function<bool(const Eigen::Vector3d&)>& keep_local,
                 double side_weight = 1.0) {
    const double p = 1.6075;
    const double area = 4 * kPi *
                        std::pow((std::pow(rx * ry, p) + std::pow(rx * rz, p) + std::pow(ry * rz, p)) / 3.0, 1.0 / p);
    const std::size_t n = count(area, density);
    const double wmax = std::max({ry * rz, rx * rz, rx * ry});
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    std::normal_distribution<double> g(0.0, 1.0);
    std::size_t made = 0;
    while (made < n) {
      Eigen::Vector3d u(g(rng_), g(rng_), g(rng_));
      const double len = u.norm();
      if (len < 1e-12) continue;
      u /= len;
      const double w = std::sqrt(std::pow(ry * rz * u.x(), 2) + std::pow(rx * rz * u.y(), 2) +
                                 std::pow(rx * ry * u.z(), 2));
      if (uniform(0.0, wmax) > w) continue;
      ++made;
      const Eigen::Vector3d local(rx * u.x(), ry * u.y(), rz * u.z());
      if (keep_local && !keep_local(local)) continue;
      Eigen::Vector3d nl(local.x() / (rx * rx), local.y() / (ry * ry), local.z() / (rz * rz));
      nl.normalize();
      // Thin out surfaces that do not face up.
      const double up = std::max(0.0, nl.z());
      if (side_weight < 1.0 && uniform(0.0, 1.0) > side_weight + (1.0 - side_weight) * up * up) continue;
      out.push_back({c + rotate(local, cy, sy), rotate(nl, cy, sy), part});
    }
  }

  // Vertical elliptic cylinder wall, half-axes a (forward) and b (left).
  void cylinder(std::vector<Sample>& out, const Eigen::Vector3d& base, double a, double b, double height,
                double yaw, double density, Part part) {
    const double perimeter = kPi * (3 * (a + b) - std::sqrt((3 * a + b) * (a + 3 * b)));
    const std::size_t n = count(perimeter * height, density);
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    const double wmax = std::max(a, b);
    std::size_t made = 0;
    while (made < n) {
      const double t = uniform(0.0, 2 * kPi);
      const double w = std::hypot(a * std::sin(t), b * std::cos(t));
      if (uniform(0.0, wmax) > w) continue;
      ++made;
      const Eigen::Vector3d local(a * std::cos(t), b * std::sin(t), uniform(0.0, height));
      const Eigen::Vector3d nl = Eigen::Vector3d(std::cos(t) / a, std::sin(t) / b, 0.0).normalized();
      out.push_back({base + rotate(local, cy, sy), rotate(nl, cy, sy), part});
    }
  }

  // Cylinder along an arbitrary segment.
  void tube(std::vector<Sample>& out, const Eigen::Vector3d& from, const Eigen::Vector3d& to, double r,
            double density, Part part) {
    const Eigen::Vector3d axis = to - from;
    const double len = axis.norm();
    const Eigen::Vector3d d = axis / len;
    const Eigen::Vector3d e1 = d.unitOrthogonal();
    const Eigen::Vector3d e2 = d.cross(e1);
    const std::size_t n = count(2 * kPi * r * len, density);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = uniform(0.0, 2 * kPi);
      const Eigen::Vector3d nrm = std::cos(t) * e1 + std::sin(t) * e2;
      out.push_back({from + uniform(0.0, len) * d + r * nrm, nrm, part});
    }
  }

  // Shoulder cap: z = top - drop * rho^2 over the ellipse (u/a)^2 + (v/b)^2 <= 1.
  void cap(std::vector<Sample>& out, const Eigen::Vector3d& center_top, double a, double b, double drop, double yaw,
           double density, Part part) {
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    // Slope grows towards the rim; bound the area element there.
    const double gmax = std::sqrt(1.0 + std::pow(2 * drop / std::min(a, b), 2));
    const std::size_t n = count(kPi * a * b * 0.5 * (1.0 + gmax), density);
    std::size_t made = 0;
    while (made < n) {
      const double u = uniform(-a, a), v = uniform(-b, b);
      const double rho2 = (u * u) / (a * a) + (v * v) / (b * b);
      if (rho2 > 1.0) continue;
      const double gx = 2 * drop * u / (a * a), gy = 2 * drop * v / (b * b);
      const double w = std::sqrt(1.0 + gx * gx + gy * gy);
      if (uniform(0.0, gmax) > w) continue;
      ++made;
      const Eigen::Vector3d local(u, v, -drop * rho2);
      const Eigen::Vector3d nl = Eigen::Vector3d(gx, gy, 1.0).normalized();
      out.push_back({center_top + rotate(local, cy, sy), rotate(nl, cy, sy), part});
    }
  }

 private:
  static Eigen::Vector3d rotate(const Eigen::Vector3d& v, double c, double s) {
    return {c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()};
  }

  Rng& rng_;
  double scale_;
};

}  // namespace

const char* arm_pose_name(ArmPose p) {
  switch (p) {
    case ArmPose::kDown: return "down";
    case ArmPose::kTable: return "table";
    case ArmPose::kChin: return "chin";
  }
  return "down";
}

void SubjectParams::validate() const {
  if (!(shoulder_half_width > chest_half_depth))
    throw DataError("synth: shoulder half-width must exceed chest half-depth");
  if (!(head_radius > 0 && head_radius < shoulder_half_width))
    throw DataError("synth: head radius must be positive and below the shoulder half-width");
  if (!(z_head > 600)) throw DataError("synth: z_head too low");
  if (!(noise_sigma >= 0)) throw DataError("synth: negative noise sigma");
  if (!(outlier_fraction >= 0 && outlier_fraction <= 0.5)) throw DataError("synth: outlier fraction outside [0, 0.5]");
  if (!(nose_length >= 0) || !(point_density > 0)) throw DataError("synth: invalid nose length or density");
}

std::vector<Extrinsics> default_sensors() {
  // Corners of a 3000 x 3500 mm room at 2700 mm, yawed towards the centre.
  auto make = [](std::string id, double x, double y, double yaw_deg) {
    Extrinsics e;
    e.sensor_id = std::move(id);
    e.rotation = Eigen::AngleAxisd(yaw_deg * kRadPerDeg, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    e.translation = {x, y, 2700.0};
    return e;
  };
  return {make("L1", 0.0, 0.0, 45.0), make("L2", 3000.0, 3500.0, -135.0)};
}

SyntheticFrame generate_subject_frame(const SubjectParams& sp, double timestamp) {
  sp.validate();
  Rng rng(sp.seed);
  Sampler s(rng, sp.point_density);

  const double by = sp.body_yaw * kRadPerDeg;
  const double hy = (sp.body_yaw + sp.head_offset) * kRadPerDeg;
  const Eigen::Vector3d fwd(std::cos(by), std::sin(by), 0.0);
  const Eigen::Vector3d hfwd(std::cos(hy), std::sin(hy), 0.0);
  const Eigen::Vector3d body(sp.position.x(), sp.position.y(), 0.0);

  const double rx = 1.08 * sp.head_radius;  // front-back
  const double ry = 0.92 * sp.head_radius;
  const double rz = 0.85 * sp.head_radius;
  const Eigen::Vector3d head = body + sp.head_forward * fwd + Eigen::Vector3d(0, 0, sp.z_head - rz);
  const double chin_z = sp.z_head - 2 * rz;
  const double shoulder_top = chin_z - 45.0;
  const double drop = 70.0;
  const double a = sp.chest_half_depth, b = sp.shoulder_half_width;

  std::vector<Sample> pts;
  pts.reserve(4096);
  s.ellipsoid(pts, head, rx, ry, rz, hy, kHeadDensity, Part::kHead, nullptr, kHeadSideWeight);

  // Nose: a small forward bump, keeping only the part outside the head.
  const double nl = std::max(sp.nose_length, 1e-3);
  const Eigen::Vector3d nose_c = head + (rx + 0.5 * nl - 6.0) * hfwd + Eigen::Vector3d(0, 0, -0.15 * rz);
  const double nose_fwd_offset = rx + 0.5 * nl - 6.0;
  if (sp.nose_length > 0) {
    s.ellipsoid(pts, nose_c, 0.5 * nl + 6.0, 13.0, 20.0, hy, kNoseDensity, Part::kNose,
                [&](const Eigen::Vector3d& local) {
                  const Eigen::Vector3d in_head(local.x() + nose_fwd_offset, local.y(), local.z() - 0.15 * rz);
                  const double q = std::pow(in_head.x() / rx, 2) + std::pow(in_head.y() / ry, 2) +
                                   std::pow(in_head.z() / rz, 2);
                  return q > 1.0;
                });
  }

  // Neck from the shoulders into the head.
  const Eigen::Vector3d neck_base = body + (sp.head_forward - 15.0) * fwd + Eigen::Vector3d(0, 0, shoulder_top - 20);
  s.cylinder(pts, neck_base, 52.0, 58.0, (head.z() - 0.4 * rz) - (shoulder_top - 20), by, kNeckDensity, Part::kNeck);

  // Torso: shoulder cap over an elliptic cylinder.
  s.cap(pts, Eigen::Vector3d(body.x(), body.y(), shoulder_top), a, b, drop, by, kTorsoDensity, Part::kTorso);
  const double torso_len = 300.0;
  s.cylinder(pts, Eigen::Vector3d(body.x(), body.y(), shoulder_top - drop - torso_len), a, b, torso_len, by,
             kTorsoDensity, Part::kTorso);

  // Arms.
  const Eigen::Vector3d left(-fwd.y(), fwd.x(), 0.0);
  const double arm_top = shoulder_top - drop + 5.0;
  for (int side : {1, -1}) {
    const Eigen::Vector3d shoulder = body + side * (b + 12.0) * left + Eigen::Vector3d(0, 0, arm_top);
    s.ellipsoid(pts, shoulder, 48.0, 48.0, 48.0, by, kArmDensity, Part::kArm,
                [](const Eigen::Vector3d& l) { return l.z() > 0; });
    Eigen::Vector3d elbow = shoulder + Eigen::Vector3d(0, 0, -290.0);
    if (sp.arms != ArmPose::kDown) elbow += 90.0 * fwd;
    s.tube(pts, shoulder, elbow, 45.0, kArmDensity, Part::kArm);
    if (sp.arms == ArmPose::kTable) {
      s.tube(pts, elbow, elbow + 280.0 * fwd - side * 80.0 * left + Eigen::Vector3d(0, 0, 40), 38.0, kArmDensity,
             Part::kArm);
    } else if (sp.arms == ArmPose::kChin && side < 0) {
      const Eigen::Vector3d hand =
          head + (rx - 10.0) * hfwd + Eigen::Vector3d(0, 0, -rz + 5.0) - 25.0 * left;
      s.tube(pts, elbow, hand, 36.0, kArmDensity, Part::kArm);
    } else {
      s.tube(pts, elbow, elbow + 250.0 * fwd + Eigen::Vector3d(0, 0, -60), 38.0, kArmDensity, Part::kArm);
    }
  }

  // Back-face culling against the ceiling sensors.
  const auto sensors = default_sensors();
  std::vector<Sample> visible;
  visible.reserve(pts.size());
  for (const auto& p : pts) {
    bool seen = !sp.visibility_culling;
    for (const auto& e : sensors) seen = seen || p.n.dot(e.translation - p.p) > 0.0;
    if (seen) visible.push_back(p);
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  Cloud inliers(3, static_cast<Eigen::Index>(visible.size()));
  for (std::size_t i = 0; i < visible.size(); ++i) {
    Eigen::Vector3d p = visible[i].p;
    if (sp.noise_sigma > 0) p += sp.noise_sigma * Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
    inliers.col(static_cast<Eigen::Index>(i)) = p;
  }

  // Outliers at least 200 mm from every surface sample, inside the region a
  // crop around the subject would keep.
  std::vector<Eigen::Vector3d> outliers;
  if (sp.outlier_fraction > 0 && inliers.cols() > 0) {
    const KdTree3 tree(inliers);
    const auto wanted = static_cast<std::size_t>(std::llround(sp.outlier_fraction * static_cast<double>(inliers.cols())));
    const double zlo = 0.73 * sp.z_head + 5.0, zhi = sp.z_head + 250.0;
    for (int attempt = 0; outliers.size() < wanted && attempt < 200000; ++attempt) {
      const double r = 490.0 * std::sqrt(s.uniform(0.0, 1.0));
      const double t = s.uniform(0.0, 2 * kPi);
      const Eigen::Vector3d q(body.x() + r * std::cos(t), body.y() + r * std::sin(t), s.uniform(zlo, zhi));
      if (tree.knn_sq_distances(q, 1)[0] >= 200.0 * 200.0) outliers.push_back(q);
    }
  }

  SyntheticFrame out;
  out.frame.timestamp = timestamp;
  out.frame.points.resize(3, inliers.cols() + static_cast<Eigen::Index>(outliers.size()));
  out.frame.points.leftCols(inliers.cols()) = inliers;
  for (std::size_t i = 0; i < visible.size(); ++i) out.parts.push_back(visible[i].part);
  for (std::size_t i = 0; i < outliers.size(); ++i) {
    out.frame.points.col(inliers.cols() + static_cast<Eigen::Index>(i)) = outliers[i];
    out.parts.push_back(Part::kOutlier);
  }

  SubjectDetection det;
  det.id = sp.id;
  det.cx = sp.position.x() + sp.xy_error.x();
  det.cy = sp.position.y() + sp.xy_error.y();
  det.z1 = sp.z_head + sp.z1_error;
  det.z2 = sp.z_head + sp.z2_error;
  out.frame.detections.push_back(det);

  out.truth.body_yaw = normalize_deg(sp.body_yaw);
  out.truth.head_offset = normalize_deg(sp.head_offset);
  out.truth.head_yaw = normalize_deg(sp.body_yaw + sp.head_offset);
  out.truth.body_center = sp.position;
  out.truth.head_center = head.head<2>();
  out.truth.z_head = sp.z_head;
  out.truth.chin_z = chin_z;
  return out;
}

Benchmark generate_benchmark(const BenchmarkConfig& cfg) {
  if (cfg.n_subjects < 1 || cfg.min_frames < 1 || cfg.max_frames < cfg.min_frames)
    throw DataError("benchmark: invalid subject or frame counts");
  if (cfg.yaw_max < cfg.yaw_min) throw DataError("benchmark: yaw_max below yaw_min");
  Benchmark bench;
  for (int k = 0; k < cfg.n_subjects; ++k) {
    Rng rng(derive_seed(cfg.seed, "subject-" + std::to_string(k)));
    auto U = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    BenchmarkSubject subj;
    SubjectParams& p = subj.params;
    char id[16];
    std::snprintf(id, sizeof id, "S%02d", k + 1);
    p.id = id;
    p.z_head = U(1230.0, 1370.0);
    p.shoulder_half_width = U(185.0, 225.0);
    p.chest_half_depth = U(105.0, 130.0);
    p.head_radius = U(86.0, 98.0);
    p.nose_length = U(22.0, 32.0);
    p.head_forward = U(38.0, 65.0);
    p.position = Point2(1500.0 + U(-300.0, 300.0), 1750.0 + U(-300.0, 300.0));
    p.noise_sigma = cfg.noise_sigma;
    p.outlier_fraction = cfg.outlier_fraction;
    const double base_yaw = U(-180.0, 180.0);
    const int n_frames = std::uniform_int_distribution<int>(cfg.min_frames, cfg.max_frames)(rng);

    subj.session.sensors = default_sensors();
    std::normal_distribution<double> det_z(0.0, 12.0), det_xy(0.0, 15.0);
    for (int f = 0; f < n_frames; ++f) {
      SubjectParams fp = p;
      fp.body_yaw = normalize_deg(base_yaw + U(-cfg.body_jitter, cfg.body_jitter));
      fp.head_offset = cfg.yaw_max > cfg.yaw_min ? U(cfg.yaw_min, cfg.yaw_max) : cfg.yaw_min;
      const double pose = U(0.0, 1.0);
      fp.arms = pose < 0.6 ? ArmPose::kDown : (pose < 0.85 ? ArmPose::kTable : ArmPose::kChin);
      fp.z1_error = det_z(rng);
      fp.z2_error = det_z(rng);
      fp.xy_error = Point2(det_xy(rng), det_xy(rng));
      fp.seed = derive_seed(derive_seed(cfg.seed, p.id), static_cast<std::uint64_t>(f));
      auto sf = generate_subject_frame(fp, f * cfg.frame_period);
      subj.session.frames.push_back(std::move(sf.frame));
      subj.truth.push_back(sf.truth);
      bench.labels.push_back({std::to_string(f), p.id, sf.truth.head_offset, sf.truth.body_yaw});
    }
    bench.subjects.push_back(std::move(subj));
  }
  return bench;
}

void write_labels(const std::filesystem::path& path, const std::vector<BenchmarkLabel>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "frame,subject,head_yaw,body_yaw\n";
  out.precision(17);
  for (const auto& l : labels) out << l.frame << ',' << l.subject << ',' << l.head_yaw << ',' << l.body_yaw << '\n';
}

std::vector<BenchmarkLabel> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("frame,subject,head_yaw,body_yaw", 0) != 0) throw DataError(path.string() + ": unexpected header");
  std::vector<BenchmarkLabel> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    BenchmarkLabel l;
    std::string h, b;
    if (!std::getline(ss, l.frame, ',') || !std::getline(ss, l.subject, ',') || !std::getline(ss, h, ',') ||
        !std::getline(ss, b, ','))
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 4 columns");
    try {
      l.head_yaw = std::stod(h);
      l.body_yaw = std::stod(b);
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
    out.push_back(l);
  }
  return out;
}

void write_benchmark(const std::filesystem::path& dir, const Benchmark& bench) {
  std::filesystem::create_directories(dir);
  for (const auto& s : bench.subjects) write_session(dir / (s.params.id + ".jsonl"), s.session);
  write_labels(dir / "labels.csv", bench.labels);
}

namespace {

Region label_of(double yaw, const ReferenceAngles& refs, double hw) {
  if (std::abs(normalize_deg(yaw - refs.interviewer1)) <= hw) return Region::kInterviewer1;
  if (std::abs(normalize_deg(yaw - refs.interviewer2)) <= hw) return Region::kInterviewer2;
  return Region::kNeutral;
}

}  // namespace

Conversation generate_conversation(const std::vector<ScriptStep>& script, const ConversationConfig& cfg) {
  if (script.empty()) throw DataError("conversation: empty script");
  for (const auto& st : script)
    if (!(st.duration > 0)) throw DataError("conversation: step durations must be positive");
  if (!(cfg.frame_period > 0)) throw DataError("conversation: frame period must be positive");

  Rng rng(cfg.seed);
  auto U = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  Conversation c;
  c.subject = Point2(1500.0, 900.0);
  c.subject_zero = 90.0 + U(-10.0, 10.0);
  const double sep = cfg.setup == Setup::kSetup90 ? U(75.0, 105.0) : U(35.0, 55.0);
  const double skew = U(-8.0, 8.0);
  auto place = [&](double rel) {
    const double a = (c.subject_zero + rel) * kRadPerDeg;
    const double dist = U(1100.0, 1500.0);
    return Point2(c.subject.x() + dist * std::cos(a), c.subject.y() + dist * std::sin(a));
  };
  c.interviewer1 = place(skew + 0.5 * sep);  // subject's left
  c.interviewer2 = place(skew - 0.5 * sep);
  c.refs = reference_angles(c.subject, c.interviewer1, c.interviewer2, c.subject_zero);

  const double hw = 15.0;
  const double gap = std::abs(normalize_deg(c.refs.interviewer1 - c.refs.interviewer2));
  const double neutral = gap / 2 >= hw + cfg.dwell_jitter + 5.0
                             ? c.refs.midpoint
                             : normalize_deg(c.refs.interviewer2 - 45.0 * (c.refs.interviewer1 > c.refs.interviewer2 ? 1 : -1));
  auto target_angle = [&](Target t) {
    switch (t) {
      case Target::kInterviewer1: return c.refs.interviewer1;
      case Target::kInterviewer2: return c.refs.interviewer2;
      case Target::kNeutral: return neutral;
    }
    return neutral;
  };

  double total = 0.0;
  std::vector<double> step_start;
  for (const auto& st : script) {
    step_start.push_back(total);
    total += st.duration;
  }
  const auto n_frames = static_cast<std::size_t>(std::floor(total / cfg.frame_period - 1e-9)) + 1;
  for (std::size_t k = 0; k < script.size(); ++k)
    if (c.roles.empty() || c.roles.back().speaker != script[k].speaker) c.roles.push_back({step_start[k], script[k].speaker});

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t step = 0, current = kNone;
  double prev_target = 0.0;
  for (std::size_t i = 0; i < n_frames; ++i) {
    const double t = static_cast<double>(i) * cfg.frame_period;
    while (step + 1 < script.size() && t >= step_start[step + 1] - 1e-9) ++step;
    const double target = target_angle(script[step].target);
    double yaw = target + U(-cfg.dwell_jitter, cfg.dwell_jitter);
    if (step != current && current != kNone) yaw = prev_target + 0.5 * normalize_deg(target - prev_target);
    current = step;
    prev_target = target;
    c.yaw.push_back({t, normalize_deg(yaw)});
  }

  std::vector<Region> labels;
  for (const auto& y : c.yaw) labels.push_back(label_of(y.yaw, c.refs, hw));
  c.expected.contacts = enumerate_contacts(labels);
  c.expected.exclusions = enumerate_exclusions(labels);

  if (cfg.with_clouds) {
    c.session.sensors = default_sensors();
    SubjectParams p;
    p.id = "S";
    p.position = c.subject;
    p.body_yaw = c.subject_zero;
    for (std::size_t i = 0; i < c.yaw.size(); ++i) {
      p.head_offset = c.yaw[i].yaw;
      p.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
      c.session.frames.push_back(generate_subject_frame(p, c.yaw[i].t).frame);
    }
  }
  return c;
}

std::vector<FrameSpan> enumerate_contacts(const std::vector<Region>& labels, std::size_t min_frames) {
  std::vector<FrameSpan> out;
  const std::size_t n = labels.size();
  for (std::size_t b = 0; b < n; ++b) {
    if (labels[b] == Region::kNeutral) continue;
    if (b > 0 && labels[b - 1] == labels[b]) continue;  // not a run start
    std::size_t e = b;
    while (e < n && labels[e] == labels[b]) ++e;
    if (e - b >= min_frames) out.push_back({labels[b], b, e});
  }
  return out;
}

std::vector<FrameSpan> enumerate_exclusions(const std::vector<Region>& labels, std::size_t window,
                                            std::size_t quorum) {
  std::vector<FrameSpan> out;
  const std::size_t n = labels.size();
  if (window == 0 || n < window) return out;
  for (Region excluded : {Region::kInterviewer1, Region::kInterviewer2}) {
    const Region other = excluded == Region::kInterviewer1 ? Region::kInterviewer2 : Region::kInterviewer1;
    // covered[i]: some firing window holds frame i; linked[i]: one firing
    // window holds both i and i + 1.
    std::vector<bool> covered(n, false), linked(n, false);
    for (std::size_t w = 0; w + window <= n; ++w) {
      std::size_t c_other = 0, c_excl = 0;
      for (std::size_t i = w; i < w + window; ++i) {
        c_other += labels[i] == other;
        c_excl += labels[i] == excluded;
      }
      if (c_other >= quorum && c_excl == 0) {
        for (std::size_t i = w; i < w + window; ++i) covered[i] = true;
        for (std::size_t i = w; i + 1 < w + window; ++i) linked[i] = true;
      }
    }
    for (std::size_t i = 0; i < n;) {
      if (!covered[i]) {
        ++i;
        continue;
      }
      std::size_t e = i;
      while (linked[e]) ++e;
      out.push_back({excluded, i, e + 1});
      i = e + 1;
    }
  }
  std::sort(out.begin(), out.end(), [](const FrameSpan& x, const FrameSpan& y) {
    return x.begin != y.begin ? x.begin < y.begin : x.party < y.party;
  });
  return out;
}

}  // namespace orient
