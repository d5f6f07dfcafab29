// Acceptance checks. One line per criterion; exit status is the number of
// failures.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "oracles.hpp"
#include "orient/angle.hpp"
#include "orient/behavior.hpp"
#include "orient/config.hpp"
#include "orient/dataset.hpp"
#include "orient/ellipse.hpp"
#include "orient/ensemble.hpp"
#include "orient/features.hpp"
#include "orient/forest.hpp"
#include "orient/mlp.hpp"
#include "orient/preprocess.hpp"
#include "orient/rng.hpp"
#include "orient/stats.hpp"
#include "orient/synth.hpp"

using namespace orient;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void report(int id, const std::string& name, const std::function<void(Outcome&)>& body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  if (!o.pass) ++failures;
  std::printf("criterion %2d %s  %s:%s\n", id, o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str());
  std::fflush(stdout);
}

Cloud2 ellipse_points(double a, double b, double theta_deg, int n, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const double th = theta_deg * kRadPerDeg;
  Cloud2 pts(2, n);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * i / n;
    const double x = a * std::cos(t), y = b * std::sin(t);
    pts(0, i) = 1500.0 + x * std::cos(th) - y * std::sin(th) + noise * g(rng);
    pts(1, i) = 1750.0 + x * std::sin(th) + y * std::cos(th) + noise * g(rng);
  }
  return pts;
}

SubjectObservation observe(const SyntheticFrame& f) {
  return process_subject(f.frame, f.frame.detections[0], nullptr);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json load_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

int call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

void criterion_ellipse(Outcome& o) {
  const auto t0 = Clock::now();
  double worst_orient = 0, worst_axis = 0, worst_noisy = 0;
  for (int th = 0; th <= 150; th += 30) {
    const EllipseFit f = fit_ellipse_direct(ellipse_points(200, 120, th, 200, 0.0, 1));
    worst_orient = std::max(worst_orient, std::abs(normalize_half_deg(f.orientation_deg - th)));
    worst_axis = std::max({worst_axis, std::abs(f.semi_major - 200) / 200, std::abs(f.semi_minor - 120) / 120});
    const EllipseFit n = fit_ellipse_direct(ellipse_points(200, 120, th, 200, 5.0, 100 + th));
    worst_noisy = std::max(worst_noisy, std::abs(normalize_half_deg(n.orientation_deg - th)));
  }
  const double secs = seconds_since(t0);
  o.detail << " orientation err " << worst_orient << " deg (<= 0.5), axis err " << 100 * worst_axis
           << "% (<= 1%), noisy err " << worst_noisy << " deg (<= 2), " << secs << " s (< 1)";
  o.require(worst_orient <= 0.5, "orientation");
  o.require(worst_axis <= 0.01, "axes");
  o.require(worst_noisy <= 2.0, "noisy orientation");
  o.require(secs < 1.0, "runtime");
}

void criterion_sweep(Outcome& o) {
  const auto t0 = Clock::now();
  auto sweep = [&](double sigma, double outliers) {
    double sum = 0;
    int n = 0;
    for (int yaw = 0; yaw < 360; yaw += 10) {
      SubjectParams p;
      p.body_yaw = yaw;
      p.noise_sigma = sigma;
      p.outlier_fraction = outliers;
      p.seed = 1000 + static_cast<std::uint64_t>(yaw);
      const SyntheticFrame f = generate_subject_frame(p);
      const SubjectObservation obs = observe(f);
      // An unusable frame counts as a 180 degree miss.
      sum += obs.usable() ? std::abs(angle_diff_deg(obs.body->yaw_deg, f.truth.body_yaw)) : 180.0;
      ++n;
    }
    return sum / n;
  };
  const double clean = sweep(0.0, 0.0);
  const double noisy = sweep(8.0, 0.02);
  const double secs = seconds_since(t0);
  o.detail << " noiseless MAE " << clean << " deg (<= 3), noisy MAE " << noisy << " deg (<= 6), " << secs
           << " s (< 10)";
  o.require(clean <= 3.0, "noiseless");
  o.require(noisy <= 6.0, "noisy");
  o.require(secs < 10.0, "runtime");
}

void criterion_front_side(Outcome& o) {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> yaw(-180.0, 180.0), fwd(40.0, 70.0), turn(-90.0, 90.0);
  int correct = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    SubjectParams p;
    p.body_yaw = yaw(rng);
    p.head_forward = fwd(rng);
    p.head_offset = turn(rng);
    p.noise_sigma = 8.0;
    p.outlier_fraction = 0.02;
    p.seed = 50000 + static_cast<std::uint64_t>(i);
    const SyntheticFrame f = generate_subject_frame(p);
    const SubjectObservation obs = observe(f);
    if (obs.usable() && std::abs(angle_diff_deg(obs.body->yaw_deg, f.truth.body_yaw)) < 90.0) ++correct;
  }
  const double rate = static_cast<double>(correct) / n;
  o.detail << " " << correct << "/" << n << " correct (" << 100 * rate << "%, >= 99%)";
  o.require(rate >= 0.99, "rate");
}

void criterion_head_position(Outcome& o) {
  double worst = 0;
  int frames = 0, rejected = 0, mismatched = 0;
  for (double e1 = -150; e1 <= 150; e1 += 25) {
    for (double e2 = -150; e2 <= 150; e2 += 25) {
      SubjectParams p;
      p.z1_error = e1;
      p.z2_error = e2;
      p.seed = 700 + static_cast<std::uint64_t>(frames);
      const SyntheticFrame f = generate_subject_frame(p);
      const SubjectObservation obs = observe(f);
      ++frames;
      if (!obs.usable()) {
        worst = std::max(worst, 1e9);
        continue;
      }
      worst = std::max(worst, std::abs(obs.head.z_head - f.truth.z_head));
      rejected += obs.validation.rejected;
      if (obs.validation.rejected != (std::abs(obs.validation.head_discrepancy_z) > 100.0)) ++mismatched;
    }
  }
  o.detail << " " << frames << " fault-injected frames, worst z_head err " << worst << " mm (<= 5), " << rejected
           << " rejected, " << mismatched << " rejection mismatches (0)";
  o.require(worst <= 5.0, "z_head");
  o.require(mismatched == 0, "rejection rule");
  o.require(rejected > 0 && rejected < frames, "fixture exercises both outcomes");
}

void criterion_denoise(Outcome& o) {
  std::size_t outliers = 0, outliers_removed = 0, inliers = 0, inliers_removed = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SubjectParams p;
    p.outlier_fraction = 0.05;
    p.noise_sigma = 8.0;
    p.body_yaw = 36.0 * static_cast<double>(seed);
    p.seed = 900 + seed;
    const SyntheticFrame f = generate_subject_frame(p);
    std::vector<Eigen::Index> kept;
    knn_denoise(f.frame.points, 10, 50.0, &kept);
    std::vector<bool> keep(f.parts.size(), false);
    for (auto k : kept) keep[static_cast<std::size_t>(k)] = true;
    for (std::size_t i = 0; i < f.parts.size(); ++i) {
      const bool out = f.parts[i] == Part::kOutlier;
      (out ? outliers : inliers)++;
      if (!keep[i]) (out ? outliers_removed : inliers_removed)++;
    }
  }
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 200.0);
  int exact = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Cloud pts(3, 100);
    for (Eigen::Index i = 0; i < 100; ++i) pts.col(i) = Point3(u(rng), u(rng), u(rng) * 0.3);
    std::vector<Eigen::Index> kept;
    knn_denoise(pts, 10, 50.0, &kept);
    const Eigen::VectorXd md = knn_mean_distances(pts, 10);
    bool same = kept == oracle::denoise_keep(pts, 10, 50.0);
    for (Eigen::Index i = 0; i < 100; ++i) same = same && md[i] == oracle::knn_mean_distance(pts, i, 10);
    exact += same;
  }
  const double out_rate = static_cast<double>(outliers_removed) / static_cast<double>(outliers);
  const double in_rate = static_cast<double>(inliers_removed) / static_cast<double>(inliers);
  o.detail << " outliers removed " << 100 * out_rate << "% of " << outliers << " (>= 99%), inliers removed "
           << 100 * in_rate << "% of " << inliers << " (<= 1%), oracle bit-exact on " << exact << "/100";
  o.require(out_rate >= 0.99, "outliers");
  o.require(in_rate <= 0.01, "inliers");
  o.require(exact == 100, "oracle");
}

void criterion_rfe(Outcome& o, const fs::path& features, const RunConfig& cfg) {
  if (!fs::exists(features)) throw std::runtime_error("benchmark features missing (evaluate failed)");
  Dataset d = dataset_from_table(read_feature_csv(features));
  d = append_noise_features(d, 20, derive_seed(cfg.seed, "noise-features"));
  const RfeTrace t = rf_rfe(d, cfg.learn.rfe, derive_seed(cfg.seed, "rfe"));
  const double full = t.steps.front().val_mae, one = t.steps.back().val_mae;
  bool reappear = false, shrink = t.steps.size() == static_cast<std::size_t>(d.cols());
  std::set<Eigen::Index> gone;
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    shrink = shrink && t.steps[k].active.size() == static_cast<std::size_t>(d.cols()) - k;
    for (auto a : t.steps[k].active) reappear = reappear || gone.count(a);
    if (t.steps[k].eliminated >= 0) gone.insert(t.steps[k].eliminated);
  }
  o.detail << " " << d.cols() << " features (" << d.cols() - 20 << " + 20 noise): MAE full " << full << ", optimal "
           << t.optimal_mae << " at " << t.optimal.size() << " features, one feature " << one
           << "; eliminated features reappear: " << (reappear ? "yes" : "no");
  o.require(t.optimal_mae < full, "optimal < full");
  o.require(one > t.optimal_mae, "one > optimal");
  o.require(!reappear && shrink, "elimination order");
}

void criterion_ensemble(Outcome& o, const fs::path& run) {
  const json rep = load_json(run / "report.json");
  std::map<std::string, std::vector<std::pair<int, bool>>> pool;
  {
    std::ifstream in(run / "ensembles.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::vector<std::string> f;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) f.push_back(cell);
      pool[f.at(0)].push_back({std::stoi(f.at(1)), f.at(5) == "1"});
    }
  }
  std::size_t smallest = 1000, largest = 0;
  int bad = 0;
  for (const auto& fold : rep.at("folds")) {
    const json& s = fold.at("selection");
    const auto size = s.at("selected").size();
    const auto pool_size = s.at("ranking").size();
    smallest = std::min(smallest, size);
    largest = std::max(largest, size);
    const double initial = s.at("initial_mae"), final_mae = s.at("final_mae");
    const auto trace = s.at("trace").get<std::vector<double>>();
    bool ok = pool_size == 20 && size >= 3 && size <= 20 && final_mae <= initial;
    ok = ok && trace.size() == size - 2 && trace.front() == initial && trace.back() == final_mae;
    for (std::size_t k = 1; k < trace.size(); ++k) ok = ok && trace[k] < trace[k - 1];
    // Stopped at the first candidate that did not improve, or ran out of pool.
    ok = ok && (size == pool_size ? s.at("rejected_mae").is_null()
                                  : s.at("rejected_mae").is_number() && s.at("rejected_mae").get<double>() >= final_mae);
    for (std::size_t k = 0; k < size; ++k) ok = ok && s.at("selected")[k] == s.at("ranking")[k];
    const auto& rows = pool[fold.at("subject").get<std::string>()];
    ok = ok && rows.size() == 20;
    for (const auto& [rank, selected] : rows) ok = ok && selected == (static_cast<std::size_t>(rank) <= size);
    bad += !ok;
  }
  o.detail << " " << rep.at("folds").size() << " folds with pools of 20, ensemble sizes " << smallest << ".."
           << largest << " (in [3,20]), folds violating stop rule or final <= initial: " << bad;
  o.require(!rep.at("folds").empty(), "folds present");
  o.require(bad == 0, "protocol");
}

void criterion_loso(Outcome& o, const fs::path& run, double secs) {
  const json rep = load_json(run / "report.json");
  const double mae = rep.at("mean_mae");
  o.detail << " " << rep.at("folds").size() << " subjects, mean MAE " << mae << " deg (<= 10), " << secs
           << " s (< 600)";
  o.require(rep.at("folds").size() == 12, "12 folds");
  o.require(mae <= 10.0, "MAE");
  o.require(secs < 600.0, "runtime");
}

void criterion_events(Outcome& o) {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int matched = 0;
  std::size_t contacts = 0, exclusions = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Region> labels;
    Region cur = Region::kNeutral;
    const double stay = 0.6 + 0.35 * u(rng);
    while (labels.size() < 500) {
      if (u(rng) > stay) {
        const double r = u(rng);
        cur = r < 0.4 ? Region::kInterviewer1 : (r < 0.8 ? Region::kInterviewer2 : Region::kNeutral);
      }
      labels.push_back(cur);
    }
    const RegionSequence seq = make_sequence(labels, 1.0 / 1.5);
    std::vector<oracle::Span> c, x;
    for (const auto& e : detect_contacts(seq).events) c.push_back({e.target, e.begin, e.end});
    for (const auto& e : detect_exclusions(seq).events) x.push_back({e.excluded, e.begin, e.end});
    contacts += c.size();
    exclusions += x.size();
    matched += c == oracle::contacts(labels, 3) && x == oracle::exclusions(labels, 20, 15);
  }

  // Hand-computed fixtures.
  auto runs = [](std::initializer_list<std::pair<Region, int>> spec) {
    std::vector<Region> out;
    for (auto [r, n] : spec) out.insert(out.end(), static_cast<std::size_t>(n), r);
    return out;
  };
  const Region I1 = Region::kInterviewer1, I2 = Region::kInterviewer2, N = Region::kNeutral;
  const ContactSummary cs = detect_contacts(make_sequence(
      runs({{N, 5}, {I1, 3}, {N, 2}, {I2, 5}, {I1, 2}, {N, 3}, {I1, 8}, {N, 2}, {I2, 2}, {N, 28}, {I2, 3}, {N, 17},
            {I1, 2}, {N, 8}}),
      1.0));
  std::vector<oracle::Span> got;
  for (const auto& e : cs.events) got.push_back({e.target, e.begin, e.end});
  const std::vector<oracle::Span> want_c{{I1, 5, 8}, {I2, 10, 15}, {I1, 20, 28}, {I2, 60, 63}};
  const bool contact_fixture = got == want_c && cs.max_duration == 8.0 && cs.average_duration == 19.0 / 4 &&
                               std::abs(cs.average_no_contact_duration - 71.0 / 5) < 1e-12;

  std::vector<Region> labels = runs({{N, 40}, {I1, 30}});
  for (int i = 0; i < 80; ++i) labels.push_back(i % 2 ? I2 : I1);
  const auto tail = runs({{N, 30}, {I2, 50}, {N, 70}});
  labels.insert(labels.end(), tail.begin(), tail.end());
  const ExclusionSummary xs = detect_exclusions(make_sequence(labels, 1.0));
  got.clear();
  for (const auto& e : xs.events) got.push_back({e.excluded, e.begin, e.end});
  const std::vector<oracle::Span> want_x{{I2, 35, 71}, {I1, 175, 235}};
  const bool exclusion_fixture = got == want_x && xs.max_duration == 60.0 &&
                                 std::abs(xs.exclusions_per_minute - 0.4) < 1e-12 &&
                                 std::abs(xs.exclusion_percent - 32.0) < 1e-12;

  o.detail << " " << matched << "/100 random sequences match brute force (" << contacts << " contacts, "
           << exclusions << " exclusions); contact fixture " << (contact_fixture ? "ok" : "wrong")
           << ", exclusion fixture " << (exclusion_fixture ? "ok" : "wrong");
  o.require(matched == 100, "random sequences");
  o.require(contact_fixture, "contact fixture");
  o.require(exclusion_fixture, "exclusion fixture");
}

void criterion_stats(Outcome& o) {
  auto group = [](double m, double s, int n) {
    std::vector<double> v;
    const double half = s * std::sqrt((n - 1.0) / n);
    for (int i = 0; i < n; ++i) v.push_back(m + (i % 2 ? half : -half));
    return v;
  };
  const double d = compare_groups(group(10, 2, 12), group(8, 2, 8)).cohens_d;
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> size(2, 25);
  double worst_p = 0, worst_anti = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(static_cast<std::size_t>(size(rng))), b(static_cast<std::size_t>(size(rng)));
    for (auto& x : a) x = 5.0 + 2.0 * g(rng) + 0.3 * trial - 2.0;
    for (auto& x : b) x = 5.0 + 1.5 * g(rng);
    const GroupStats ab = compare_groups(a, b), ba = compare_groups(b, a);
    worst_p = std::max(worst_p, std::abs(ab.p_value - oracle::pooled_t(a, b).p));
    worst_anti = std::max({worst_anti, std::abs(ab.t_statistic + ba.t_statistic),
                           std::abs(ab.cohens_d + ba.cohens_d), std::abs(ab.p_value - ba.p_value)});
  }
  o.detail << " d = " << d << " (1 +- 1e-9), worst p-value gap to oracle " << worst_p
           << " over 20 pairs (<= 1e-6), worst antisymmetry gap " << worst_anti << " (<= 1e-12)";
  o.require(std::abs(d - 1.0) <= 1e-9, "cohen's d");
  o.require(worst_p <= 1e-6, "p-values");
  o.require(worst_anti <= 1e-12, "antisymmetry");
}

void criterion_determinism(Outcome& o, const fs::path& a, const fs::path& b, bool second_ok) {
  o.require(second_ok, "second evaluate run");
  std::size_t files = 0, differing = 0;
  std::set<std::string> names;
  for (const auto& root : {a, b})
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file()) names.insert(fs::relative(e.path(), root).generic_string());
  for (const auto& n : names) {
    ++files;
    if (!fs::exists(a / n) || !fs::exists(b / n) || slurp(a / n) != slurp(b / n)) {
      ++differing;
      o.detail << " [" << n << " differs]";
    }
  }
  o.detail << " " << files << " output files (reports, model bundles, predictions, traces), " << differing
           << " differ (0)";
  o.require(fs::exists(a / "report.json") && fs::exists(a / "models"), "outputs present");
  o.require(differing == 0, "byte identity");
}

void criterion_gradient(Outcome& o) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = 40, d = 12;
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = g(rng);
    y[i] = 40.0 * std::tanh(x(i, 0)) - 15.0 * x(i, 1);
  }
  const MlpModel m = MlpModel::initialise(d, {64, 32}, 3);
  const Eigen::MatrixXd xs = Standardizer::fit(x).apply(x);
  const Eigen::RowVectorXd ys = (y / 90.0).transpose();
  const auto errs = oracle::mlp_gradient_errors(m, xs, ys, 10, 8);
  const double worst = *std::max_element(errs.begin(), errs.end());
  o.detail << " 10 probes on a " << d << "-64-32-1 network, worst relative error " << worst << " (<= 1e-4)";
  o.require(errs.size() == 10, "probe count");
  o.require(worst <= 1e-4, "gradient");
}

}  // namespace

int main() {
  report(1, "ellipse fit", criterion_ellipse);
  report(2, "body orientation sweep", criterion_sweep);
  report(3, "front side", criterion_front_side);
  report(4, "head position correction", criterion_head_position);
  report(5, "denoising", criterion_denoise);

  // Criteria 6, 7, 8 and 11 share the full benchmark and two evaluate runs.
  const fs::path root = fs::temp_directory_path() / "orient_acceptance";
  fs::remove_all(root);
  const RunConfig cfg;
  const std::string seed = std::to_string(cfg.seed);
  const bool bench_ok = call({"synth", "--benchmark", "--seed", seed, "--out-dir", (root / "bench").string()}) == 0;
  const auto t0 = Clock::now();
  const bool run1_ok = bench_ok && call({"evaluate", "--bench-dir", (root / "bench").string(), "--seed", seed,
                                         "--out-dir", (root / "run1").string()}) == 0;
  const double secs = seconds_since(t0);

  report(6, "RFE trace shape", [&](Outcome& o) { criterion_rfe(o, root / "run1" / "features.csv", cfg); });
  report(7, "ensemble protocol", [&](Outcome& o) {
    o.require(run1_ok, "evaluate run");
    criterion_ensemble(o, root / "run1");
  });
  report(8, "leave-one-subject-out head yaw", [&](Outcome& o) {
    o.require(run1_ok, "evaluate run");
    criterion_loso(o, root / "run1", secs);
  });
  report(9, "behaviour events", criterion_events);
  report(10, "statistics", criterion_stats);
  report(11, "determinism", [&](Outcome& o) {
    const bool run2_ok = run1_ok && call({"evaluate", "--bench-dir", (root / "bench").string(), "--seed", seed,
                                          "--out-dir", (root / "run2").string()}) == 0;
    criterion_determinism(o, root / "run1", root / "run2", run2_ok);
  });
  report(12, "MLP gradients", criterion_gradient);

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
