#include <doctest.h>

#include <filesystem>

#include "orient/angle.hpp"
#include "orient/error.hpp"
#include "orient/kdtree.hpp"
#include "orient/preprocess.hpp"
#include "orient/synth.hpp"

using namespace orient;

TEST_CASE("same seed gives bit-identical clouds") {
  SubjectParams p;
  p.noise_sigma = 8;
  p.outlier_fraction = 0.02;
  p.seed = 99;
  const SyntheticFrame a = generate_subject_frame(p), b = generate_subject_frame(p);
  CHECK(same_points(a.frame.points, b.frame.points));
  p.seed = 100;
  CHECK_FALSE(same_points(a.frame.points, generate_subject_frame(p).frame.points));
}

TEST_CASE("clean subject is recovered") {
  SubjectParams p;
  p.seed = 12;
  const SyntheticFrame f = generate_subject_frame(p);
  CHECK(f.parts.size() == static_cast<std::size_t>(f.frame.points.cols()));
  const SubjectObservation obs = process_subject(f.frame, f.frame.detections[0], nullptr);
  REQUIRE(obs.usable());
  CHECK(std::abs(angle_diff_deg(obs.body->yaw_deg, 0.0)) <= 3.0);
  CHECK(std::abs(obs.head.z_head - f.truth.z_head) <= 5.0);
}

TEST_CASE("injected z error is rejected and corrected") {
  SubjectParams p;
  p.z1_error = p.z2_error = 120;
  p.seed = 5;
  const SyntheticFrame f = generate_subject_frame(p);
  const SubjectObservation obs = process_subject(f.frame, f.frame.detections[0], nullptr);
  REQUIRE(obs.usable());
  CHECK(obs.validation.rejected);
  CHECK(obs.validation.reason == "z discrepancy");
  CHECK(std::abs(obs.head.z_head - f.truth.z_head) <= 5.0);
}

TEST_CASE("outliers are far from the surface") {
  SubjectParams p;
  p.outlier_fraction = 0.05;
  p.seed = 31;
  const SyntheticFrame f = generate_subject_frame(p);
  std::vector<Eigen::Index> in, out;
  for (std::size_t i = 0; i < f.parts.size(); ++i)
    (f.parts[i] == Part::kOutlier ? out : in).push_back(static_cast<Eigen::Index>(i));
  REQUIRE(!out.empty());
  const Cloud inliers = select_columns(f.frame.points, in);
  const KdTree3 tree(inliers);
  for (auto o : out) CHECK(tree.knn_sq_distances(f.frame.points.col(o), 1)[0] >= 200.0 * 200.0);
}

TEST_CASE("visibility culling removes hidden surfaces") {
  SubjectParams p;
  p.seed = 2;
  const auto visible = generate_subject_frame(p).frame.points.cols();
  p.visibility_culling = false;
  CHECK(generate_subject_frame(p).frame.points.cols() > visible);
}

TEST_CASE("invalid anthropometry") {
  SubjectParams p;
  p.head_radius = -1;
  CHECK_THROWS_AS(generate_subject_frame(p), DataError);
}

TEST_CASE("benchmark scale and labels") {
  BenchmarkConfig cfg;
  cfg.n_subjects = 2;
  const Benchmark b = generate_benchmark(cfg);
  CHECK(b.subjects.size() == 2);
  for (const auto& s : b.subjects) {
    CHECK(s.session.frames.size() >= 95);
    CHECK(s.session.frames.size() <= 120);
  }
  for (const auto& l : b.labels) {
    CHECK(l.head_yaw >= -90.0);
    CHECK(l.head_yaw <= 90.0);
  }
  const Benchmark full = generate_benchmark(BenchmarkConfig{});
  CHECK(full.subjects.size() == 12);
  CHECK(full.labels.size() >= 1200);
  CHECK(full.labels.size() <= 1400);

  cfg.yaw_min = cfg.yaw_max = 0;
  cfg.n_subjects = 1;
  for (const auto& l : generate_benchmark(cfg).labels) CHECK(l.head_yaw == 0.0);
}

TEST_CASE("label file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "orient_labels_test.csv";
  const std::vector<BenchmarkLabel> labels{{"0", "S01", 12.25, -170.5}, {"1", "S01", -3.0, 20.0}};
  write_labels(path, labels);
  const auto back = read_labels(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].frame == "0");
  CHECK(back[0].head_yaw == 12.25);
  CHECK(back[1].body_yaw == 20.0);
  std::filesystem::remove(path);
}

TEST_CASE("conversation clouds carry the scripted yaw") {
  ConversationConfig cfg;
  cfg.with_clouds = true;
  const Conversation c = generate_conversation({{4.0, Target::kInterviewer1, Speaker::kInterviewer1}}, cfg);
  REQUIRE(c.session.frames.size() == c.yaw.size());
  CHECK(c.session.frames[0].detections.size() == 1);
}
