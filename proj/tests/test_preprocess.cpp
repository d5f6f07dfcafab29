#include <doctest.h>

#include <algorithm>
#include <random>

#include "orient/angle.hpp"
#include "orient/error.hpp"
#include "orient/kdtree.hpp"
#include "orient/preprocess.hpp"
#include "orient/synth.hpp"
#include "oracles.hpp"

using namespace orient;

TEST_CASE("crop boundaries") {
  Cloud pts(3, 4);
  pts << 501, 500, 0, 0,  //
      0, 0, 0, 0,         //
      1000, 1000, 949, 948.9;
  const Cloud c = crop_roi(pts, {0, 0}, 1300.0);
  REQUIRE(c.cols() == 2);
  CHECK(c(0, 0) == 500);
  CHECK(c(2, 1) == 949);
}

TEST_CASE("kd-tree neighbours equal brute force") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-300.0, 300.0);
  for (int trial = 0; trial < 30; ++trial) {
    Cloud pts(3, 60 + trial * 7);
    for (Eigen::Index i = 0; i < pts.cols(); ++i) pts.col(i) = Point3(u(rng), u(rng), u(rng));
    // Duplicates exercise tie handling.
    pts.col(5) = pts.col(6);
    const KdTree3 tree(pts, 4);
    for (Eigen::Index i = 0; i < pts.cols(); i += 3) {
      const auto fast = tree.knn_sq_distances(pts.col(i), 10, i);
      const auto slow = oracle::knn_sq_distances(pts, i, 10);
      CHECK(fast == slow);
    }
  }
}

TEST_CASE("denoise agrees bit-exactly with the brute-force oracle") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 200.0);
  for (int trial = 0; trial < 50; ++trial) {
    Cloud pts(3, 100);
    for (Eigen::Index i = 0; i < 100; ++i) pts.col(i) = Point3(u(rng), u(rng), u(rng) * 0.3);
    std::vector<Eigen::Index> kept;
    knn_denoise(pts, 10, 50.0, &kept);
    CHECK(kept == oracle::denoise_keep(pts, 10, 50.0));
    const Eigen::VectorXd md = knn_mean_distances(pts, 10);
    for (Eigen::Index i = 0; i < 100; ++i) CHECK(md[i] == oracle::knn_mean_distance(pts, i, 10));
  }
}

TEST_CASE("denoise examples") {
  Cloud cube(3, 1000);
  Eigen::Index n = 0;
  for (int x = 0; x < 10; ++x)
    for (int y = 0; y < 10; ++y)
      for (int z = 0; z < 10; ++z) cube.col(n++) = Point3(10.0 * x, 10.0 * y, 10.0 * z);
  CHECK(knn_denoise(cube).cols() == 1000);

  Cloud with(3, 1001);
  with << cube, Point3(545, 45, 45);
  std::vector<Eigen::Index> kept;
  knn_denoise(with, 10, 50.0, &kept);
  CHECK(kept.size() == 1000);
  CHECK(std::find(kept.begin(), kept.end(), 1000) == kept.end());

  Cloud tiny = Cloud::Random(3, 10) * 1e4;
  CHECK(knn_denoise(tiny).cols() == 10);
}

TEST_CASE("initial split arithmetic") {
  Cloud pts(3, 3);
  pts << 0, 0, 0, 0, 0, 0, 1080, 1070, 1000;
  const SplitClouds s = initial_split(pts, 1200, 1240);
  CHECK(s.threshold == doctest::Approx(1070.0));
  CHECK(s.pc_head.cols() == 2);
  CHECK(s.pc_body.cols() == 1);
  Cloud low(3, 2);
  low << 0, 0, 0, 0, 500, 600;
  CHECK_THROWS_WITH_AS(initial_split(low, 1200, 1240), "empty head", DataError);
}

namespace {

// Upper hemisphere of radius r on a Fibonacci lattice.
Cloud hemisphere(Point3 c, double r, int n) {
  Cloud pts(3, n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (i + 0.5) / n;
    const double rad = std::sqrt(1.0 - z * z);
    pts.col(i) = c + r * Point3(rad * std::cos(golden * i), rad * std::sin(golden * i), z);
  }
  return pts;
}

}  // namespace

TEST_CASE("head position from a hemisphere") {
  const Cloud h = hemisphere({0, 0, 1200}, 100, 2000);
  const HeadPosition hp = correct_head_position(h);
  CHECK(hp.head_center.norm() <= 2.0);
  CHECK(std::abs(hp.z_head - 1300.0) <= 1.0);
  CHECK(hp.flags == 0);

  Cloud spiked(3, h.cols() + 1);
  spiked << h, Point3(0, 0, 1330);
  CHECK(std::abs(correct_head_position(spiked).z_head - 1300.0) <= 1.0);
}

TEST_CASE("degenerate head falls back") {
  Cloud line(3, 10);
  for (int i = 0; i < 10; ++i) line.col(i) = Point3(i * 10.0, 0.0, 1200.0 + (i % 2));
  PreprocessConfig cfg;
  cfg.min_head_points = 5;
  const HeadPosition hp = correct_head_position(line, cfg);
  CHECK((hp.flags & flags::kHeadFitDegenerate) != 0);
  CHECK(hp.head_center.isApprox(Point2(45.0, 0.0)));
}

TEST_CASE("crown fallback when no point has close neighbours") {
  Cloud sparse(3, 12);
  for (int i = 0; i < 12; ++i) sparse.col(i) = Point3(0, 0, 1000.0 + 10.0 * i);
  bool fb = false;
  const double z = crown_height(sparse, PreprocessConfig{}, &fb);
  CHECK(fb);
  CHECK(z == doctest::Approx(0.5 * (1060.0 + 1070.0)));
}

TEST_CASE("refined split") {
  Cloud pts(3, 4);
  pts << 0, 160, 0, 10,  //
      0, 0, 0, 0,        //
      1200, 1200, 1124, 1000;
  HeadPosition hp;
  hp.z_head = 1300;
  const SplitClouds s = refined_split(pts, hp);
  CHECK(s.threshold == doctest::Approx(1125.0));
  CHECK(s.pc_head.cols() == 1);
  CHECK(s.pc_body.cols() == 2);
}

TEST_CASE("chin stays in the head cloud") {
  SubjectParams p;
  p.seed = 3;
  const SyntheticFrame f = generate_subject_frame(p);
  CHECK(f.truth.z_head - f.truth.chin_z < 175.0);
  const SubjectObservation obs = process_subject(f.frame, f.frame.detections[0], nullptr);
  REQUIRE(obs.usable());
  Eigen::Index head_part = 0;
  for (Eigen::Index i = 0; i < f.frame.points.cols(); ++i) {
    if (f.parts[static_cast<std::size_t>(i)] != Part::kHead) continue;
    ++head_part;
    const Point3 q = f.frame.points.col(i);
    bool found = false;
    for (Eigen::Index k = 0; k < obs.pc_head.cols() && !found; ++k) found = obs.pc_head.col(k) == q;
    CHECK(found);
  }
  CHECK(head_part > 100);
}

TEST_CASE("validation rules") {
  PointCloudFrame a;
  a.points = Cloud::Random(3, 50);
  PointCloudFrame b = a;
  SubjectDetection det{"S", 0, 0, 1200, 1200};
  HeadPosition hp;
  hp.z_head = 1200;
  CHECK(validate_frame(b, &a, det, hp).reason == "repeat");
  hp.head_center = {50, 80};
  hp.z_head = 1210;
  const ValidationReport ok = validate_frame(b, nullptr, det, hp);
  CHECK_FALSE(ok.rejected);
  CHECK(ok.head_discrepancy_xy == doctest::Approx(94.3398).epsilon(1e-4));
  hp.z_head = 1310;
  const ValidationReport z = validate_frame(b, nullptr, det, hp);
  CHECK(z.rejected);
  CHECK(z.reason == "z discrepancy");
  hp.z_head = 1200;
  hp.head_center = {0, 101};
  CHECK(validate_frame(b, nullptr, det, hp).reason == "xy discrepancy");
}

TEST_CASE("crop on a synthetic subject has the expected size") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SubjectParams p;
    p.seed = seed;
    p.body_yaw = 40.0 * seed;
    const SyntheticFrame f = generate_subject_frame(p);
    const Cloud c = crop_roi(f.frame.points, f.truth.body_center, f.truth.z_head);
    CHECK(c.cols() >= 1500);
    CHECK(c.cols() <= 2100);
  }
}

TEST_CASE("fault injection: z errors up to 150 mm") {
  for (double err : {-150.0, -120.0, -60.0, 0.0, 60.0, 120.0, 150.0}) {
    SubjectParams p;
    p.z1_error = err;
    p.z2_error = err;
    p.seed = 77;
    const SyntheticFrame f = generate_subject_frame(p);
    const SubjectObservation obs = process_subject(f.frame, f.frame.detections[0], nullptr);
    REQUIRE(obs.usable());
    CHECK(std::abs(obs.head.z_head - f.truth.z_head) <= 5.0);
    CHECK(obs.validation.rejected == (std::abs(obs.validation.head_discrepancy_z) > 100.0));
  }
}
