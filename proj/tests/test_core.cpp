#include <doctest.h>

#include <random>

#include "orient/angle.hpp"
#include "orient/core.hpp"
#include "orient/error.hpp"
#include "orient/synth.hpp"

using namespace orient;

TEST_CASE("normalize_deg wraps into [-180, 180)") {
  CHECK(normalize_deg(180.0) == -180.0);
  CHECK(normalize_deg(-180.0) == -180.0);
  CHECK(normalize_deg(540.0) == -180.0);
  CHECK(normalize_deg(190.0) == doctest::Approx(-170.0));
  CHECK(normalize_deg(-190.0) == doctest::Approx(170.0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5000.0, 5000.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = normalize_deg(u(rng));
    CHECK(a >= -180.0);
    CHECK(a < 180.0);
  }
}

TEST_CASE("angle_diff_deg is the signed shortest rotation") {
  CHECK(angle_diff_deg(10.0, -10.0) == doctest::Approx(20.0));
  CHECK(angle_diff_deg(-170.0, 170.0) == doctest::Approx(20.0));
  CHECK(angle_diff_deg(170.0, -170.0) == doctest::Approx(-20.0));
}

TEST_CASE("circular mean handles the wrap") {
  const double a[] = {170.0, -170.0};
  CHECK(circular_mean_deg(a) == doctest::Approx(-180.0));
  const double b[] = {30.0, -50.0};
  CHECK(circular_mean_deg(b) == doctest::Approx(-10.0));
}

TEST_CASE("bearing examples") {
  CHECK(bearing(Point2(0, 0), Point2(1000, 0)) == doctest::Approx(0.0));
  CHECK(bearing(Point2(0, 0), Point2(0, 1000)) == doctest::Approx(90.0));
  CHECK(bearing(Point2(0, 0), Point2(-1000, -1000)) == doctest::Approx(-135.0));
  CHECK(bearing(Point3(0, 0, 0), Point3(0, 1000, 500)) == doctest::Approx(90.0));
  CHECK_THROWS_AS(bearing(Point2(0, 0), Point2(0.5, 0)), DataError);
}

TEST_CASE("transform and stitch") {
  Extrinsics id;
  id.sensor_id = "A";
  Cloud pts(3, 2);
  pts << 1, 2, 3, 4, 5, 6;
  CHECK(transform(pts, id).isApprox(pts));

  Extrinsics rot;
  rot.sensor_id = "B";
  rot.rotation = Eigen::AngleAxisd(kRadPerDeg * 90.0, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  Cloud p(3, 1);
  p << 1000, 0, 0;
  const Cloud q = transform(p, rot);
  CHECK(std::abs(q(0, 0)) < 1e-6);
  CHECK(std::abs(q(1, 0) - 1000.0) < 1e-6);
  CHECK(std::abs(q(2, 0)) < 1e-6);

  std::map<std::string, Cloud> per;
  per["A"] = Cloud::Random(3, 100);
  per["B"] = Cloud::Random(3, 100);
  const Cloud all = stitch(per, {id, rot});
  CHECK(all.cols() == 200);
  CHECK(all.leftCols(100).isApprox(per["A"]));
}

namespace {

SessionRecording small_session(int n) {
  SessionRecording s;
  s.sensors = default_sensors();
  for (int f = 0; f < n; ++f) {
    PointCloudFrame fr;
    fr.timestamp = f / 1.5;
    fr.points = Cloud::Random(3, 20) * 1000.0;
    fr.points.row(2).array() += 1500.0;
    fr.detections.push_back({"S", 100.0 + f, 200.0, 1250.0, 1260.5});
    s.frames.push_back(fr);
  }
  return s;
}

}  // namespace

TEST_CASE("session round trip") {
  const SessionRecording s = small_session(3);
  const std::string text = serialize_session(s);
  ParseReport rep;
  const SessionRecording r = parse_session_text(text, &rep);
  CHECK(rep.ok());
  REQUIRE(r.frames.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.frames[i].timestamp == s.frames[i].timestamp);
    CHECK(r.frames[i].points == s.frames[i].points);
    REQUIRE(r.frames[i].detections.size() == 1);
    CHECK(r.frames[i].detections[0].cx == s.frames[i].detections[0].cx);
    CHECK(r.frames[i].detections[0].z2 == s.frames[i].detections[0].z2);
  }
  REQUIRE(r.sensors.size() == s.sensors.size());
  CHECK(r.sensors[1].rotation == s.sensors[1].rotation);
  CHECK(serialize_session(r) == text);
}

TEST_CASE("bad lines are reported and skipped") {
  std::string text = serialize_session(small_session(3));
  // Corrupt the second frame's first coordinate.
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  REQUIRE(lines.size() == 4);
  const auto pos = lines[2].find("\"points\":[[");
  REQUIRE(pos != std::string::npos);
  const auto start = pos + 11;
  const auto comma = lines[2].find(',', start);
  lines[2] = lines[2].substr(0, start) + "\"NaN\"" + lines[2].substr(comma);
  std::string joined;
  for (const auto& l : lines) joined += l + "\n";
  ParseReport rep;
  const SessionRecording r = parse_session_text(joined, &rep);
  CHECK(r.frames.size() == 2);
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0].line == 3);
}

TEST_CASE("empty or headerless sessions are errors") {
  CHECK_THROWS_AS(parse_session_text(""), DataError);
  CHECK_THROWS_AS(parse_session_text("{\"t\":0}\n"), DataError);
  CHECK_THROWS_AS(parse_session_text("{\"format\":\"orient-cloud/1\"}\n"), DataError);
}

TEST_CASE("non-increasing timestamps are rejected per line") {
  SessionRecording s = small_session(3);
  s.frames[2].timestamp = s.frames[1].timestamp;
  ParseReport rep;
  const auto r = parse_session_text(serialize_session(s), &rep);
  CHECK(r.frames.size() == 2);
  CHECK(rep.violations.size() == 1);
}

TEST_CASE("ten minutes at 1.5 fps is 900 frames") {
  std::vector<ScriptStep> script{{600.0, Target::kInterviewer1, Speaker::kInterviewer1}};
  const Conversation c = generate_conversation(script);
  CHECK(c.yaw.size() == 900);
}
