#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "orient/behavior.hpp"
#include "orient/core.hpp"

namespace orient {

enum class ArmPose : std::uint8_t { kDown, kTable, kChin };

const char* arm_pose_name(ArmPose p);

// Seated subject. Lengths in mm, angles in degrees.
struct SubjectParams {
  std::string id = "S1";
  Point2 position{1500.0, 1750.0};  // torso centre on the floor plan
  double z_head = 1300.0;           // seated crown height
  double shoulder_half_width = 200.0;
  double chest_half_depth = 115.0;
  double head_radius = 92.0;
  double nose_length = 28.0;
  double head_forward = 50.0;       // head centre ahead of the shoulder line
  double body_yaw = 0.0;            // absolute
  double head_offset = 0.0;         // head yaw relative to body yaw, left positive
  ArmPose arms = ArmPose::kDown;
  double noise_sigma = 0.0;
  double outlier_fraction = 0.0;
  bool visibility_culling = true;
  // Built-in detector faults.
  double z1_error = 0.0;
  double z2_error = 0.0;
  Point2 xy_error = Point2::Zero();
  double point_density = 1.0;  // scales every part's sample count
  std::uint64_t seed = 1;

  // Throws DataError on inconsistent anthropometry.
  void validate() const;
};

struct GroundTruth {
  double body_yaw = 0.0;
  double head_yaw = 0.0;           // absolute
  double head_offset = 0.0;        // relative to body yaw
  Point2 body_center = Point2::Zero();
  Point2 head_center = Point2::Zero();
  double z_head = 0.0;
  double chin_z = 0.0;
};

// Sample counts per part before culling and clipping; visible for tests.
enum class Part : std::uint8_t { kTorso, kNeck, kHead, kNose, kArm, kOutlier };

struct SyntheticFrame {
  PointCloudFrame frame;
  GroundTruth truth;
  std::vector<Part> parts;  // per column of frame.points
};

// Room used by all generators: two ceiling-corner sensors looking down.
std::vector<Extrinsics> default_sensors();

SyntheticFrame generate_subject_frame(const SubjectParams& params, double timestamp = 0.0);

struct BenchmarkConfig {
  int n_subjects = 12;
  int min_frames = 95;
  int max_frames = 120;
  double yaw_min = -90.0;   // head yaw relative to the body
  double yaw_max = 90.0;
  double body_jitter = 20.0;
  double noise_sigma = 8.0;
  double outlier_fraction = 0.02;
  double frame_period = 1.0 / 1.5;
  std::uint64_t seed = 7;
};

struct BenchmarkLabel {
  std::string frame;
  std::string subject;
  double head_yaw = 0.0;  // relative to body yaw
  double body_yaw = 0.0;  // absolute
};

struct BenchmarkSubject {
  SubjectParams params;  // anthropometry; per-frame yaw fields vary
  SessionRecording session;
  std::vector<GroundTruth> truth;
};

struct Benchmark {
  std::vector<BenchmarkSubject> subjects;
  std::vector<BenchmarkLabel> labels;
};

Benchmark generate_benchmark(const BenchmarkConfig& cfg);
// One session file per subject ("<id>.jsonl") plus labels.csv.
void write_benchmark(const std::filesystem::path& dir, const Benchmark& bench);
std::vector<BenchmarkLabel> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<BenchmarkLabel>& labels);

// Conversation scripts.
enum class Target : std::uint8_t { kInterviewer1, kInterviewer2, kNeutral };

struct ScriptStep {
  double duration = 0.0;  // seconds
  Target target = Target::kNeutral;
  Speaker speaker = Speaker::kNone;
};

enum class Setup : std::uint8_t { kSetup90, kSetup45 };

struct ConversationConfig {
  Setup setup = Setup::kSetup90;
  double frame_period = 1.0 / 1.5;
  double dwell_jitter = 4.0;  // degrees around the scripted target
  bool with_clouds = false;
  std::uint64_t seed = 11;
};

struct FrameSpan {
  Region party = Region::kInterviewer1;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct ExpectedEvents {
  std::vector<FrameSpan> contacts;
  std::vector<FrameSpan> exclusions;  // party = excluded interviewer
};

struct Conversation {
  Point2 subject{0, 0};
  Point2 interviewer1{0, 0};
  Point2 interviewer2{0, 0};
  double subject_zero = 0.0;  // absolute yaw the subject-relative angles refer to
  ReferenceAngles refs;
  std::vector<YawSample> yaw;  // subject-relative true head yaw
  std::vector<RoleSample> roles;
  ExpectedEvents expected;
  SessionRecording session;    // empty unless with_clouds
};

// Yaw follows the script: the first frame of each step sits halfway between
// the previous and the new target, the rest dwell on the target.
Conversation generate_conversation(const std::vector<ScriptStep>& script, const ConversationConfig& cfg = {});

// Exhaustive event enumeration used as the expected-event oracle.
std::vector<FrameSpan> enumerate_contacts(const std::vector<Region>& labels, std::size_t min_frames = 3);
std::vector<FrameSpan> enumerate_exclusions(const std::vector<Region>& labels, std::size_t window = 20,
                                            std::size_t quorum = 15);

}  // namespace orient
