#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "orient/core.hpp"
#include "orient/stats.hpp"

namespace orient {

// Subject-relative bearings (left positive) to both interviewers and their
// circular midpoint.
struct ReferenceAngles {
  double interviewer1 = 0.0;
  double interviewer2 = 0.0;
  double midpoint = 0.0;
};

ReferenceAngles reference_angles(const Point2& subject, const Point2& interviewer1, const Point2& interviewer2,
                                 double subject_zero_deg);

enum class Region : std::uint8_t { kInterviewer1, kInterviewer2, kNeutral };

const char* region_name(Region r);

struct YawSample {
  double t = 0.0;    // seconds
  double yaw = 0.0;  // subject-relative degrees
};

struct RegionSequence {
  std::vector<double> timestamps;
  std::vector<Region> labels;
  double half_width = 15.0;

  std::size_t size() const { return labels.size(); }
  // Span of frame i: [t_i, t_{i+1}); the last frame lasts the median step.
  double frame_duration(std::size_t i) const;
  double session_duration() const;
  // Seconds covered by frames [begin, end).
  double span_duration(std::size_t begin, std::size_t end) const;
};

// Closed-interval region test around each interviewer angle. Throws
// DataError when the two regions overlap.
RegionSequence classify_frames(const std::vector<YawSample>& yaw, const ReferenceAngles& refs,
                               double half_width = 15.0);

RegionSequence make_sequence(std::vector<Region> labels, double frame_period = 0.7, double t0 = 0.0);

struct ContactEvent {
  Region target = Region::kInterviewer1;
  std::size_t begin = 0;  // frame span [begin, end)
  std::size_t end = 0;
  double start_time = 0.0;
  double end_time = 0.0;
  double duration = 0.0;  // seconds
};

struct ContactSummary {
  std::vector<ContactEvent> events;
  double average_duration = 0.0;
  double max_duration = 0.0;
  double contacts_per_minute = 0.0;
  double contact_percent = 0.0;
  double average_no_contact_duration = 0.0;  // mean gap, session edges included
};

// Maximal runs of one interviewer label lasting at least `min_frames`.
ContactSummary detect_contacts(const RegionSequence& seq, std::size_t min_frames = 3);

struct ExclusionEvent {
  Region excluded = Region::kInterviewer2;
  std::size_t begin = 0;  // frame span [begin, end)
  std::size_t end = 0;
  double start_time = 0.0;
  double end_time = 0.0;
  double duration = 0.0;
};

struct ExclusionSummary {
  std::vector<ExclusionEvent> events;  // ordered by begin, then party
  double max_duration = 0.0;
  double exclusions_per_minute = 0.0;
  double exclusion_percent = 0.0;      // union of spans over session duration
};

// Sliding windows (step one frame) in which one interviewer collects at
// least `quorum` frames and the other none; overlapping firing windows for
// the same excluded party merge into one episode.
ExclusionSummary detect_exclusions(const RegionSequence& seq, std::size_t window = 20, std::size_t quorum = 15);

enum class Speaker : std::uint8_t { kSubject, kInterviewer1, kInterviewer2, kNone };

struct RoleSample {
  double t = 0.0;
  Speaker speaker = Speaker::kNone;
};

std::vector<RoleSample> read_roles(const std::filesystem::path& path);
void write_roles(const std::filesystem::path& path, const std::vector<RoleSample>& roles);
const char* speaker_name(Speaker s);

// Percentages over the counted frames; rows sum to 100 when any frame counts.
struct RoleRow {
  double toward_addressed = 0.0;  // current speaker (listening) or last speaker (speaking)
  double neutral = 0.0;
  double other = 0.0;
  std::size_t frames = 0;
};

struct RoleDistribution {
  RoleRow listening;
  RoleRow speaking;
  std::size_t excluded_frames = 0;  // unknown role or no previous interviewer speaker
};

// Roles are change points: each annotation holds until the next one.
RoleDistribution role_distribution(const RegionSequence& seq, const std::vector<RoleSample>& roles);

struct SessionBehavior {
  ContactSummary contacts;
  ExclusionSummary exclusions;
  std::optional<RoleDistribution> roles;
};

// Table rows, in report order.
inline constexpr std::array<const char*, 8> kBehaviorStatistics = {
    "Average duration of contact",
    "Maximum duration of contact",
    "Average duration of NOT contacting anyone",
    "Number of contacts per minute",
    "Total duration of contact % during an interview",
    "Maximum duration of exclusions",
    "Number of exclusions per minute",
    "Total duration of exclusions % during an interview",
};

inline constexpr std::array<const char*, 6> kRoleStatistics = {
    "Listening: Interviewer who is speaking", "Listening: Neutral", "Listening: Other interviewer",
    "Speaking: Interviewer who spoke last",   "Speaking: Neutral",  "Speaking: Other interviewer",
};

std::vector<double> behavior_values(const SessionBehavior& b);
std::vector<double> role_values(const RoleDistribution& r);

}  // namespace orient
