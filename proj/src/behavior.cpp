#include "orient/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "orient/error.hpp"

namespace orient {

ReferenceAngles reference_angles(const Point2& subject, const Point2& i1, const Point2& i2, double subject_zero_deg) {
  if ((subject - i1).norm() <= 100.0 || (subject - i2).norm() <= 100.0 || (i1 - i2).norm() <= 100.0)
    throw DataError("reference angles: participants closer than 100 mm");
  ReferenceAngles r;
  r.interviewer1 = angle_diff_deg(bearing(subject, i1), subject_zero_deg);
  r.interviewer2 = angle_diff_deg(bearing(subject, i2), subject_zero_deg);
  const double both[] = {r.interviewer1, r.interviewer2};
  r.midpoint = circular_mean_deg(both);
  return r;
}

const char* region_name(Region r) {
  switch (r) {
    case Region::kInterviewer1: return "I1";
    case Region::kInterviewer2: return "I2";
    case Region::kNeutral: return "N";
  }
  return "?";
}

double RegionSequence::frame_duration(std::size_t i) const {
  const std::size_t n = timestamps.size();
  if (i + 1 < n) return timestamps[i + 1] - timestamps[i];
  if (n < 2) return 0.0;
  std::vector<double> steps;
  for (std::size_t k = 1; k < n; ++k) steps.push_back(timestamps[k] - timestamps[k - 1]);
  std::nth_element(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(steps.size() / 2), steps.end());
  return steps[steps.size() / 2];
}

double RegionSequence::span_duration(std::size_t begin, std::size_t end) const {
  if (end <= begin) return 0.0;
  const std::size_t n = timestamps.size();
  if (end < n) return timestamps[end] - timestamps[begin];
  return timestamps[n - 1] - timestamps[begin] + frame_duration(n - 1);
}

double RegionSequence::session_duration() const { return span_duration(0, timestamps.size()); }

RegionSequence classify_frames(const std::vector<YawSample>& yaw, const ReferenceAngles& refs, double half_width) {
  if (!(half_width > 0)) throw DataError("classify_frames: half-width must be positive");
  if (std::abs(angle_diff_deg(refs.interviewer1, refs.interviewer2)) <= 2.0 * half_width)
    throw DataError("classify_frames: interviewer regions overlap, use a smaller half-width");
  RegionSequence seq;
  seq.half_width = half_width;
  for (std::size_t i = 0; i < yaw.size(); ++i) {
    if (i > 0 && !(yaw[i].t > yaw[i - 1].t)) throw DataError("classify_frames: timestamps must increase");
    Region r = Region::kNeutral;
    if (std::abs(angle_diff_deg(yaw[i].yaw, refs.interviewer1)) <= half_width) r = Region::kInterviewer1;
    else if (std::abs(angle_diff_deg(yaw[i].yaw, refs.interviewer2)) <= half_width) r = Region::kInterviewer2;
    seq.timestamps.push_back(yaw[i].t);
    seq.labels.push_back(r);
  }
  return seq;
}

RegionSequence make_sequence(std::vector<Region> labels, double frame_period, double t0) {
  RegionSequence s;
  for (std::size_t i = 0; i < labels.size(); ++i) s.timestamps.push_back(t0 + frame_period * static_cast<double>(i));
  s.labels = std::move(labels);
  return s;
}

ContactSummary detect_contacts(const RegionSequence& seq, std::size_t min_frames) {
  ContactSummary out;
  const std::size_t n = seq.size();
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && seq.labels[j] == seq.labels[i]) ++j;
    if (seq.labels[i] != Region::kNeutral && j - i >= min_frames) {
      ContactEvent e;
      e.target = seq.labels[i];
      e.begin = i;
      e.end = j;
      e.start_time = seq.timestamps[i];
      e.duration = seq.span_duration(i, j);
      e.end_time = e.start_time + e.duration;
      out.events.push_back(e);
    }
    i = j;
  }
  const double session = seq.session_duration();
  double total = 0.0;
  for (const auto& e : out.events) {
    total += e.duration;
    out.max_duration = std::max(out.max_duration, e.duration);
  }
  if (!out.events.empty()) out.average_duration = total / static_cast<double>(out.events.size());
  if (session > 0) {
    out.contacts_per_minute = static_cast<double>(out.events.size()) / (session / 60.0);
    out.contact_percent = 100.0 * total / session;
  }
  // Gaps between contacts, including the stretches before the first and
  // after the last one.
  std::vector<double> gaps;
  std::size_t cursor = 0;
  for (const auto& e : out.events) {
    if (e.begin > cursor) gaps.push_back(seq.span_duration(cursor, e.begin));
    cursor = e.end;
  }
  if (n > cursor) gaps.push_back(seq.span_duration(cursor, n));
  if (!gaps.empty()) {
    double s = 0.0;
    for (double g : gaps) s += g;
    out.average_no_contact_duration = s / static_cast<double>(gaps.size());
  }
  return out;
}

ExclusionSummary detect_exclusions(const RegionSequence& seq, std::size_t window, std::size_t quorum) {
  ExclusionSummary out;
  const std::size_t n = seq.size();
  if (window == 0 || n < window) return out;
  std::vector<std::size_t> c1(n + 1, 0), c2(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    c1[i + 1] = c1[i] + (seq.labels[i] == Region::kInterviewer1);
    c2[i + 1] = c2[i] + (seq.labels[i] == Region::kInterviewer2);
  }
  std::optional<ExclusionEvent> open[2];  // index 0: I1 excluded, 1: I2 excluded
  std::vector<ExclusionEvent> episodes;
  auto close = [&](int party) {
    if (open[party]) episodes.push_back(*open[party]);
    open[party].reset();
  };
  for (std::size_t w = 0; w + window <= n; ++w) {
    const std::size_t a = c1[w + window] - c1[w];
    const std::size_t b = c2[w + window] - c2[w];
    int party = -1;
    if (a >= quorum && b == 0) party = 1;
    else if (b >= quorum && a == 0) party = 0;
    if (party < 0) continue;
    auto& ep = open[party];
    if (ep && w < ep->end) {
      ep->end = w + window;
    } else {
      close(party);
      ep = ExclusionEvent{party == 0 ? Region::kInterviewer1 : Region::kInterviewer2, w, w + window};
    }
  }
  close(0);
  close(1);
  std::sort(episodes.begin(), episodes.end(), [](const ExclusionEvent& x, const ExclusionEvent& y) {
    return x.begin != y.begin ? x.begin < y.begin : x.excluded < y.excluded;
  });
  std::vector<bool> covered(n, false);
  for (auto& e : episodes) {
    e.start_time = seq.timestamps[e.begin];
    e.duration = seq.span_duration(e.begin, e.end);
    e.end_time = e.start_time + e.duration;
    out.max_duration = std::max(out.max_duration, e.duration);
    for (std::size_t i = e.begin; i < e.end; ++i) covered[i] = true;
  }
  out.events = std::move(episodes);
  const double session = seq.session_duration();
  if (session > 0) {
    double union_time = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (covered[i]) union_time += seq.frame_duration(i);
    out.exclusions_per_minute = static_cast<double>(out.events.size()) / (session / 60.0);
    out.exclusion_percent = 100.0 * union_time / session;
  }
  return out;
}

const char* speaker_name(Speaker s) {
  switch (s) {
    case Speaker::kSubject: return "subject";
    case Speaker::kInterviewer1: return "i1";
    case Speaker::kInterviewer2: return "i2";
    case Speaker::kNone: return "none";
  }
  return "none";
}

std::vector<RoleSample> read_roles(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open role file " + path.string());
  std::vector<RoleSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RoleSample r;
      r.t = j.at("t").get<double>();
      const auto s = j.at("speaker").get<std::string>();
      if (s == "subject") r.speaker = Speaker::kSubject;
      else if (s == "i1") r.speaker = Speaker::kInterviewer1;
      else if (s == "i2") r.speaker = Speaker::kInterviewer2;
      else if (s == "none") r.speaker = Speaker::kNone;
      else throw DataError("unknown speaker '" + s + "'");
      if (!out.empty() && !(r.t > out.back().t)) throw DataError("role timestamps must increase");
      out.push_back(r);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_roles(const std::filesystem::path& path, const std::vector<RoleSample>& roles) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& r : roles) out << nlohmann::json{{"t", r.t}, {"speaker", speaker_name(r.speaker)}}.dump() << '\n';
}

RoleDistribution role_distribution(const RegionSequence& seq, const std::vector<RoleSample>& roles) {
  RoleDistribution d;
  std::array<std::size_t, 3> listen{}, speak{};
  std::size_t next = 0;
  std::optional<Speaker> current;
  std::optional<Speaker> last_interviewer;
  auto region_of = [](Speaker s) { return s == Speaker::kInterviewer1 ? Region::kInterviewer1 : Region::kInterviewer2; };
  for (std::size_t i = 0; i < seq.size(); ++i) {
    while (next < roles.size() && roles[next].t <= seq.timestamps[i]) {
      current = roles[next].speaker;
      if (*current == Speaker::kInterviewer1 || *current == Speaker::kInterviewer2) {
        last_interviewer = current;
      }
      ++next;
    }
    const Region label = seq.labels[i];
    if (current && (*current == Speaker::kInterviewer1 || *current == Speaker::kInterviewer2)) {
      const Region target = region_of(*current);
      ++listen[label == Region::kNeutral ? 1 : (label == target ? 0 : 2)];
    } else if (current && *current == Speaker::kSubject && last_interviewer) {
      const Region target = region_of(*last_interviewer);
      ++speak[label == Region::kNeutral ? 1 : (label == target ? 0 : 2)];
    } else {
      ++d.excluded_frames;
    }
  }
  auto fill = [](RoleRow& row, const std::array<std::size_t, 3>& c) {
    row.frames = c[0] + c[1] + c[2];
    if (row.frames == 0) return;
    const double n = static_cast<double>(row.frames);
    row.toward_addressed = 100.0 * static_cast<double>(c[0]) / n;
    row.neutral = 100.0 * static_cast<double>(c[1]) / n;
    row.other = 100.0 * static_cast<double>(c[2]) / n;
  };
  fill(d.listening, listen);
  fill(d.speaking, speak);
  return d;
}

std::vector<double> behavior_values(const SessionBehavior& b) {
  return {b.contacts.average_duration,           b.contacts.max_duration,
          b.contacts.average_no_contact_duration, b.contacts.contacts_per_minute,
          b.contacts.contact_percent,            b.exclusions.max_duration,
          b.exclusions.exclusions_per_minute,    b.exclusions.exclusion_percent};
}

std::vector<double> role_values(const RoleDistribution& r) {
  return {r.listening.toward_addressed, r.listening.neutral, r.listening.other,
          r.speaking.toward_addressed,  r.speaking.neutral,  r.speaking.other};
}

}  // namespace orient
