#pragma once

#include <cmath>
#include <numbers>
#include <span>

namespace orient {

inline constexpr double kDegPerRad = 180.0 / std::numbers::pi;
inline constexpr double kRadPerDeg = std::numbers::pi / 180.0;

// Wraps any angle in degrees into [-180, 180).
inline double normalize_deg(double deg) {
  double a = std::fmod(deg + 180.0, 360.0);
  if (a < 0.0) a += 360.0;
  a -= 180.0;
  // fmod can return exactly 360 - eps rounding up to 180 after the shift.
  if (a >= 180.0) a -= 360.0;
  return a;
}

// Wraps into [0, 180) for axis-like quantities (undirected lines).
inline double normalize_axis_deg(double deg) {
  double a = std::fmod(deg, 180.0);
  if (a < 0.0) a += 180.0;
  if (a >= 180.0) a -= 180.0;
  return a;
}

// Wraps into [-90, 90) for axis-like quantities measured against a reference.
inline double normalize_half_deg(double deg) {
  return normalize_axis_deg(deg + 90.0) - 90.0;
}

// Signed smallest rotation taking `from` to `to`, in [-180, 180).
inline double angle_diff_deg(double to, double from) { return normalize_deg(to - from); }

// Circular mean of unit vectors, normalized into [-180, 180).
inline double circular_mean_deg(std::span<const double> degs) {
  double s = 0.0;
  double c = 0.0;
  for (double d : degs) {
    s += std::sin(d * kRadPerDeg);
    c += std::cos(d * kRadPerDeg);
  }
  return normalize_deg(std::atan2(s, c) * kDegPerRad);
}

}  // namespace orient
