#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "orient/angle.hpp"
#include "orient/error.hpp"

namespace orient {

// Conic a x^2 + b xy + c y^2 + d x + e y + f = 0 together with its
// centre/axes/orientation form. Coefficients are scaled so 4ac - b^2 = 1.
template <typename Scalar>
struct EllipseFitT {
  using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
  using Coeffs = Eigen::Matrix<Scalar, 6, 1>;

  Coeffs conic = Coeffs::Zero();
  Vec2 center = Vec2::Zero();
  Scalar semi_major = 0;
  Scalar semi_minor = 0;
  Scalar orientation_deg = 0;  // long axis, [0, 180)

  // Unit vector along the long axis.
  Vec2 major_axis() const {
    const Scalar r = orientation_deg * Scalar(kRadPerDeg);
    return {std::cos(r), std::sin(r)};
  }

  Scalar algebraic(Scalar x, Scalar y) const {
    return conic[0] * x * x + conic[1] * x * y + conic[2] * y * y + conic[3] * x + conic[4] * y + conic[5];
  }
};

using EllipseFit = EllipseFitT<double>;

namespace detail {

// Centre, semi-axes and long-axis angle from conic coefficients.
template <typename Scalar>
bool conic_to_parametric(EllipseFitT<Scalar>& fit) {
  const auto& k = fit.conic;
  const Scalar a = k[0], b = k[1], c = k[2], d = k[3], e = k[4], f = k[5];
  const Scalar den = b * b - 4 * a * c;
  if (!(den < 0)) return false;
  const Scalar x0 = (2 * c * d - b * e) / den;
  const Scalar y0 = (2 * a * e - b * d) / den;
  const Scalar f0 = f + (d * x0 + e * y0) / 2;

  Eigen::Matrix<Scalar, 2, 2> q;
  q << a, b / 2, b / 2, c;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, 2, 2>> es(q);
  const auto& lam = es.eigenvalues();  // ascending
  if (!(lam[0] > 0) || !(f0 < 0)) return false;
  const Scalar major = std::sqrt(-f0 / lam[0]);
  const Scalar minor = std::sqrt(-f0 / lam[1]);
  const auto v = es.eigenvectors().col(0);
  fit.center = {x0, y0};
  fit.semi_major = major;
  fit.semi_minor = minor;
  fit.orientation_deg = static_cast<Scalar>(normalize_axis_deg(std::atan2(v[1], v[0]) * kDegPerRad));
  return std::isfinite(major) && std::isfinite(minor);
}

}  // namespace detail

// Direct least-squares ellipse fit with the ellipse-specific constraint
// 4ac - b^2 = 1, solved through the partitioned scatter matrix so the
// eigenproblem stays well conditioned for noise-free data. Input is
// centred and scaled internally. Throws DataError for fewer than six
// points and DegenerateError when no elliptic solution exists.
template <typename Scalar>
EllipseFitT<Scalar> fit_ellipse_direct(const Eigen::Matrix<Scalar, 2, Eigen::Dynamic>& pts) {
  using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
  using MatX3 = Eigen::Matrix<Scalar, Eigen::Dynamic, 3>;
  const Eigen::Index n = pts.cols();
  if (n < 6) throw DataError("ellipse fit needs at least 6 points");

  const Eigen::Matrix<Scalar, 2, 1> mean = pts.rowwise().mean();
  const Eigen::Matrix<Scalar, 2, Eigen::Dynamic> centred = pts.colwise() - mean;
  const Scalar scale = std::sqrt(centred.squaredNorm() / Scalar(n));
  if (!(scale > std::numeric_limits<Scalar>::epsilon())) throw DegenerateError("ellipse fit: coincident points");
  const auto x = (centred.row(0).transpose() / scale).eval();
  const auto y = (centred.row(1).transpose() / scale).eval();

  MatX3 d1(n, 3), d2(n, 3);
  d1.col(0) = x.array().square();
  d1.col(1) = x.cwiseProduct(y);
  d1.col(2) = y.array().square();
  d2.col(0) = x;
  d2.col(1) = y;
  d2.col(2).setOnes();

  const Mat3 s1 = d1.transpose() * d1;
  const Mat3 s2 = d1.transpose() * d2;
  const Mat3 s3 = d2.transpose() * d2;
  Eigen::FullPivLU<Mat3> lu(s3);
  lu.setThreshold(Scalar(1e-10));
  if (lu.rank() < 3) throw DegenerateError("ellipse fit: collinear or degenerate scatter");
  const Mat3 t = -lu.solve(s2.transpose());
  const Mat3 m = s1 + s2 * t;
  // Premultiply by the inverse of the 3x3 constraint block.
  Mat3 reduced;
  reduced.row(0) = m.row(2) / 2;
  reduced.row(1) = -m.row(1);
  reduced.row(2) = m.row(0) / 2;

  Eigen::EigenSolver<Mat3> es(reduced);
  int best = -1;
  Scalar best_eval = std::numeric_limits<Scalar>::infinity();
  for (int i = 0; i < 3; ++i) {
    const auto vc = es.eigenvectors().col(i);
    if (vc.imag().cwiseAbs().maxCoeff() > Scalar(1e-9) * vc.real().cwiseAbs().maxCoeff()) continue;
    const Vec3 v = vc.real();
    const Scalar cond = 4 * v[0] * v[2] - v[1] * v[1];
    if (!(cond > 0)) continue;
    const Scalar ev = std::abs(es.eigenvalues()[i].real());
    if (ev < best_eval) {
      best_eval = ev;
      best = i;
    }
  }
  if (best < 0) throw DegenerateError("ellipse fit: no eigenvector satisfies the ellipse constraint");

  const Vec3 a1 = es.eigenvectors().col(best).real();
  const Vec3 a2 = t * a1;

  // Undo the normalisation x' = (x - mx) / s.
  const Scalar s2inv = 1 / (scale * scale);
  const Scalar sinv = 1 / scale;
  const Scalar mx = mean[0], my = mean[1];
  const Scalar a = a1[0] * s2inv, b = a1[1] * s2inv, c = a1[2] * s2inv;
  const Scalar dd = a2[0] * sinv, ee = a2[1] * sinv, ff = a2[2];
  EllipseFitT<Scalar> fit;
  fit.conic << a, b, c, dd - 2 * a * mx - b * my, ee - 2 * c * my - b * mx,
      a * mx * mx + b * mx * my + c * my * my - dd * mx - ee * my + ff;
  Scalar norm = 4 * a * c - b * b;
  if (!(norm > 0)) throw DegenerateError("ellipse fit: solution is not an ellipse");
  fit.conic /= std::sqrt(norm);
  if (fit.conic[0] < 0) fit.conic = -fit.conic;
  if (!detail::conic_to_parametric(fit)) throw DegenerateError("ellipse fit: imaginary or degenerate ellipse");
  return fit;
}

inline EllipseFit fit_ellipse_direct(const Eigen::Matrix2Xd& pts) { return fit_ellipse_direct<double>(pts); }

}  // namespace orient
