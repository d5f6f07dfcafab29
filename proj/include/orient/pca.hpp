#pragma once

#include <Eigen/Dense>

#include "orient/error.hpp"

namespace orient {

template <typename Scalar, int Dim>
struct PcaResultT {
  using Vec = Eigen::Matrix<Scalar, Dim, 1>;
  using Mat = Eigen::Matrix<Scalar, Dim, Dim>;
  Vec mean = Vec::Zero();
  Vec eigenvalues = Vec::Zero();   // descending, sample covariance units
  Mat eigenvectors = Mat::Zero();  // columns, matching eigenvalues
};

using Pca2 = PcaResultT<double, 2>;
using Pca3 = PcaResultT<double, 3>;

// Principal axes of the sample covariance. Each eigenvector is signed so
// that its first non-negligible component is positive.
template <typename Scalar, int Dim>
PcaResultT<Scalar, Dim> pca(const Eigen::Matrix<Scalar, Dim, Eigen::Dynamic>& pts) {
  const Eigen::Index n = pts.cols();
  if (n < Dim + 1) throw DataError("pca: too few points");
  PcaResultT<Scalar, Dim> out;
  out.mean = pts.rowwise().mean();
  const Eigen::Matrix<Scalar, Dim, Eigen::Dynamic> c = pts.colwise() - out.mean;
  const Eigen::Matrix<Scalar, Dim, Dim> cov = (c * c.transpose()) / Scalar(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Dim, Dim>> es(cov);
  for (int i = 0; i < Dim; ++i) {
    const int src = Dim - 1 - i;
    out.eigenvalues[i] = std::max(Scalar(0), es.eigenvalues()[src]);
    Eigen::Matrix<Scalar, Dim, 1> v = es.eigenvectors().col(src);
    const Scalar tol = Scalar(1e-12) * v.cwiseAbs().maxCoeff();
    for (int k = 0; k < Dim; ++k) {
      if (std::abs(v[k]) > tol) {
        if (v[k] < 0) v = -v;
        break;
      }
    }
    out.eigenvectors.col(i) = v;
  }
  return out;
}

inline Pca2 pca2(const Eigen::Matrix2Xd& pts) { return pca<double, 2>(pts); }
inline Pca3 pca3(const Eigen::Matrix3Xd& pts) { return pca<double, 3>(pts); }

}  // namespace orient
