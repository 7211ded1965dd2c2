#pragma once

// Three-component PCA of a trajectory for visualization.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "corrlog/matrix_types.hpp"
#include "corrlog/trajectory.hpp"

namespace corrlog {

/// Upper triangle, row-major. Hollow trajectories drop the diagonal
/// (n(n-1)/2 entries); every other space keeps it (n(n+1)/2 entries).
inline Vector vectorize(const Matrix& m, SpaceTag tag) {
  const Index n = m.rows();
  const bool with_diagonal = tag != SpaceTag::hollow;
  const Index len = with_diagonal ? n * (n + 1) / 2 : n * (n - 1) / 2;
  Vector v(len);
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = with_diagonal ? i : i + 1; j < n; ++j) v(k++) = m(i, j);
  }
  return v;
}

struct PcaResult {
  Matrix coordinates;         // T x 3
  Eigen::Vector3d variance;   // along each component, 1/(T-1) normalization
  Eigen::Vector3d ratio;      // variance / total_variance
  double total_variance = 0.0;
  Matrix loadings;            // dim x 3, unit columns (zero where the variance is zero)
};

/// PCA of the rows of `data` (T x dim). Components come from the covariance
/// when dim <= T and from the T x T Gram matrix otherwise; both give the same
/// nonzero spectrum. Each component's largest-magnitude loading is positive.
inline PcaResult pca3_rows(const Matrix& data) {
  const Index t = data.rows();
  const Index dim = data.cols();
  if (t < 4) throw InvalidArgument("pca3 needs at least 4 points");

  std::vector<Index> distinct{0};
  for (Index i = 1; i < t && distinct.size() < 3; ++i) {
    const bool seen = std::any_of(distinct.begin(), distinct.end(),
                                  [&](Index r) { return data.row(i) == data.row(r); });
    if (!seen) distinct.push_back(i);
  }
  if (distinct.size() < 3) throw DegenerateCovariance("pca3: fewer than 3 distinct points");

  const Matrix centered = data.rowwise() - data.colwise().mean();
  const double scale = 1.0 / static_cast<double>(t - 1);
  const Index k = std::min<Index>(3, std::min(dim, t));

  PcaResult out;
  out.coordinates = Matrix::Zero(t, 3);
  out.loadings = Matrix::Zero(dim, 3);
  out.variance.setZero();
  out.total_variance = centered.squaredNorm() * scale;

  if (dim <= t) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(scale * centered.transpose() * centered);
    if (es.info() != Eigen::Success) throw NonConvergence("pca3: eigensolver failed");
    for (Index c = 0; c < k; ++c) {
      const Index src = dim - 1 - c;
      out.variance(c) = std::max(0.0, es.eigenvalues()(src));
      out.loadings.col(c) = es.eigenvectors().col(src);
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(scale * centered * centered.transpose());
    if (es.info() != Eigen::Success) throw NonConvergence("pca3: eigensolver failed");
    for (Index c = 0; c < k; ++c) {
      const Index src = t - 1 - c;
      const double lambda = std::max(0.0, es.eigenvalues()(src));
      out.variance(c) = lambda;
      const Vector v = centered.transpose() * es.eigenvectors().col(src);
      const double norm = v.norm();
      // Null directions carry no variance; leave their loadings at zero.
      if (norm > 1e-12 * std::sqrt(std::max(out.total_variance, 1e-300) / scale)) {
        out.loadings.col(c) = v / norm;
      }
    }
  }

  for (Index c = 0; c < 3; ++c) {
    Index arg = 0;
    if (out.loadings.col(c).cwiseAbs().maxCoeff(&arg) > 0.0 && out.loadings(arg, c) < 0.0) {
      out.loadings.col(c) *= -1.0;
    }
  }
  out.coordinates = centered * out.loadings;
  out.ratio = out.total_variance > 0.0 ? Eigen::Vector3d(out.variance / out.total_variance)
                                       : Eigen::Vector3d::Zero();
  return out;
}

inline Matrix vectorize_trajectory(const Trajectory& traj) {
  const Vector first = vectorize(traj.value(0), traj.tag());
  Matrix data(static_cast<Index>(traj.size()), first.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    data.row(static_cast<Index>(i)) = vectorize(traj.value(i), traj.tag()).transpose();
  }
  return data;
}

inline PcaResult pca3(const Trajectory& traj) { return pca3_rows(vectorize_trajectory(traj)); }

}  // namespace corrlog
