#pragma once

// Comparison frameworks: the SPD Log-Euclidean chart followed by rescaling to
// unit diagonal, and raw Euclidean entries. Plus the diagnostics that expose
// where each one leaves the correlation manifold.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "corrlog/matrix_types.hpp"
#include "corrlog/symkernel.hpp"
#include "corrlog/trajectory.hpp"

namespace corrlog {

inline SymmetricMatrix spd_log(const SPDMatrix& a) { return mat_log(a); }
inline SPDMatrix spd_exp(const SymmetricMatrix& s) { return mat_exp(s); }

struct Rescaled {
  CorrelationMatrix correlation;
  DiagonalMatrix scaling;  // Delta = Diag(A)^{1/2}, so A = Delta C Delta
};

/// Cor(A) = Delta^{-1} A Delta^{-1}, Delta = Diag(A)^{1/2}.
inline Rescaled cor_rescale(const SPDMatrix& a) {
  const Vector delta = a.matrix().diagonal().cwiseSqrt();
  if (!(delta.array() > 0.0).all()) throw NotPositiveDefinite("cor_rescale: non-positive diagonal");
  const Vector inv = delta.cwiseInverse();
  return {CorrelationMatrix(unchecked, inv.asDiagonal() * a.matrix() * inv.asDiagonal()),
          DiagonalMatrix(delta)};
}

/// Per-entry |after - before| as a percentage of the mean absolute
/// off-diagonal entry of `before`. Diagonal entries are zero.
inline Matrix scaling_deviation_entries(const SPDMatrix& before, const CorrelationMatrix& after) {
  if (before.dim() != after.dim()) throw ShapeMismatch("scaling_deviation: dimensions differ");
  const Index n = before.dim();
  Matrix diff = (after.matrix() - before.matrix()).cwiseAbs();
  diff.diagonal().setZero();
  if (n < 2) return diff;
  Matrix off = before.matrix().cwiseAbs();
  off.diagonal().setZero();
  const double mean = off.sum() / static_cast<double>(n * (n - 1));
  if (mean == 0.0) {
    // `before` is diagonal; rescaling leaves the (zero) correlations unchanged.
    return Matrix::Zero(n, n);
  }
  return diff * (100.0 / mean);
}

/// Largest off-diagonal change caused by rescaling, in percent of the mean
/// absolute off-diagonal entry of the matrix before rescaling.
inline double scaling_deviation(const SPDMatrix& before, const CorrelationMatrix& after) {
  return scaling_deviation_entries(before, after).maxCoeff();
}

/// Per-time diagnostics of a regressed trajectory. scaling_factors and
/// deviation_percent are filled only when rescaling was applied; otherwise
/// they are empty.
struct DiagnosticSeries {
  std::vector<double> times;
  std::vector<double> min_eigenvalues;
  std::vector<Vector> scaling_factors;
  std::vector<double> deviation_percent;
  double max_relative_deviation = 0.0;
  std::size_t nonpositive_count = 0;
};

inline double min_eigenvalue(const Matrix& a) { return detail::eigenvalues_of(a)(0); }

inline DiagnosticSeries min_eigenvalue_series(const Trajectory& traj) {
  DiagnosticSeries out;
  out.times = traj.times();
  out.min_eigenvalues.reserve(traj.size());
  for (const Matrix& m : traj.values()) {
    const double lambda = min_eigenvalue(m);
    out.min_eigenvalues.push_back(lambda);
    if (lambda <= 0.0) ++out.nonpositive_count;
  }
  return out;
}

}  // namespace corrlog
