#pragma once

// Dense symmetric matrix functions and their Frechet derivatives.
//
// Derivatives use the Daleckii-Krein form: with A = P Diag(d) P^T,
//   Df(A)[X] = P ((P^T X P) o F) P^T,   F_ij = f^[1](d_i, d_j),
// where f^[1] is the first divided difference of f and o the entrywise product.

#include <cmath>
#include <string>

#include "corrlog/matrix_types.hpp"

namespace corrlog {

/// Below this gap the divided differences switch to their series expansion.
inline constexpr double kDividedDifferenceSwitch = 1e-7;

namespace detail {

inline EigenDecomposition eig_of(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) {
    throw NonConvergence("symmetric eigensolver failed to converge");
  }
  return {es.eigenvectors(), es.eigenvalues()};
}

inline void require_spd_spectrum(const Vector& ascending, const char* what) {
  const double floor = eig_floor(ascending(ascending.size() - 1));
  if (!(ascending(0) > floor)) {
    throw NotPositiveDefinite(std::string(what) + ": smallest eigenvalue " +
                              std::to_string(ascending(0)) + " is not above " +
                              std::to_string(floor));
  }
}

inline Matrix spectral_apply(const EigenDecomposition& e, const Vector& values) {
  return e.P * values.asDiagonal() * e.P.transpose();
}

template <class DividedDifference>
Matrix divided_difference_table(const Vector& delta, DividedDifference dd) {
  const Index n = delta.size();
  Matrix table(n, n);
  for (Index j = 0; j < n; ++j) {
    table(j, j) = dd(delta(j), delta(j));
    for (Index i = j + 1; i < n; ++i) {
      table(i, j) = table(j, i) = dd(delta(i), delta(j));
    }
  }
  return table;
}

inline Matrix daleckii_krein(const EigenDecomposition& e, const Matrix& table, const Matrix& x) {
  const Matrix rotated = e.P.transpose() * x * e.P;
  return e.P * rotated.cwiseProduct(table) * e.P.transpose();
}

}  // namespace detail

/// Eigenvalues ascending, eigenvectors orthonormal.
inline EigenDecomposition sym_eig(const SymmetricMatrix& a) { return detail::eig_of(a.matrix()); }

/// (e^a - e^b) / (a - b), extended continuously by e^a at a == b.
///
/// Evaluated as e^m sinh(h)/h with m = (a+b)/2, h = (a-b)/2, which is the same
/// quantity without the cancellation of e^a - e^b. For |a - b| below
/// kDividedDifferenceSwitch the sinch series 1 + h^2/6 + h^4/120 is used.
inline double divided_difference_exp(double a, double b) {
  const double m = 0.5 * (a + b);
  const double h = 0.5 * (a - b);
  if (std::abs(a - b) < kDividedDifferenceSwitch) {
    const double h2 = h * h;
    return std::exp(m) * (1.0 + h2 / 6.0 + h2 * h2 / 120.0);
  }
  return std::exp(m) * (std::sinh(h) / h);
}

/// (log a - log b) / (a - b) for a, b > 0, extended by 1/a at a == b.
///
/// Uses log(a/b) = 2 artanh(t), t = (a-b)/(a+b); the series
/// 1 + t^2/3 + t^4/5 replaces artanh(t)/t when |t| is below the switch.
inline double divided_difference_log(double a, double b) {
  const double s = a + b;
  const double t = (a - b) / s;
  if (std::abs(t) < kDividedDifferenceSwitch) {
    const double t2 = t * t;
    return (2.0 / s) * (1.0 + t2 / 3.0 + t2 * t2 / 5.0);
  }
  return 2.0 * std::atanh(t) / (a - b);
}

/// Table F_ij = exp^[1](delta_i, delta_j).
inline Matrix exp_divided_differences(const Vector& delta) {
  return detail::divided_difference_table(delta, divided_difference_exp);
}

/// Table F_ij = log^[1](lambda_i, lambda_j); requires positive lambda.
inline Matrix log_divided_differences(const Vector& lambda) {
  return detail::divided_difference_table(lambda, divided_difference_log);
}

inline SPDMatrix mat_exp(const EigenDecomposition& e) {
  return {unchecked, detail::spectral_apply(e, e.delta.array().exp().matrix())};
}

inline SPDMatrix mat_exp(const SymmetricMatrix& a) { return mat_exp(sym_eig(a)); }

/// Throws NotPositiveDefinite if the spectrum is at or below the floor.
inline SymmetricMatrix mat_log(const EigenDecomposition& e) {
  detail::require_spd_spectrum(e.delta, "mat_log");
  return {unchecked, detail::spectral_apply(e, e.delta.array().log().matrix())};
}

inline SymmetricMatrix mat_log(const SPDMatrix& a) { return mat_log(detail::eig_of(a.matrix())); }

/// Frechet derivative of exp at the decomposed point, applied to x.
inline SymmetricMatrix dexp(const EigenDecomposition& at, const SymmetricMatrix& x) {
  if (x.dim() != at.dim()) throw ShapeMismatch("dexp: dimensions differ");
  return {unchecked, detail::daleckii_krein(at, exp_divided_differences(at.delta), x.matrix())};
}

inline SymmetricMatrix dexp(const SymmetricMatrix& at, const SymmetricMatrix& x) {
  return dexp(sym_eig(at), x);
}

/// Frechet derivative of log at the decomposed SPD point, applied to x.
inline SymmetricMatrix dlog(const EigenDecomposition& at, const SymmetricMatrix& x) {
  if (x.dim() != at.dim()) throw ShapeMismatch("dlog: dimensions differ");
  detail::require_spd_spectrum(at.delta, "dlog");
  return {unchecked, detail::daleckii_krein(at, log_divided_differences(at.delta), x.matrix())};
}

inline SymmetricMatrix dlog(const SPDMatrix& at, const SymmetricMatrix& x) {
  return dlog(detail::eig_of(at.matrix()), x);
}

}  // namespace corrlog
