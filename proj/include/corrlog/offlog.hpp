#pragma once

// Off-log diffeomorphism between full-rank correlation matrices and hollow
// matrices:
//
//   Log(C) = Off(log C),        Exp(S) = exp(D(S) + S),
//
// where D(S) is the unique diagonal matrix making exp(D + S) unit-diagonal.

#include <cmath>
#include <string>

#include "corrlog/flat_geometry.hpp"
#include "corrlog/matrix_types.hpp"
#include "corrlog/quadratic_form.hpp"
#include "corrlog/symkernel.hpp"

namespace corrlog {

struct SolveDiagOptions {
  double eps = 1e-12;
  int max_iterations = 10000;
};

struct SolveDiagReport {
  DiagonalMatrix diagonal;
  int iterations = 0;
  double last_step = 0.0;
};

/// Fixed-point iteration D_{k+1} = D_k - log(diag(exp(D_k + S))) from D_0 = 0,
/// stopped once the Euclidean norm of the update is at most eps. Converges
/// linearly.
inline SolveDiagReport solve_diag_report(const HollowMatrix& s, const SolveDiagOptions& opt = {}) {
  const Index n = s.dim();
  Vector d = Vector::Zero(n);
  Matrix shifted = s.matrix();
  double step_norm = 0.0;
  for (int k = 1; k <= opt.max_iterations; ++k) {
    shifted.diagonal() = d;
    const EigenDecomposition e = detail::eig_of(shifted);
    const Vector exp_delta = e.delta.array().exp().matrix();
    // diag(P Diag(exp delta) P^T)_i = sum_j P_ij^2 exp(delta_j)
    const Vector step = (e.P.array().square().matrix() * exp_delta).array().log().matrix();
    if (!step.allFinite()) throw NonConvergence("solve_diag: iterate became non-finite");
    d -= step;
    step_norm = step.norm();
    if (step_norm <= opt.eps) return {DiagonalMatrix(d), k, step_norm};
  }
  throw MaxIterationsExceeded("solve_diag", opt.max_iterations, step_norm);
}

inline DiagonalMatrix solve_diag(const HollowMatrix& s, const SolveDiagOptions& opt = {}) {
  return solve_diag_report(s, opt).diagonal;
}

namespace detail {

/// Eigendecomposition of D(S) + S, the point where exp is differentiated.
inline EigenDecomposition offlog_base_point(const HollowMatrix& s, const SolveDiagOptions& opt) {
  Matrix a = s.matrix();
  a.diagonal() = solve_diag(s, opt).diagonal();
  return eig_of(a);
}

/// H0_il = sum_{j,k} P_ij P_ik P_lj P_lk exp^[1](delta_j, delta_k).
///
/// Contracted as Z W Z^T with Z the n x n(n+1)/2 matrix of columns p_j o p_k
/// (j <= k) and W the matching divided differences, doubled off the diagonal.
inline Matrix h0_contraction(const EigenDecomposition& e) {
  const Index n = e.dim();
  const Matrix table = exp_divided_differences(e.delta);
  Matrix z(n, n * (n + 1) / 2);
  Matrix zw(n, z.cols());
  Index col = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index k = j; k < n; ++k, ++col) {
      z.col(col) = e.P.col(j).cwiseProduct(e.P.col(k));
      zw.col(col) = z.col(col) * (j == k ? table(j, k) : 2.0 * table(j, k));
    }
  }
  Matrix h = zw * z.transpose();
  return symmetrized(h);
}

/// d_S D(Y) = -diag(H0^{-1} diag(d_{D(S)+S} exp(Y))), given the base point.
inline Vector d_diag_at(const EigenDecomposition& e, const HollowMatrix& y) {
  const Vector v = daleckii_krein(e, exp_divided_differences(e.delta), y.matrix()).diagonal();
  Eigen::LLT<Matrix> llt(h0_contraction(e));
  if (llt.info() != Eigen::Success) throw SingularMatrix("d_diag: H0 is not positive definite");
  return -llt.solve(v);
}

inline CorrelationMatrix unit_diagonal_or_throw(Matrix m, const char* what) {
  const double residual = (m.diagonal().array() - 1.0).abs().maxCoeff();
  if (!(residual <= kRepairTolerance)) {
    throw NumericalError(std::string(what) + ": diagonal residual " + std::to_string(residual));
  }
  return {unchecked, m};
}

inline HollowMatrix hollow_or_throw(const Matrix& m, const char* what) {
  const double residual = m.diagonal().cwiseAbs().maxCoeff();
  if (!(residual <= kRepairTolerance * scale_of(m))) {
    throw NumericalError(std::string(what) + ": diagonal residual " + std::to_string(residual));
  }
  return {unchecked, m};
}

}  // namespace detail

/// H0 evaluated at D(S) + S. Symmetric positive definite.
inline SPDMatrix h0_matrix(const EigenDecomposition& base_point) {
  return {unchecked, detail::h0_contraction(base_point)};
}

inline SPDMatrix h0_matrix(const HollowMatrix& s, const SolveDiagOptions& opt = {}) {
  return h0_matrix(detail::offlog_base_point(s, opt));
}

/// Differential of S -> D(S) in direction Y.
inline DiagonalMatrix d_diag(const HollowMatrix& s, const HollowMatrix& y,
                             const SolveDiagOptions& opt = {}) {
  if (s.dim() != y.dim()) throw ShapeMismatch("d_diag: dimensions differ");
  return DiagonalMatrix(detail::d_diag_at(detail::offlog_base_point(s, opt), y));
}

inline HollowMatrix ol_log(const CorrelationMatrix& c) {
  return HollowMatrix::off(mat_log(c.spd()));
}

/// Diagonal residuals of exp(D(S) + S) up to 1e-8 are snapped to one.
inline CorrelationMatrix ol_exp(const HollowMatrix& s, const SolveDiagOptions& opt = {}) {
  Matrix a = s.matrix();
  a.diagonal() = solve_diag(s, opt).diagonal();
  return detail::unit_diagonal_or_throw(mat_exp(SymmetricMatrix(unchecked, a)).matrix(), "ol_exp");
}

inline HollowMatrix ol_dlog(const CorrelationMatrix& c, const HollowMatrix& x) {
  if (c.dim() != x.dim()) throw ShapeMismatch("ol_dlog: dimensions differ");
  return HollowMatrix::off(dlog(c.spd(), x.symmetric()));
}

/// d_{D(S)+S} exp(Y + d_S D(Y)).
inline HollowMatrix ol_dexp(const HollowMatrix& s, const HollowMatrix& y,
                            const SolveDiagOptions& opt = {}) {
  if (s.dim() != y.dim()) throw ShapeMismatch("ol_dexp: dimensions differ");
  const EigenDecomposition e = detail::offlog_base_point(s, opt);
  Matrix direction = y.matrix();
  direction.diagonal() = detail::d_diag_at(e, y);
  const Matrix out =
      detail::daleckii_krein(e, exp_divided_differences(e.delta), detail::symmetrized(direction));
  return detail::hollow_or_throw(out, "ol_dexp");
}

/// Chart bundle consumed by FlatGeometry.
struct OffLogChart {
  using Coord = HollowMatrix;
  using Form = HolQuadraticForm;

  static Coord log(const CorrelationMatrix& c) { return ol_log(c); }
  static CorrelationMatrix exp(const Coord& s) { return ol_exp(s); }
  static Coord dlog(const CorrelationMatrix& c, const HollowMatrix& x) { return ol_dlog(c, x); }
  static HollowMatrix dexp(const Coord& s, const Coord& y) { return ol_dexp(s, y); }
};

using OffLogGeometry = FlatGeometry<OffLogChart>;

}  // namespace corrlog
