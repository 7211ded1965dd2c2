#pragma once

// Log-scaling diffeomorphism between full-rank correlation matrices and
// symmetric matrices with zero row sums:
//
//   Log*(C) = log(D*(C) C D*(C)),      Exp*(S) = Cor(exp S),
//
// where D*(C) is the positive diagonal scaling that gives the scaled matrix
// unit row sums (equivalently, a logarithm with zero row sums).

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "corrlog/flat_geometry.hpp"
#include "corrlog/matrix_types.hpp"
#include "corrlog/quadratic_form.hpp"
#include "corrlog/symkernel.hpp"

namespace corrlog {

struct ScalingOptions {
  double tolerance = 1e-12;  // on the Euclidean norm of the gradient
  int max_iterations = 100;
  double armijo = 1e-4;
};

struct NewtonIterate {
  double objective;
  double gradient_norm;
  double step_length;  // 0 for the terminal record
};

struct ScalingReport {
  DiagonalMatrix scaling;
  std::vector<NewtonIterate> trace;
  double gradient_norm = 0.0;
};

namespace detail {

inline double scaling_objective(const Matrix& sigma, const Vector& d) {
  return 0.5 * d.dot(sigma * d) - d.array().log().sum();
}

}  // namespace detail

/// Minimizes F(d) = 1/2 d^T Sigma d - sum log d_i over positive d by Newton's
/// method. The gradient is Sigma d - 1/d and the Hessian Sigma + Diag(1/d^2).
/// Starts from Diag(Sigma)^{-1/2}; steps are halved until the iterate stays
/// positive and the Armijo condition holds.
inline ScalingReport solve_scaling_report(const SPDMatrix& sigma, const ScalingOptions& opt = {}) {
  const Matrix& s = sigma.matrix();
  Vector d = s.diagonal().cwiseSqrt().cwiseInverse();
  double f = detail::scaling_objective(s, d);
  Vector g = s * d - d.cwiseInverse();

  ScalingReport report;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double gnorm = g.norm();
    if (gnorm <= opt.tolerance) {
      report.trace.push_back({f, gnorm, 0.0});
      report.scaling = DiagonalMatrix(d);
      report.gradient_norm = gnorm;
      return report;
    }

    Matrix hessian = s;
    hessian.diagonal() += d.cwiseInverse().cwiseAbs2();
    Eigen::LLT<Matrix> llt(hessian);
    if (llt.info() != Eigen::Success) throw SingularMatrix("solve_scaling: Hessian factorization failed");
    const Vector p = -llt.solve(g);
    const double slope = g.dot(p);

    double step = 1.0;
    for (;;) {
      const Vector trial = d + step * p;
      if ((trial.array() > 0.0).all()) {
        const double f_trial = detail::scaling_objective(s, trial);
        if (f_trial <= f + opt.armijo * step * slope) {
          d = trial;
          f = f_trial;
          break;
        }
        // Close to the optimum the decrease drops below the rounding error
        // of F; fall back to gradient reduction there.
        const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(f) + 1.0);
        if (f_trial <= f + noise) {
          const Vector g_trial = s * trial - trial.cwiseInverse();
          if (g_trial.norm() < gnorm) {
            d = trial;
            f = f_trial;
            break;
          }
        }
      }
      step *= 0.5;
      if (step < 1e-20) {
        throw LineSearchStalled("solve_scaling: no acceptable step (gradient norm " +
                                std::to_string(gnorm) + ")");
      }
    }
    report.trace.push_back({f, gnorm, step});
    g = s * d - d.cwiseInverse();
  }
  throw MaxIterationsExceeded("solve_scaling", opt.max_iterations, g.norm());
}

inline DiagonalMatrix solve_scaling(const SPDMatrix& sigma, const ScalingOptions& opt = {}) {
  return solve_scaling_report(sigma, opt).scaling;
}

/// Optimal scaling of a correlation matrix and the scaled matrix Delta C Delta.
struct ScalingState {
  DiagonalMatrix delta;
  SPDMatrix sigma;
};

inline ScalingState scale_correlation(const CorrelationMatrix& c, const ScalingOptions& opt = {}) {
  DiagonalMatrix delta = solve_scaling(c.spd(), opt);
  const Vector& d = delta.diagonal();
  SPDMatrix sigma(unchecked, d.asDiagonal() * c.matrix() * d.asDiagonal());
  return {std::move(delta), std::move(sigma)};
}

inline RowZeroMatrix ls_log(const CorrelationMatrix& c, const ScalingOptions& opt = {}) {
  const ScalingState st = scale_correlation(c, opt);
  return RowZeroMatrix::repair(mat_log(st.sigma).matrix());
}

/// Cor(exp S): exp S rescaled by Diag(exp S)^{-1/2} on both sides.
inline CorrelationMatrix ls_exp(const RowZeroMatrix& s) {
  const Matrix sigma = mat_exp(s.symmetric()).matrix();
  const Vector inv = sigma.diagonal().cwiseSqrt().cwiseInverse();
  return {unchecked, inv.asDiagonal() * sigma * inv.asDiagonal()};
}

/// X0 = -2 diag((I + Sigma)^{-1} Delta X Delta 1) with Delta = Diag(Sigma)^{1/2}.
inline DiagonalMatrix x0_term(const SPDMatrix& sigma, const HollowMatrix& x) {
  if (sigma.dim() != x.dim()) throw ShapeMismatch("x0_term: dimensions differ");
  const Vector delta = sigma.matrix().diagonal().cwiseSqrt();
  const Vector rhs = delta.cwiseProduct(x.matrix() * delta);
  Matrix shifted = sigma.matrix();
  shifted.diagonal().array() += 1.0;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success) throw SingularMatrix("x0_term: I + Sigma not factorizable");
  return DiagonalMatrix(-2.0 * llt.solve(rhs));
}

/// d_Sigma log(Delta X Delta + (X0 Sigma + Sigma X0)/2) at Sigma = D*(C) C D*(C).
inline RowZeroMatrix ls_dlog(const CorrelationMatrix& c, const HollowMatrix& x,
                             const ScalingOptions& opt = {}) {
  if (c.dim() != x.dim()) throw ShapeMismatch("ls_dlog: dimensions differ");
  const ScalingState st = scale_correlation(c, opt);
  const Matrix& sigma = st.sigma.matrix();
  const Vector delta = sigma.diagonal().cwiseSqrt();
  const Vector x0 = x0_term(st.sigma, x).diagonal();
  const Matrix direction = delta.asDiagonal() * x.matrix() * delta.asDiagonal() +
                           0.5 * (x0.asDiagonal() * sigma + sigma * x0.asDiagonal());
  const SymmetricMatrix out = dlog(st.sigma, SymmetricMatrix(unchecked, direction));
  return RowZeroMatrix::repair(out.matrix());
}

/// Delta^{-1} (G - (Delta^{-2} Diag(G) Sigma + Sigma Diag(G) Delta^{-2})/2) Delta^{-1}
/// with Sigma = exp S, G = d_S exp(Y), Delta = Diag(Sigma)^{1/2}.
inline HollowMatrix ls_dexp(const RowZeroMatrix& s, const RowZeroMatrix& y) {
  if (s.dim() != y.dim()) throw ShapeMismatch("ls_dexp: dimensions differ");
  const EigenDecomposition e = sym_eig(s.symmetric());
  const Matrix sigma = mat_exp(e).matrix();
  const Matrix g = dexp(e, y.symmetric()).matrix();
  const Vector delta2 = sigma.diagonal();
  const Vector gd = g.diagonal().cwiseQuotient(delta2);  // Delta^{-2} Diag(G)
  const Matrix corrected = g - 0.5 * (gd.asDiagonal() * sigma + sigma * gd.asDiagonal());
  const Vector inv = delta2.cwiseSqrt().cwiseInverse();
  const Matrix out = inv.asDiagonal() * corrected * inv.asDiagonal();
  const double residual = out.diagonal().cwiseAbs().maxCoeff();
  if (!(residual <= kRepairTolerance * detail::scale_of(out))) {
    throw NumericalError("ls_dexp: diagonal residual " + std::to_string(residual));
  }
  return {unchecked, out};
}

struct LogScalingChart {
  using Coord = RowZeroMatrix;
  using Form = RowZeroQuadraticForm;

  static Coord log(const CorrelationMatrix& c) { return ls_log(c); }
  static CorrelationMatrix exp(const Coord& s) { return ls_exp(s); }
  static Coord dlog(const CorrelationMatrix& c, const HollowMatrix& x) { return ls_dlog(c, x); }
  static HollowMatrix dexp(const Coord& s, const Coord& y) { return ls_dexp(s, y); }
};

using LogScalingGeometry = FlatGeometry<LogScalingChart>;

}  // namespace corrlog
