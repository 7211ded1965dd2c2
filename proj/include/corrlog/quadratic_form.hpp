#pragma once

// Permutation-invariant quadratic forms on the two flat coordinate spaces.
//
//   Hol(n):  q(X)  = alpha tr(X^2) + beta 1^T X^2 1 + gamma (1^T X 1)^2
//   Row0(n): q*(Y) = alpha tr(Y^2) + beta tr(Diag(Y)^2) + gamma tr(Y)^2
//
// For n >= 4 all three coefficients are free subject to positivity
// constraints. For n = 3 the invariants are dependent and alpha must be 0;
// for n = 2 only gamma survives.

#include <string>

#include "corrlog/matrix_types.hpp"

namespace corrlog {

struct FormCoefficients {
  double alpha = 1.0;
  double beta = 0.0;
  double gamma = 0.0;
};

namespace detail {

// `second_scale` is the multiplier of alpha in the second constraint: 2 on
// Hol(n) and n on Row0(n). The third constraint uses `third_scale` the same way.
inline void check_form(const FormCoefficients& c, Index n, double second_scale, double third_scale,
                       const char* what) {
  const auto fail = [&](const std::string& why) {
    throw InvalidArgument(std::string(what) + " (n=" + std::to_string(n) + "): " + why);
  };
  if (n < 2) fail("dimension must be at least 2");
  const double nd = static_cast<double>(n);
  if (n == 2) {
    if (c.alpha != 0.0 || c.beta != 0.0) fail("alpha and beta must be 0");
  } else if (n == 3) {
    if (c.alpha != 0.0) fail("alpha must be 0");
  } else if (!(c.alpha > 0.0)) {
    fail("alpha must be positive");
  }
  if (n >= 3 && !(second_scale * c.alpha + (nd - 2.0) * c.beta > 0.0)) {
    fail("second positivity constraint violated");
  }
  if (!(third_scale * c.alpha + (nd - 1.0) * (c.beta + nd * c.gamma) > 0.0)) {
    fail("third positivity constraint violated");
  }
}

inline FormCoefficients default_coefficients(Index n) {
  if (n == 2) return {0.0, 0.0, 1.0};
  if (n == 3) return {0.0, 1.0, 0.0};
  return {1.0, 0.0, 0.0};
}

}  // namespace detail

/// Inner product on Hol(n). Construction enforces positive definiteness.
class HolQuadraticForm {
 public:
  HolQuadraticForm(FormCoefficients c, Index n) : c_(c), n_(n) {
    detail::check_form(c_, n_, 2.0, 1.0, "HolQuadraticForm");
  }
  HolQuadraticForm(double alpha, double beta, double gamma, Index n)
      : HolQuadraticForm(FormCoefficients{alpha, beta, gamma}, n) {}

  /// Frobenius (alpha = 1) for n >= 4; the surviving coefficient set to 1 below.
  static HolQuadraticForm default_for(Index n) { return {detail::default_coefficients(n), n}; }

  const FormCoefficients& coefficients() const noexcept { return c_; }
  Index dim() const noexcept { return n_; }

  double operator()(const HollowMatrix& x) const { return inner(x, x); }

  double inner(const HollowMatrix& x, const HollowMatrix& y) const {
    check(x);
    check(y);
    const Vector x1 = x.matrix().rowwise().sum();
    const Vector y1 = y.matrix().rowwise().sum();
    return c_.alpha * x.matrix().cwiseProduct(y.matrix()).sum() + c_.beta * x1.dot(y1) +
           c_.gamma * x1.sum() * y1.sum();
  }

 private:
  void check(const HollowMatrix& x) const {
    if (x.dim() != n_) throw ShapeMismatch("HolQuadraticForm: dimension mismatch");
  }

  FormCoefficients c_;
  Index n_;
};

/// Inner product on Row0(n).
class RowZeroQuadraticForm {
 public:
  RowZeroQuadraticForm(FormCoefficients c, Index n) : c_(c), n_(n) {
    detail::check_form(c_, n_, static_cast<double>(n), static_cast<double>(n),
                       "RowZeroQuadraticForm");
  }
  RowZeroQuadraticForm(double alpha, double beta, double gamma, Index n)
      : RowZeroQuadraticForm(FormCoefficients{alpha, beta, gamma}, n) {}

  static RowZeroQuadraticForm default_for(Index n) {
    return {detail::default_coefficients(n), n};
  }

  const FormCoefficients& coefficients() const noexcept { return c_; }
  Index dim() const noexcept { return n_; }

  double operator()(const RowZeroMatrix& y) const { return inner(y, y); }

  double inner(const RowZeroMatrix& x, const RowZeroMatrix& y) const {
    if (x.dim() != n_ || y.dim() != n_) {
      throw ShapeMismatch("RowZeroQuadraticForm: dimension mismatch");
    }
    return c_.alpha * x.matrix().cwiseProduct(y.matrix()).sum() +
           c_.beta * x.matrix().diagonal().dot(y.matrix().diagonal()) +
           c_.gamma * x.matrix().trace() * y.matrix().trace();
  }

 private:
  FormCoefficients c_;
  Index n_;
};

inline double q_eval(const HolQuadraticForm& form, const HollowMatrix& x) { return form(x); }

inline double q_star_eval(const RowZeroQuadraticForm& form, const RowZeroMatrix& y) {
  return form(y);
}

inline double inner(const HolQuadraticForm& form, const HollowMatrix& x, const HollowMatrix& y) {
  return form.inner(x, y);
}

inline double inner(const RowZeroQuadraticForm& form, const RowZeroMatrix& x,
                    const RowZeroMatrix& y) {
  return form.inner(x, y);
}

}  // namespace corrlog
