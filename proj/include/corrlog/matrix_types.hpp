#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "corrlog/errors.hpp"

namespace corrlog {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Tag for constructors that skip invariant validation. Callers vouch for
/// the invariant (typically because the value was produced by a map whose
/// image is known). Symmetrization still happens.
struct unchecked_t {
  explicit unchecked_t() = default;
};
inline constexpr unchecked_t unchecked{};

/// Relative eigenvalue floor under which a matrix is not treated as positive definite.
inline constexpr double kEigFloorRelative = 1e-12;

/// Residual below which producers repair a type invariant exactly.
inline constexpr double kRepairTolerance = 1e-8;

namespace detail {

inline void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw ShapeMismatch(std::string(what) + ": expected a non-empty square matrix, got " +
                        std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

inline void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) throw NonFiniteValue(std::string(what) + ": non-finite entry");
}

inline Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

inline double eig_floor(double lambda_max) {
  return kEigFloorRelative * std::max(1.0, lambda_max);
}

inline Vector eigenvalues_of(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NonConvergence("symmetric eigensolver failed");
  return es.eigenvalues();
}

inline void require_positive_definite(const Matrix& a, const char* what) {
  const Vector ev = eigenvalues_of(a);
  const double floor = eig_floor(ev(ev.size() - 1));
  if (!(ev(0) > floor)) {
    throw NotPositiveDefinite(std::string(what) + ": smallest eigenvalue " + std::to_string(ev(0)) +
                              " is not above the floor " + std::to_string(floor));
  }
}

inline double max_abs_row_sum(const Matrix& a) { return a.rowwise().sum().cwiseAbs().maxCoeff(); }

inline double scale_of(const Matrix& a) { return std::max(1.0, a.cwiseAbs().maxCoeff()); }

}  // namespace detail

/// Storage shared by every symmetric matrix type. The stored matrix is
/// exactly symmetric.
template <class Derived>
class SymmetricStorage {
 public:
  const Matrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }

 protected:
  SymmetricStorage() = default;
  explicit SymmetricStorage(const Matrix& m) : m_(detail::symmetrized(m)) {}

  Matrix m_;
};

/// Adds vector-space arithmetic to types whose set is a linear subspace of
/// the symmetric matrices.
template <class Derived>
class LinearSubspace : public SymmetricStorage<Derived> {
 public:
  static Derived zero(Index n) { return Derived(unchecked, Matrix::Zero(n, n)); }

  friend Derived operator+(const Derived& a, const Derived& b) {
    check_same_dim(a, b);
    return Derived(unchecked, a.matrix() + b.matrix());
  }
  friend Derived operator-(const Derived& a, const Derived& b) {
    check_same_dim(a, b);
    return Derived(unchecked, a.matrix() - b.matrix());
  }
  friend Derived operator-(const Derived& a) { return Derived(unchecked, -a.matrix()); }
  friend Derived operator*(double s, const Derived& a) { return Derived(unchecked, s * a.matrix()); }
  friend Derived operator*(const Derived& a, double s) { return s * a; }
  friend Derived operator/(const Derived& a, double s) { return Derived(unchecked, a.matrix() / s); }

  double frobenius_norm() const { return this->m_.norm(); }

 protected:
  using SymmetricStorage<Derived>::SymmetricStorage;

 private:
  static void check_same_dim(const Derived& a, const Derived& b) {
    if (a.dim() != b.dim()) throw ShapeMismatch("matrix dimensions differ");
  }
};

class SymmetricMatrix : public LinearSubspace<SymmetricMatrix> {
 public:
  SymmetricMatrix() = default;

  /// Symmetrizes (A + A^T)/2. Rejects non-square and non-finite input.
  explicit SymmetricMatrix(const Matrix& a) : LinearSubspace(validated(a)) {}
  SymmetricMatrix(unchecked_t, const Matrix& a) : LinearSubspace(a) {}

  static SymmetricMatrix identity(Index n) { return {unchecked, Matrix::Identity(n, n)}; }

 private:
  static const Matrix& validated(const Matrix& a) {
    detail::require_square(a, "SymmetricMatrix");
    detail::require_finite(a, "SymmetricMatrix");
    return a;
  }
};

class SPDMatrix : public SymmetricStorage<SPDMatrix> {
 public:
  SPDMatrix() = default;

  /// Throws NotPositiveDefinite when the smallest eigenvalue is at or below
  /// 1e-12 * max(1, largest eigenvalue).
  explicit SPDMatrix(const SymmetricMatrix& a) : SymmetricStorage(a.matrix()) {
    detail::require_positive_definite(m_, "SPDMatrix");
  }
  explicit SPDMatrix(const Matrix& a) : SPDMatrix(SymmetricMatrix(a)) {}
  SPDMatrix(unchecked_t, const Matrix& a) : SymmetricStorage(a) {}

  static SPDMatrix identity(Index n) { return {unchecked, Matrix::Identity(n, n)}; }

  SymmetricMatrix symmetric() const { return {unchecked, m_}; }
};

/// Full-rank correlation matrix: positive definite with unit diagonal.
class CorrelationMatrix : public SymmetricStorage<CorrelationMatrix> {
 public:
  CorrelationMatrix() = default;

  /// Accepts diagonals within 1e-12 of one and stores them as exactly one.
  explicit CorrelationMatrix(const Matrix& a) : SymmetricStorage(validated_shape(a)) {
    for (Index i = 0; i < dim(); ++i) {
      if (std::abs(m_(i, i) - 1.0) > 1e-12) {
        throw DataError("CorrelationMatrix: diagonal entry " + std::to_string(i) + " is " +
                        std::to_string(m_(i, i)));
      }
      m_(i, i) = 1.0;
    }
    if (m_.cwiseAbs().maxCoeff() > 1.0) {
      throw DataError("CorrelationMatrix: off-diagonal entry outside [-1, 1]");
    }
    detail::require_positive_definite(m_, "CorrelationMatrix");
  }

  /// Sets the diagonal to exactly one without validating anything else.
  CorrelationMatrix(unchecked_t, const Matrix& a) : SymmetricStorage(a) {
    m_.diagonal().setOnes();
  }

  static CorrelationMatrix identity(Index n) { return {unchecked, Matrix::Identity(n, n)}; }

  SPDMatrix spd() const { return {unchecked, m_}; }
  SymmetricMatrix symmetric() const { return {unchecked, m_}; }

 private:
  static const Matrix& validated_shape(const Matrix& a) {
    detail::require_square(a, "CorrelationMatrix");
    detail::require_finite(a, "CorrelationMatrix");
    return a;
  }
};

/// Symmetric matrix with an identically zero diagonal.
class HollowMatrix : public LinearSubspace<HollowMatrix> {
 public:
  HollowMatrix() = default;

  /// Diagonal residuals up to 1e-8 are zeroed; larger ones are rejected.
  explicit HollowMatrix(const Matrix& a) : LinearSubspace(validated(a)) {
    if (m_.diagonal().cwiseAbs().maxCoeff() > kRepairTolerance) {
      throw DataError("HollowMatrix: diagonal is not zero");
    }
    m_.diagonal().setZero();
  }
  HollowMatrix(unchecked_t, const Matrix& a) : LinearSubspace(a) { m_.diagonal().setZero(); }

  /// The Off operator: drops the diagonal of any symmetric matrix.
  static HollowMatrix off(const SymmetricMatrix& a) { return {unchecked, a.matrix()}; }

  SymmetricMatrix symmetric() const { return {unchecked, m_}; }

 private:
  static const Matrix& validated(const Matrix& a) {
    detail::require_square(a, "HollowMatrix");
    detail::require_finite(a, "HollowMatrix");
    return a;
  }
};

/// Symmetric matrix whose rows all sum to zero.
class RowZeroMatrix : public LinearSubspace<RowZeroMatrix> {
 public:
  RowZeroMatrix() = default;

  /// Rejects row sums above 1e-10; nothing is corrected.
  explicit RowZeroMatrix(const Matrix& a) : LinearSubspace(validated(a)) {
    if (detail::max_abs_row_sum(m_) > 1e-10) {
      throw DataError("RowZeroMatrix: row sums are not zero");
    }
  }
  RowZeroMatrix(unchecked_t, const Matrix& a) : LinearSubspace(a) {}

  /// Projects onto Row0 with (I - 11^T/n) A (I - 11^T/n), which keeps symmetry
  /// and zeroes every row sum. Residuals above 1e-8 (relative to the largest
  /// entry) signal an upstream failure and throw.
  static RowZeroMatrix repair(const Matrix& a, double tolerance = kRepairTolerance) {
    const Matrix s = detail::symmetrized(a);
    const double residual = detail::max_abs_row_sum(s);
    if (residual > tolerance * detail::scale_of(s)) {
      throw NumericalError("row-sum residual " + std::to_string(residual) +
                           " too large to repair");
    }
    const Index n = s.rows();
    const Vector r = s.rowwise().sum();
    const double total = r.sum();
    Matrix p = s;
    p.colwise() -= r / static_cast<double>(n);
    p.rowwise() -= r.transpose() / static_cast<double>(n);
    p.array() += total / static_cast<double>(n * n);
    return {unchecked, p};
  }

  SymmetricMatrix symmetric() const { return {unchecked, m_}; }

 private:
  static const Matrix& validated(const Matrix& a) {
    detail::require_square(a, "RowZeroMatrix");
    detail::require_finite(a, "RowZeroMatrix");
    return a;
  }
};

/// Diag(d). The positive variant is checked by require_positive().
class DiagonalMatrix {
 public:
  DiagonalMatrix() = default;
  explicit DiagonalMatrix(Vector d) : d_(std::move(d)) {}

  static DiagonalMatrix identity(Index n) { return DiagonalMatrix(Vector::Ones(n)); }
  static DiagonalMatrix zero(Index n) { return DiagonalMatrix(Vector::Zero(n)); }

  const Vector& diagonal() const noexcept { return d_; }
  Index dim() const noexcept { return d_.size(); }
  double operator[](Index i) const { return d_(i); }
  Matrix dense() const { return d_.asDiagonal(); }

  bool is_positive() const { return (d_.array() > 0.0).all(); }
  const DiagonalMatrix& require_positive() const {
    if (!is_positive()) throw DataError("DiagonalMatrix: entries must be positive");
    return *this;
  }

 private:
  Vector d_;
};

/// A = P Diag(delta) P^T with P orthogonal and delta ascending.
struct EigenDecomposition {
  Matrix P;
  Vector delta;

  Index dim() const noexcept { return delta.size(); }
  Matrix reconstruct() const { return P * delta.asDiagonal() * P.transpose(); }
};

}  // namespace corrlog
