#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "corrlog/matrix_types.hpp"

namespace corrlog {

/// Which matrix space every element of a trajectory lives in. The numeric
/// values are the on-disk encoding.
enum class SpaceTag : std::uint8_t {
  correlation = 0,
  spd = 1,
  symmetric = 2,
  hollow = 3,
  rowzero = 4,
};

inline std::string_view to_string(SpaceTag tag) {
  switch (tag) {
    case SpaceTag::correlation: return "correlation";
    case SpaceTag::spd: return "spd";
    case SpaceTag::symmetric: return "symmetric";
    case SpaceTag::hollow: return "hollow";
    case SpaceTag::rowzero: return "rowzero";
  }
  return "unknown";
}

inline bool is_valid_space_tag(std::uint8_t raw) { return raw <= 4; }

/// Flat tags are vector spaces: symmetric, hollow, rowzero.
inline bool is_flat(SpaceTag tag) {
  return tag == SpaceTag::symmetric || tag == SpaceTag::hollow || tag == SpaceTag::rowzero;
}

template <class M> struct space_tag_of;
template <> struct space_tag_of<CorrelationMatrix> { static constexpr SpaceTag value = SpaceTag::correlation; };
template <> struct space_tag_of<SPDMatrix> { static constexpr SpaceTag value = SpaceTag::spd; };
template <> struct space_tag_of<SymmetricMatrix> { static constexpr SpaceTag value = SpaceTag::symmetric; };
template <> struct space_tag_of<HollowMatrix> { static constexpr SpaceTag value = SpaceTag::hollow; };
template <> struct space_tag_of<RowZeroMatrix> { static constexpr SpaceTag value = SpaceTag::rowzero; };

/// Time-indexed sequence of same-size square matrices from one space.
///
/// Construction validates: at least one point, strictly increasing finite
/// times, square finite matrices of equal size, symmetry within 1e-12
/// (then exact), and the per-tag structure (unit diagonal, zero diagonal,
/// zero row sums, or a successful Cholesky factorization for spd and
/// correlation).
class Trajectory {
 public:
  Trajectory(std::vector<double> times, std::vector<Matrix> values, SpaceTag tag)
      : times_(std::move(times)), values_(std::move(values)), tag_(tag) {
    validate();
  }

  template <class M>
  static Trajectory from(std::vector<double> times, const std::vector<M>& values) {
    std::vector<Matrix> raw;
    raw.reserve(values.size());
    for (const M& v : values) raw.push_back(v.matrix());
    return Trajectory(std::move(times), std::move(raw), space_tag_of<M>::value);
  }

  /// Times 0, 1, ..., T-1.
  static std::vector<double> index_times(std::size_t count) {
    std::vector<double> t(count);
    for (std::size_t i = 0; i < count; ++i) t[i] = static_cast<double>(i);
    return t;
  }

  std::size_t size() const noexcept { return values_.size(); }
  Index dim() const noexcept { return values_.front().rows(); }
  SpaceTag tag() const noexcept { return tag_; }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<Matrix>& values() const noexcept { return values_; }
  double time(std::size_t i) const { return times_.at(i); }
  const Matrix& value(std::size_t i) const { return values_.at(i); }

  /// Typed view of element i. Correlation elements may be read as spd or
  /// symmetric, spd/hollow/rowzero elements as symmetric.
  template <class M>
  M at(std::size_t i) const {
    constexpr SpaceTag want = space_tag_of<M>::value;
    const bool ok = want == tag_ || want == SpaceTag::symmetric ||
                    (want == SpaceTag::spd && tag_ == SpaceTag::correlation);
    if (!ok) {
      throw DataError("trajectory holds " + std::string(to_string(tag_)) + " matrices, not " +
                      std::string(to_string(want)));
    }
    return M(unchecked, values_.at(i));
  }

  template <class M>
  std::vector<M> as() const {
    std::vector<M> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at<M>(i));
    return out;
  }

  /// Same times and values under another tag; revalidates.
  Trajectory retagged(SpaceTag tag) const { return Trajectory(times_, values_, tag); }

 private:
  void validate() {
    if (values_.empty()) throw DataError("trajectory is empty");
    if (times_.size() != values_.size()) {
      throw ShapeMismatch("trajectory has " + std::to_string(times_.size()) + " times for " +
                          std::to_string(values_.size()) + " matrices");
    }
    for (std::size_t i = 0; i < times_.size(); ++i) {
      if (!std::isfinite(times_[i])) throw NonFiniteValue("trajectory time " + std::to_string(i));
      if (i > 0 && !(times_[i] > times_[i - 1])) {
        throw DataError("trajectory times must be strictly increasing (index " +
                        std::to_string(i) + ")");
      }
    }
    const Index n = values_.front().rows();
    for (std::size_t i = 0; i < values_.size(); ++i) {
      Matrix& m = values_[i];
      const std::string where = "trajectory element " + std::to_string(i);
      if (m.rows() != n || m.cols() != n || n == 0) throw ShapeMismatch(where + ": wrong shape");
      if (!m.allFinite()) throw NonFiniteValue(where + ": non-finite entry");
      if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * detail::scale_of(m)) {
        throw DataError(where + ": not symmetric");
      }
      m = detail::symmetrized(m);
      check_structure(m, where);
    }
  }

  void check_structure(Matrix& m, const std::string& where) const {
    switch (tag_) {
      case SpaceTag::correlation:
        if ((m.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12) {
          throw DataError(where + ": diagonal is not one");
        }
        m.diagonal().setOnes();
        [[fallthrough]];
      case SpaceTag::spd: {
        Eigen::LLT<Matrix> llt(m);
        if (llt.info() != Eigen::Success) throw NotPositiveDefinite(where + ": not positive definite");
        break;
      }
      case SpaceTag::hollow:
        if (m.diagonal().cwiseAbs().maxCoeff() > kRepairTolerance) {
          throw DataError(where + ": diagonal is not zero");
        }
        m.diagonal().setZero();
        break;
      case SpaceTag::rowzero:
        if (detail::max_abs_row_sum(m) > 1e-10 * detail::scale_of(m)) {
          throw DataError(where + ": row sums are not zero");
        }
        break;
      case SpaceTag::symmetric:
        break;
    }
  }

  std::vector<double> times_;
  std::vector<Matrix> values_;
  SpaceTag tag_;
};

}  // namespace corrlog
