#pragma once

// Sliding-window Pearson correlation of region-averaged signals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "corrlog/matrix_types.hpp"
#include "corrlog/trajectory.hpp"

namespace corrlog {

/// Region-by-sample signal matrix (rows are regions).
struct RegionTimeSeries {
  Matrix data;
  std::vector<std::string> labels;

  Index n_regions() const noexcept { return data.rows(); }
  Index n_samples() const noexcept { return data.cols(); }
};

struct WindowSpec {
  Index width = 600;
  Index offset = 1;
};

enum class PearsonMethod {
  two_pass,  // center each window, then normalized dot products
  rolling,   // running sums updated by `offset` samples per window
};

struct WindowOptions {
  PearsonMethod method = PearsonMethod::two_pass;
  /// First sample of a second concatenated run. Windows containing both
  /// sample seam-1 and sample seam are skipped when exclude_seam is set.
  std::optional<Index> seam;
  bool exclude_seam = false;
  /// Windows whose spectrum leaves [guard_low, guard_high] are counted.
  double guard_low = 1e-3;
  double guard_high = 1e3;
  /// Rolling sums are recomputed from scratch every this many windows.
  std::size_t rolling_refresh = 256;
};

struct WindowResult {
  Trajectory trajectory;
  std::vector<Index> starts;
  std::vector<double> lambda_min;
  std::vector<double> lambda_max;
  std::size_t outside_guard = 0;
};

/// floor((n_samples - width) / offset) + 1.
inline Index window_count(Index n_samples, const WindowSpec& w) {
  if (w.width < 2) throw InvalidArgument("window width must be at least 2");
  if (w.offset < 1) throw InvalidArgument("window offset must be at least 1");
  if (w.width > n_samples) {
    throw InvalidArgument("window width " + std::to_string(w.width) + " exceeds " +
                          std::to_string(n_samples) + " samples");
  }
  return (n_samples - w.width) / w.offset + 1;
}

namespace detail {

// Centered energy at the rounding level of the raw energy means a constant
// segment. Running sums cancel, so their rounding level is much higher.
inline void check_variance(const Vector& variance, const Vector& scale, double relative,
                           std::size_t window) {
  for (Index r = 0; r < variance.size(); ++r) {
    if (!(variance(r) > relative * std::max(scale(r), 1e-300))) {
      throw ZeroVariance(static_cast<std::size_t>(r), window);
    }
  }
}

inline Matrix normalize_covariance(const Matrix& cov) {
  const Vector inv = cov.diagonal().cwiseSqrt().cwiseInverse();
  Matrix corr = symmetrized(inv.asDiagonal() * cov * inv.asDiagonal());
  corr = corr.cwiseMax(-1.0).cwiseMin(1.0);
  corr.diagonal().setOnes();
  return corr;
}

/// Reference Pearson correlation of the columns [start, start + width).
inline Matrix pearson_two_pass(const Matrix& data, Index start, Index width, std::size_t window) {
  const Matrix block = data.middleCols(start, width);
  const Matrix centered = block.colwise() - block.rowwise().mean();
  const Matrix cov = centered * centered.transpose();
  check_variance(cov.diagonal(), block.rowwise().squaredNorm(), 1e-24, window);
  return normalize_covariance(cov);
}

}  // namespace detail

/// Pearson correlation of two equally long signals, textbook two-pass form.
inline double pearson(const Vector& x, const Vector& y) {
  const Vector xc = x.array() - x.mean();
  const Vector yc = y.array() - y.mean();
  return xc.dot(yc) / std::sqrt(xc.squaredNorm() * yc.squaredNorm());
}

/// One correlation matrix per window. Throws ZeroVariance for a constant
/// region inside a window and RankDeficient when a window's matrix is not
/// above the positive-definite floor (fewer samples than regions, collinear
/// signals). Timestamps are the window start samples.
inline WindowResult sliding_window_correlation(const RegionTimeSeries& ts, const WindowSpec& spec,
                                               const WindowOptions& opt = {}) {
  if (!ts.data.allFinite()) throw NonFiniteValue("time series contains non-finite samples");
  const Index count = window_count(ts.n_samples(), spec);
  const Index n = ts.n_regions();

  // Rolling sums run on globally centered data to limit cancellation.
  Matrix shifted;
  Vector s1;
  Matrix s2;
  if (opt.method == PearsonMethod::rolling) {
    shifted = ts.data.colwise() - ts.data.rowwise().mean();
  }

  std::vector<double> times;
  std::vector<Matrix> values;
  std::vector<Index> starts;
  std::vector<double> lambda_min;
  std::vector<double> lambda_max;
  std::size_t outside_guard = 0;

  std::size_t since_refresh = opt.rolling_refresh;
  Index previous_start = -1;
  for (Index w = 0; w < count; ++w) {
    const Index start = w * spec.offset;
    const bool straddles = opt.seam && start < *opt.seam && start + spec.width > *opt.seam;
    if (opt.exclude_seam && straddles) continue;
    const auto window = static_cast<std::size_t>(w);

    Matrix corr;
    if (opt.method == PearsonMethod::two_pass) {
      corr = detail::pearson_two_pass(ts.data, start, spec.width, window);
    } else {
      const bool contiguous = previous_start >= 0 && start - previous_start < spec.width;
      if (!contiguous || since_refresh >= opt.rolling_refresh) {
        const Matrix block = shifted.middleCols(start, spec.width);
        s1 = block.rowwise().sum();
        s2 = block * block.transpose();
        since_refresh = 0;
      } else {
        const Index shift = start - previous_start;
        const Matrix leaving = shifted.middleCols(previous_start, shift);
        const Matrix entering = shifted.middleCols(previous_start + spec.width, shift);
        s1 += entering.rowwise().sum() - leaving.rowwise().sum();
        s2.noalias() += entering * entering.transpose();
        s2.noalias() -= leaving * leaving.transpose();
        ++since_refresh;
      }
      previous_start = start;
      const Matrix cov = s2 - s1 * s1.transpose() / static_cast<double>(spec.width);
      const Matrix block = shifted.middleCols(start, spec.width);
      detail::check_variance(cov.diagonal(), block.rowwise().squaredNorm(), 1e-12, window);
      corr = detail::normalize_covariance(cov);
    }

    const Vector ev = detail::eigenvalues_of(corr);
    const double lo = ev(0);
    const double hi = ev(n - 1);
    if (!(lo > detail::eig_floor(hi))) {
      throw RankDeficient("window " + std::to_string(window) + " (start " + std::to_string(start) +
                          "): smallest eigenvalue " + std::to_string(lo) +
                          " is not above the positive-definite floor");
    }
    if (lo < opt.guard_low || hi > opt.guard_high) ++outside_guard;
    lambda_min.push_back(lo);
    lambda_max.push_back(hi);
    starts.push_back(start);
    times.push_back(static_cast<double>(start));
    values.push_back(std::move(corr));
  }
  if (values.empty()) throw InvalidArgument("every window was excluded");
  return {Trajectory(std::move(times), std::move(values), SpaceTag::correlation), std::move(starts),
          std::move(lambda_min), std::move(lambda_max), outside_guard};
}

}  // namespace corrlog
