#pragma once

// Polynomial least-squares regression of matrix trajectories in flat
// coordinates, the degree/sample-count grid search, and the chart pullback
// that turns a flat fit back into a correlation trajectory.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "corrlog/baselines.hpp"
#include "corrlog/logscaling.hpp"
#include "corrlog/matrix_types.hpp"
#include "corrlog/offlog.hpp"
#include "corrlog/trajectory.hpp"

namespace corrlog {

/// round(linspace(0, T-1, k)) with duplicates removed. Always contains 0 and T-1.
inline std::vector<std::size_t> subsample_indices(std::size_t count, std::size_t k) {
  if (k < 2 || k > count) {
    throw InvalidArgument("subsample: need 2 <= k <= " + std::to_string(count) + ", got " +
                          std::to_string(k));
  }
  std::vector<std::size_t> idx;
  idx.reserve(k);
  const double step = static_cast<double>(count - 1) / static_cast<double>(k - 1);
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(std::llround(step * static_cast<double>(i)));
    if (idx.empty() || idx.back() != j) idx.push_back(j);
  }
  return idx;
}

inline Trajectory subsample(const Trajectory& traj, std::size_t k) {
  std::vector<double> times;
  std::vector<Matrix> values;
  for (std::size_t i : subsample_indices(traj.size(), k)) {
    times.push_back(traj.time(i));
    values.push_back(traj.value(i));
  }
  return Trajectory(std::move(times), std::move(values), traj.tag());
}

/// Matrix polynomial sum_p coeffs[p] u^p in normalized time
/// u = 2 (t - t_min) / (t_max - t_min) - 1.
struct PolynomialCurve {
  int degree = 0;
  std::vector<Matrix> coeffs;
  double t_min = 0.0;
  double t_max = 1.0;
  SpaceTag tag = SpaceTag::symmetric;

  double normalize(double t) const { return 2.0 * (t - t_min) / (t_max - t_min) - 1.0; }

  /// False when evaluating at t extrapolates beyond the fitted time range.
  bool in_domain(double t) const { return t >= t_min && t <= t_max; }

  Matrix evaluate(double t) const {
    const double u = normalize(t);
    Matrix out = coeffs.back();
    for (int p = degree - 1; p >= 0; --p) {
      out *= u;
      out += coeffs[static_cast<std::size_t>(p)];
    }
    return out;
  }
};

inline Matrix evaluate(const PolynomialCurve& curve, double t) { return curve.evaluate(t); }

/// Entrywise least squares on the Vandermonde system in normalized time,
/// solved by column-pivoted Householder QR. Throws RankDeficient when the
/// samples cannot determine degree + 1 coefficients.
inline PolynomialCurve fit_polynomial(const Trajectory& traj, int degree) {
  if (!is_flat(traj.tag())) {
    throw DataError("fit_polynomial: " + std::string(to_string(traj.tag())) +
                    " is not a flat space");
  }
  if (degree < 0) throw InvalidArgument("fit_polynomial: negative degree");
  const auto k = static_cast<Index>(traj.size());
  const Index cols = degree + 1;
  if (k < cols) {
    throw RankDeficient("fit_polynomial: degree " + std::to_string(degree) + " needs at least " +
                        std::to_string(cols) + " samples, got " + std::to_string(k));
  }

  PolynomialCurve curve;
  curve.degree = degree;
  curve.t_min = traj.times().front();
  curve.t_max = traj.times().back();
  curve.tag = traj.tag();

  Matrix vandermonde(k, cols);
  for (Index i = 0; i < k; ++i) {
    const double u = curve.normalize(traj.time(static_cast<std::size_t>(i)));
    double power = 1.0;
    for (Index p = 0; p < cols; ++p, power *= u) vandermonde(i, p) = power;
  }

  const Index n = traj.dim();
  Matrix rhs(k, n * n);
  for (Index i = 0; i < k; ++i) {
    rhs.row(i) = Eigen::Map<const Eigen::RowVectorXd>(traj.value(static_cast<std::size_t>(i)).data(),
                                                     n * n);
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(vandermonde);
  if (qr.rank() < cols) {
    throw RankDeficient("fit_polynomial: Vandermonde system has rank " +
                        std::to_string(qr.rank()) + " < " + std::to_string(cols));
  }
  const Matrix solution = qr.solve(rhs);
  curve.coeffs.reserve(static_cast<std::size_t>(cols));
  for (Index p = 0; p < cols; ++p) {
    Matrix c = Eigen::Map<const Matrix>(Eigen::RowVectorXd(solution.row(p)).data(), n, n);
    curve.coeffs.push_back(detail::symmetrized(c));
  }
  return curve;
}

/// (1/T) sum_t ||P(t) - Z_t||_F^2 over every point of `traj`.
inline double mse(const PolynomialCurve& curve, const Trajectory& traj) {
  double sum = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    sum += (curve.evaluate(traj.time(i)) - traj.value(i)).squaredNorm();
  }
  return sum / static_cast<double>(traj.size());
}

/// Evaluates the curve at `times`, snapping results back onto the curve's
/// space (exact zero diagonal for hollow, projected row sums for rowzero).
inline Trajectory evaluate_on(const PolynomialCurve& curve, const std::vector<double>& times) {
  std::vector<Matrix> values;
  values.reserve(times.size());
  for (double t : times) {
    Matrix m = curve.evaluate(t);
    if (curve.tag == SpaceTag::rowzero) m = RowZeroMatrix::repair(m).matrix();
    values.push_back(std::move(m));
  }
  return Trajectory(times, std::move(values), curve.tag);
}

struct GridSearchOptions {
  // Cells whose MSE is within tie_tolerance * mean ||Z_t||_F^2 of the minimum
  // count as tied; ties go to the smaller degree, then the smaller sample count.
  double tie_tolerance = 1e-12;
};

struct GridSearchResult {
  std::vector<int> degrees;
  std::vector<std::size_t> sample_counts;
  Matrix mse;           // degrees x sample_counts; +inf where the fit was rank deficient
  Matrix log10_mse;     // log10 of mse
  Matrix fit_residual;  // residual on the fitted subsamples only
  int best_degree = 0;
  std::size_t best_samples = 0;
  double tie_threshold = 0.0;
  std::string tie_break_note;

  /// Best degree within one sample-count column under the same tie rule.
  int best_degree_for(std::size_t samples) const {
    const auto it = std::find(sample_counts.begin(), sample_counts.end(), samples);
    if (it == sample_counts.end()) throw InvalidArgument("sample count not in grid");
    const auto col = static_cast<Index>(it - sample_counts.begin());
    const Vector column = mse.col(col);
    const double min_mse = column.minCoeff();
    Index best = -1;
    for (Index r = 0; r < column.size(); ++r) {
      if (column(r) <= min_mse + tie_threshold) {
        if (best < 0 || degrees[static_cast<std::size_t>(r)] < degrees[static_cast<std::size_t>(best)]) {
          best = r;
        }
      }
    }
    if (best < 0) throw RankDeficient("grid_search: every fit in the column was rank deficient");
    return degrees[static_cast<std::size_t>(best)];
  }
};

/// For every (degree, sample count): subsample, fit, score the MSE over the
/// whole trajectory. Rank-deficient cells are recorded as +inf.
inline GridSearchResult grid_search(const Trajectory& traj, const std::vector<int>& degrees,
                                    const std::vector<std::size_t>& sample_counts,
                                    const GridSearchOptions& opt = {}) {
  if (degrees.empty() || sample_counts.empty()) throw InvalidArgument("grid_search: empty grid");
  GridSearchResult out;
  out.degrees = degrees;
  out.sample_counts = sample_counts;
  const auto rows = static_cast<Index>(degrees.size());
  const auto cols = static_cast<Index>(sample_counts.size());
  out.mse.resize(rows, cols);
  out.log10_mse.resize(rows, cols);
  out.fit_residual.resize(rows, cols);

  double mean_sq = 0.0;
  for (const Matrix& m : traj.values()) mean_sq += m.squaredNorm();
  mean_sq /= static_cast<double>(traj.size());
  out.tie_threshold = opt.tie_tolerance * mean_sq;

  const double inf = std::numeric_limits<double>::infinity();
  double best_mse = inf;
  for (Index c = 0; c < cols; ++c) {
    const Trajectory sub = subsample(traj, sample_counts[static_cast<std::size_t>(c)]);
    for (Index r = 0; r < rows; ++r) {
      try {
        const PolynomialCurve curve = fit_polynomial(sub, degrees[static_cast<std::size_t>(r)]);
        const double e = mse(curve, traj);
        out.mse(r, c) = e;
        out.log10_mse(r, c) = std::log10(e);
        out.fit_residual(r, c) = mse(curve, sub);
        best_mse = std::min(best_mse, e);
      } catch (const RankDeficient&) {
        out.mse(r, c) = inf;
        out.log10_mse(r, c) = inf;
        out.fit_residual(r, c) = inf;
      }
    }
  }
  if (best_mse == inf) throw RankDeficient("grid_search: every cell was rank deficient");

  bool found = false;
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) {
      const double e = out.mse(r, c);
      if (!(e <= best_mse + out.tie_threshold)) continue;
      const int d = degrees[static_cast<std::size_t>(r)];
      const std::size_t k = sample_counts[static_cast<std::size_t>(c)];
      if (!found || d < out.best_degree || (d == out.best_degree && k < out.best_samples)) {
        out.best_degree = d;
        out.best_samples = k;
        found = true;
      }
    }
  }
  std::ostringstream tol;
  tol << opt.tie_tolerance;
  out.tie_break_note = "cells within " + tol.str() +
                       " x mean squared norm of the minimum MSE are tied; "
                       "ties resolve to the smaller degree, then the smaller sample count";
  return out;
}

/// Chart used to flatten correlation trajectories before regression.
enum class Frame { offlog, logscaling, spd, euclidean };

inline std::string_view to_string(Frame f) {
  switch (f) {
    case Frame::offlog: return "offlog";
    case Frame::logscaling: return "logscaling";
    case Frame::spd: return "spd";
    case Frame::euclidean: return "euclidean";
  }
  return "unknown";
}

inline Frame parse_frame(std::string_view s) {
  if (s == "offlog") return Frame::offlog;
  if (s == "logscaling") return Frame::logscaling;
  if (s == "spd") return Frame::spd;
  if (s == "euclidean") return Frame::euclidean;
  throw InvalidArgument("unknown frame '" + std::string(s) + "'");
}

inline SpaceTag flat_tag(Frame f) {
  switch (f) {
    case Frame::offlog: return SpaceTag::hollow;
    case Frame::logscaling: return SpaceTag::rowzero;
    case Frame::spd:
    case Frame::euclidean: return SpaceTag::symmetric;
  }
  return SpaceTag::symmetric;
}

/// Solver settings for the charts that need one.
struct ChartOptions {
  SolveDiagOptions diag;
  ScalingOptions scaling;
};

/// Applies the frame's chart to every point: ol_log, ls_log, spd_log, or the
/// identity (retagged as symmetric).
inline Trajectory to_flat(const Trajectory& traj, Frame frame, const ChartOptions& opt = {}) {
  if (frame == Frame::spd) {
    if (traj.tag() != SpaceTag::correlation && traj.tag() != SpaceTag::spd) {
      throw DataError("spd frame needs a correlation or spd trajectory");
    }
  } else if (frame != Frame::euclidean && traj.tag() != SpaceTag::correlation) {
    throw DataError(std::string(to_string(frame)) + " frame needs a correlation trajectory");
  }
  std::vector<Matrix> values;
  values.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    switch (frame) {
      case Frame::offlog: values.push_back(ol_log(traj.at<CorrelationMatrix>(i)).matrix()); break;
      case Frame::logscaling: values.push_back(ls_log(traj.at<CorrelationMatrix>(i), opt.scaling).matrix()); break;
      case Frame::spd: values.push_back(spd_log(traj.at<SPDMatrix>(i)).matrix()); break;
      case Frame::euclidean: values.push_back(traj.value(i)); break;
    }
  }
  return Trajectory(traj.times(), std::move(values), flat_tag(frame));
}

/// Inverse of to_flat for a single flat point. The spd frame returns exp(S)
/// before rescaling; the euclidean frame returns its input.
inline Matrix from_flat_point(const Matrix& z, Frame frame, const ChartOptions& opt = {}) {
  switch (frame) {
    case Frame::offlog: return ol_exp(HollowMatrix(unchecked, z), opt.diag).matrix();
    case Frame::logscaling: return ls_exp(RowZeroMatrix::repair(z)).matrix();
    case Frame::spd: return spd_exp(SymmetricMatrix(unchecked, z)).matrix();
    case Frame::euclidean: return detail::symmetrized(z);
  }
  return z;
}

struct PullbackResult {
  Trajectory fitted;  // correlation for offlog/logscaling/spd, symmetric for euclidean
  DiagnosticSeries diagnostics;
  PolynomialCurve curve;
  double flat_mse = 0.0;      // in chart coordinates, over every time point
  double manifold_mse = 0.0;  // Frobenius, pulled-back fit against the input
};

/// Flatten, subsample, fit, evaluate at every input time, pull back.
///
/// offlog/logscaling outputs are valid correlation matrices by construction.
/// The spd frame rescales exp(P(t)) to unit diagonal and records the scaling
/// and the deviation it causes. The euclidean frame returns raw symmetric
/// matrices, indefinite ones included; min eigenvalues expose them.
inline PullbackResult regress_pullback(const Trajectory& traj, Frame frame, int degree,
                                       std::size_t sample_count, const ChartOptions& opt = {}) {
  if (traj.tag() != SpaceTag::correlation) {
    throw DataError("regress_pullback needs a correlation trajectory");
  }
  const Trajectory flat = to_flat(traj, frame, opt);
  PolynomialCurve curve = fit_polynomial(subsample(flat, sample_count), degree);

  DiagnosticSeries diag;
  diag.times = traj.times();
  std::vector<Matrix> out;
  out.reserve(traj.size());
  double flat_sum = 0.0;
  double manifold_sum = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Matrix z = curve.evaluate(traj.time(i));
    flat_sum += (z - flat.value(i)).squaredNorm();
    Matrix point = from_flat_point(z, frame, opt);
    if (frame == Frame::spd) {
      const SPDMatrix before(unchecked, point);
      Rescaled r = cor_rescale(before);
      const double dev = scaling_deviation(before, r.correlation);
      diag.deviation_percent.push_back(dev);
      diag.max_relative_deviation = std::max(diag.max_relative_deviation, dev);
      diag.scaling_factors.push_back(r.scaling.diagonal());
      point = r.correlation.matrix();
    }
    const double lambda = min_eigenvalue(point);
    diag.min_eigenvalues.push_back(lambda);
    if (lambda <= 0.0) ++diag.nonpositive_count;
    manifold_sum += (point - traj.value(i)).squaredNorm();
    out.push_back(std::move(point));
  }

  const double count = static_cast<double>(traj.size());
  const SpaceTag out_tag = frame == Frame::euclidean ? SpaceTag::symmetric : SpaceTag::correlation;
  return {Trajectory(traj.times(), std::move(out), out_tag), std::move(diag), std::move(curve),
          flat_sum / count, manifold_sum / count};
}

}  // namespace corrlog
