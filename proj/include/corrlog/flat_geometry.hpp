#pragma once

// Riemannian operations of a pullback metric through a flat chart. Every
// operation is a straight-line computation in chart coordinates; only
// metric_inner and distance depend on the quadratic form.

#include <cmath>
#include <concepts>
#include <span>

#include "corrlog/matrix_types.hpp"

namespace corrlog {

template <class C>
concept FlatChart = requires(const CorrelationMatrix& c, const typename C::Coord& s,
                             const HollowMatrix& x, const typename C::Form& q, double t) {
  { C::log(c) } -> std::same_as<typename C::Coord>;
  { C::exp(s) } -> std::same_as<CorrelationMatrix>;
  { C::dlog(c, x) } -> std::same_as<typename C::Coord>;
  { C::dexp(s, s) } -> std::same_as<HollowMatrix>;
  { q.inner(s, s) } -> std::convertible_to<double>;
  { t * s + s } -> std::same_as<typename C::Coord>;
};

template <FlatChart Chart>
struct FlatGeometry {
  using Coord = typename Chart::Coord;
  using Form = typename Chart::Form;

  /// g_C(X, Y) = <d_C Log(X), d_C Log(Y)>_q.
  static double metric_inner(const Form& q, const CorrelationMatrix& c, const HollowMatrix& x,
                             const HollowMatrix& y) {
    return q.inner(Chart::dlog(c, x), Chart::dlog(c, y));
  }

  static double metric_norm(const Form& q, const CorrelationMatrix& c, const HollowMatrix& x) {
    return std::sqrt(metric_inner(q, c, x, x));
  }

  static CorrelationMatrix exp_map(const CorrelationMatrix& c, const HollowMatrix& x) {
    return Chart::exp(Chart::log(c) + Chart::dlog(c, x));
  }

  static HollowMatrix log_map(const CorrelationMatrix& c, const CorrelationMatrix& target) {
    const Coord base = Chart::log(c);
    return Chart::dexp(base, Chart::log(target) - base);
  }

  /// Defined for every real t; t outside [0, 1] extrapolates along the line.
  static CorrelationMatrix geodesic(const CorrelationMatrix& c, const CorrelationMatrix& target,
                                    double t) {
    return Chart::exp((1.0 - t) * Chart::log(c) + t * Chart::log(target));
  }

  static double distance(const Form& q, const CorrelationMatrix& c,
                         const CorrelationMatrix& target) {
    const Coord diff = Chart::log(target) - Chart::log(c);
    return std::sqrt(q.inner(diff, diff));
  }

  static HollowMatrix parallel_transport(const CorrelationMatrix& from, const CorrelationMatrix& to,
                                         const HollowMatrix& x) {
    return Chart::dexp(Chart::log(to), Chart::dlog(from, x));
  }

  static CorrelationMatrix frechet_mean(std::span<const CorrelationMatrix> samples) {
    if (samples.empty()) throw InvalidArgument("frechet_mean: empty sample");
    Coord sum = Chart::log(samples.front());
    for (const CorrelationMatrix& c : samples.subspan(1)) sum = sum + Chart::log(c);
    return Chart::exp(sum / static_cast<double>(samples.size()));
  }
};

}  // namespace corrlog
