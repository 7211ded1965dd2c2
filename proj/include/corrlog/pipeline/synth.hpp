#pragma once

// Deterministic synthetic correlation trajectories, generated as paths in
// Hol(n) and mapped through the off-log inverse.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "corrlog/matrix_types.hpp"
#include "corrlog/offlog.hpp"
#include "corrlog/trajectory.hpp"

namespace corrlog {

struct SynthSpec {
  Index n = 10;
  std::size_t length = 100;
  double smoothness = 1.0;  // amplitude of the low-frequency variation; 0 freezes the path
  double noise = 0.0;       // per-point independent perturbation, same units
  std::uint64_t seed = 0;
  int modes = 3;
  double spread = 0.8;  // entries are drawn with standard deviation spread / sqrt(n)
};

inline HollowMatrix random_hollow(Index n, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, sigma);
  Matrix m = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) m(i, j) = m(j, i) = normal(rng);
  }
  return {unchecked, m};
}

/// S(u) = S0 + smoothness * sum_f sin(pi f u + phi_f) A_f / f + noise * N_u,
/// u = t / (T - 1), with S0, A_f, N_u random hollow matrices.
inline std::vector<HollowMatrix> synthesize_hollow_path(const SynthSpec& spec) {
  if (spec.n < 2 || spec.length < 1) throw InvalidArgument("synthesize: need n >= 2 and length >= 1");
  std::mt19937_64 rng(spec.seed);
  const double sigma = spec.spread / std::sqrt(static_cast<double>(spec.n));
  const HollowMatrix base = random_hollow(spec.n, sigma, rng);
  std::vector<HollowMatrix> modes;
  std::vector<double> phases;
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  for (int f = 1; f <= spec.modes; ++f) {
    modes.push_back(random_hollow(spec.n, sigma, rng) / static_cast<double>(f));
    phases.push_back(phase(rng));
  }

  std::vector<HollowMatrix> path;
  path.reserve(spec.length);
  const double denom = spec.length > 1 ? static_cast<double>(spec.length - 1) : 1.0;
  for (std::size_t t = 0; t < spec.length; ++t) {
    const double u = static_cast<double>(t) / denom;
    HollowMatrix s = base;
    for (std::size_t f = 0; f < modes.size(); ++f) {
      const double w = std::sin(std::numbers::pi * static_cast<double>(f + 1) * u + phases[f]);
      s = s + (spec.smoothness * w) * modes[f];
    }
    if (spec.noise > 0.0) s = s + spec.noise * random_hollow(spec.n, sigma, rng);
    path.push_back(std::move(s));
  }
  return path;
}

/// Every point is ol_exp of the hollow path, so every point is a valid
/// correlation matrix. Timestamps are 0..T-1.
inline Trajectory synthesize_trajectory(const SynthSpec& spec) {
  std::vector<CorrelationMatrix> points;
  points.reserve(spec.length);
  for (const HollowMatrix& s : synthesize_hollow_path(spec)) points.push_back(ol_exp(s));
  return Trajectory::from(Trajectory::index_times(spec.length), points);
}

/// Degree-`degree` polynomial path sum_p A_p u^p in Hol(n), u in [-1, 1]
/// spanning the time indices 0..T-1.
inline std::vector<HollowMatrix> synthesize_polynomial_path(Index n, std::size_t length, int degree,
                                                            double spread, std::uint64_t seed) {
  if (n < 2 || length < 2 || degree < 0) throw InvalidArgument("synthesize_polynomial: bad shape");
  std::mt19937_64 rng(seed);
  const double sigma = spread / std::sqrt(static_cast<double>(n));
  std::vector<HollowMatrix> coeffs;
  for (int p = 0; p <= degree; ++p) coeffs.push_back(random_hollow(n, sigma, rng));
  std::vector<HollowMatrix> path;
  path.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    const double u = 2.0 * static_cast<double>(t) / static_cast<double>(length - 1) - 1.0;
    HollowMatrix s = coeffs.back();
    for (int p = degree - 1; p >= 0; --p) s = u * s + coeffs[static_cast<std::size_t>(p)];
    path.push_back(std::move(s));
  }
  return path;
}

inline Trajectory synthesize_polynomial_trajectory(Index n, std::size_t length, int degree,
                                                   double spread, std::uint64_t seed) {
  std::vector<CorrelationMatrix> points;
  points.reserve(length);
  for (const HollowMatrix& s : synthesize_polynomial_path(n, length, degree, spread, seed)) {
    points.push_back(ol_exp(s));
  }
  return Trajectory::from(Trajectory::index_times(length), points);
}

}  // namespace corrlog
