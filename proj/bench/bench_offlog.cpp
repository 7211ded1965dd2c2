// Off-log timing on a 1801 x 100 x 100 trajectory. Fails if the forward map
// takes longer than 30 s or the inverse longer than 300 s.

#include <algorithm>
#include <chrono>
#include <iostream>
#include <vector>

#include "corrlog/corrlog.hpp"

using namespace corrlog;

int main() {
  constexpr double kForwardSeconds = 30.0;
  constexpr double kInverseSeconds = 300.0;

  SynthSpec spec;
  spec.n = 100;
  spec.length = 1801;
  spec.noise = 0.05;
  spec.seed = 7;
  const std::vector<HollowMatrix> coords = synthesize_hollow_path(spec);

  using clock = std::chrono::steady_clock;
  auto start = clock::now();
  std::vector<CorrelationMatrix> points;
  points.reserve(coords.size());
  for (const HollowMatrix& s : coords) points.push_back(ol_exp(s));
  const double inverse = std::chrono::duration<double>(clock::now() - start).count();

  start = clock::now();
  double worst = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const HollowMatrix back = ol_log(points[i]);
    worst = std::max(worst, (back - coords[i]).frobenius_norm() / std::max(1.0, coords[i].frobenius_norm()));
  }
  const double forward = std::chrono::duration<double>(clock::now() - start).count();

  const bool ok = forward <= kForwardSeconds && inverse <= kInverseSeconds;
  std::cout << "points: " << points.size() << " dimension: " << spec.n << "\n"
            << "forward (log) seconds: " << forward << " (limit " << kForwardSeconds << ")\n"
            << "inverse (exp) seconds: " << inverse << " (limit " << kInverseSeconds << ")\n"
            << "worst relative round-trip error: " << worst << "\n"
            << (ok ? "PASS" : "FAIL") << std::endl;
  return ok ? 0 : 1;
}
