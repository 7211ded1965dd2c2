#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace corrlog;

namespace {

double mean_step(const Trajectory& t) {
  double acc = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) acc += (t.value(i) - t.value(i - 1)).norm();
  return acc / static_cast<double>(t.size() - 1);
}

}  // namespace

TEST(Synth, ZeroSmoothnessIsConstant) {
  SynthSpec spec;
  spec.n = 5;
  spec.length = 10;
  spec.smoothness = 0.0;
  const Trajectory t = synthesize_trajectory(spec);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_EQ(t.value(i), t.value(0));
}

TEST(Synth, DeterministicPerSeed) {
  SynthSpec spec;
  spec.n = 6;
  spec.length = 12;
  spec.noise = 0.2;
  spec.seed = 17;
  const Trajectory a = synthesize_trajectory(spec);
  const Trajectory b = synthesize_trajectory(spec);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.value(i), b.value(i));
  spec.seed = 18;
  EXPECT_NE(synthesize_trajectory(spec).value(0), a.value(0));
}

TEST(Synth, HundredSeedsAllValid) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SynthSpec spec;
    spec.n = 5;
    spec.length = 8;
    spec.noise = 0.3;
    spec.seed = seed;
    const Trajectory t = synthesize_trajectory(spec);
    for (const Matrix& m : t.values()) {
      EXPECT_NO_THROW(CorrelationMatrix{m}) << "seed " << seed;
    }
  }
}

TEST(Synth, StepSizeGrowsWithNoise) {
  double previous = 0.0;
  for (double noise : {0.0, 0.05, 0.2, 0.5}) {
    SynthSpec spec;
    spec.n = 8;
    spec.length = 50;
    spec.noise = noise;
    spec.seed = 3;
    const double step = mean_step(synthesize_trajectory(spec));
    EXPECT_GT(step, previous) << "noise " << noise;
    previous = step;
  }
}

TEST(Synth, PolynomialPathIsPolynomial) {
  const auto path = synthesize_polynomial_path(4, 30, 3, 0.8, 9);
  std::vector<Matrix> values;
  for (const auto& h : path) values.push_back(h.matrix());
  const Trajectory t(Trajectory::index_times(30), values, SpaceTag::hollow);
  EXPECT_LE(mse(fit_polynomial(subsample(t, 4), 3), t), 1e-24);
  EXPECT_NO_THROW(synthesize_polynomial_trajectory(4, 30, 3, 0.8, 9));
}

TEST(Vectorize, Conventions) {
  Matrix m(3, 3);
  m << 1, 2, 3, 2, 4, 5, 3, 5, 6;
  EXPECT_EQ(vectorize(m, SpaceTag::symmetric), (Vector(6) << 1, 2, 3, 4, 5, 6).finished());
  EXPECT_EQ(vectorize(m, SpaceTag::hollow), (Vector(3) << 2, 3, 5).finished());
}

TEST(Pca, PlanarPointsHaveZeroThirdVariance) {
  std::mt19937_64 rng(100);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Vector origin = Vector::Random(6);
  const Vector a = Vector::Random(6);
  const Vector b = Vector::Random(6);
  Matrix data(20, 6);
  for (Index i = 0; i < 20; ++i) data.row(i) = (origin + normal(rng) * a + normal(rng) * b).transpose();
  const PcaResult r = pca3_rows(data);
  EXPECT_LE(r.variance(2), 1e-12 * r.variance(0));
  EXPECT_GE(r.variance(0), r.variance(1));
  EXPECT_LE(r.ratio.sum(), 1.0 + 1e-12);
  EXPECT_NEAR(r.ratio(0) + r.ratio(1), 1.0, 1e-12);
}

TEST(Pca, VariancesInvariantUnderRotation) {
  std::mt19937_64 rng(101);
  const Matrix data = oracle::random_symmetric(15, rng).leftCols(8);
  Eigen::HouseholderQR<Matrix> qr(oracle::random_symmetric(8, rng));
  const Matrix q = qr.householderQ();
  const PcaResult a = pca3_rows(data);
  const PcaResult b = pca3_rows(data * q);
  EXPECT_LE((a.variance - b.variance).norm(), 1e-10 * a.variance.norm());
  EXPECT_NEAR(a.total_variance, b.total_variance, 1e-10 * a.total_variance);
}

TEST(Pca, GramRouteMatchesCovarianceRoute) {
  std::mt19937_64 rng(102);
  Matrix wide(6, 20);
  for (Index i = 0; i < 6; ++i) wide.row(i) = oracle::random_symmetric(20, rng).row(0);
  const PcaResult g = pca3_rows(wide);
  const Matrix centered = wide.rowwise() - wide.colwise().mean();
  Eigen::SelfAdjointEigenSolver<Matrix> es(centered.transpose() * centered / 5.0);
  for (Index c = 0; c < 3; ++c) EXPECT_NEAR(g.variance(c), es.eigenvalues()(19 - c), 1e-10);
  EXPECT_LE((g.loadings.transpose() * g.loadings - Matrix::Identity(3, 3)).norm(), 1e-10);
  EXPECT_LE((g.coordinates - centered * g.loadings).norm(), 1e-10);
}

TEST(Pca, SignConventionAndOrdering) {
  std::mt19937_64 rng(103);
  Matrix data(30, 5);
  for (Index i = 0; i < 30; ++i) data.row(i) = oracle::random_symmetric(5, rng).row(0);
  const PcaResult r = pca3_rows(data);
  for (Index c = 0; c < 3; ++c) {
    Index arg = 0;
    r.loadings.col(c).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(r.loadings(arg, c), 0.0);
  }
  EXPECT_GE(r.variance(0), r.variance(1));
  EXPECT_GE(r.variance(1), r.variance(2));
  EXPECT_GE(r.variance(2), 0.0);
  EXPECT_LE(r.variance.sum(), r.total_variance * (1 + 1e-12));
  const PcaResult again = pca3_rows(data);
  EXPECT_EQ(again.coordinates, r.coordinates);
}

TEST(Pca, DegenerateInputs) {
  EXPECT_THROW(pca3_rows(Matrix::Ones(10, 4)), DegenerateCovariance);
  Matrix two(10, 4);
  for (Index i = 0; i < 10; ++i) two.row(i) = (i % 2 ? Vector::Ones(4) : Vector::Zero(4)).transpose();
  EXPECT_THROW(pca3_rows(two), DegenerateCovariance);
  EXPECT_THROW(pca3_rows(Matrix::Random(3, 4)), InvalidArgument);
}

TEST(Pca, TrajectoryUsesTagVectorization) {
  SynthSpec spec;
  spec.n = 5;
  spec.length = 20;
  const Trajectory t = synthesize_trajectory(spec);
  const PcaResult r = pca3(to_flat(t, Frame::offlog));
  EXPECT_EQ(r.loadings.rows(), 10);
  EXPECT_EQ(pca3(t).loadings.rows(), 15);
}
