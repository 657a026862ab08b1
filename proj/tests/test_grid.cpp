#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "thinfilm/grid.hpp"

using namespace thinfilm;
using cd = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

// Direct O(n²) DFT with the same normalization and node placement.
cd naive_coeff(const Eigen::VectorXd& p, int k) {
  const int n = static_cast<int>(p.size());
  cd sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const double theta = -kPi + 2.0 * kPi * j / n;
    sum += p[j] * std::exp(cd(0.0, -k * theta));
  }
  return sum / static_cast<double>(n);
}

Eigen::VectorXd random_profile(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd p(n);
  for (auto& x : p) x = dist(rng);
  return p;
}

}  // namespace

TEST(Grid, RejectsOddOrTinySizes) {
  EXPECT_THROW(Grid(7), ParameterError);
  EXPECT_THROW(Grid(4), ParameterError);
  EXPECT_NO_THROW(Grid(8));
}

TEST(Grid, NodesStartAtMinusPi) {
  const Grid g(16);
  EXPECT_DOUBLE_EQ(g.theta(0), -kPi);
  EXPECT_NEAR(g.theta(15), kPi - g.spacing(), 1e-15);
  EXPECT_EQ(g.wavenumber(3), 3);
  EXPECT_EQ(g.wavenumber(13), -3);
  EXPECT_EQ(g.slot(-3), 13);
}

TEST(Analyze, ConstantProfile) {
  const Grid g(32);
  const SpectralCoeffs c = analyze(g, Eigen::VectorXd::Ones(32));
  EXPECT_NEAR(std::abs(c.at(0) - 1.0), 0.0, 1e-15);
  for (int i = 1; i < 32; ++i) EXPECT_LT(std::abs(c.values[i]), 1e-15);
}

TEST(Analyze, SingleHarmonic) {
  const Grid g(32);
  const SpectralCoeffs c = analyze(g, g.sample([](double t) { return std::sin(t); }));
  EXPECT_LT(std::abs(c.at(1) - 1.0 / cd(0.0, 2.0)), 1e-15);
  EXPECT_LT(std::abs(c.at(-1) + 1.0 / cd(0.0, 2.0)), 1e-15);
  for (int k = 2; k <= 16; ++k) {
    EXPECT_LT(std::abs(c.at(k)), 1e-15);
    EXPECT_LT(std::abs(c.at(-k)), 1e-15);
  }
}

TEST(Analyze, MatchesDirectSum) {
  const Grid g(24);
  const Eigen::VectorXd p = random_profile(24, 7);
  const SpectralCoeffs c = analyze(g, p);
  for (int k = -11; k <= 12; ++k) EXPECT_LT(std::abs(c.at(k) - naive_coeff(p, k)), 1e-14) << "k=" << k;
}

TEST(Analyze, RoundTrip) {
  for (int n : {8, 64, 1000, 4096}) {
    const Grid g(n);
    const Eigen::VectorXd p = random_profile(n, static_cast<unsigned>(n));
    const Eigen::VectorXd back = synthesize(analyze(g, p));
    EXPECT_LT((back - p).lpNorm<Eigen::Infinity>(), 1e-13 * p.lpNorm<Eigen::Infinity>()) << "n=" << n;
  }
}

TEST(Analyze, LengthMismatchThrows) {
  const Grid g(16);
  EXPECT_THROW(analyze(g, Eigen::VectorXd::Zero(15)), LengthMismatch);
}

TEST(Differentiate, SineDerivatives) {
  const Grid g(64);
  const Eigen::VectorXd s = g.sample([](double t) { return std::sin(t); });
  const Eigen::VectorXd c = g.sample([](double t) { return std::cos(t); });
  EXPECT_LT((derivative(g, s, 1) - c).lpNorm<Eigen::Infinity>(), 1e-12);
  // Roundoff in the top modes grows like (n/2)^order.
  EXPECT_LT((derivative(g, s, 2) + s).lpNorm<Eigen::Infinity>(), 1e-13 * 32 * 32);
  EXPECT_LT((derivative(g, s, 3) + c).lpNorm<Eigen::Infinity>(), 1e-13 * 32 * 32 * 32);
  EXPECT_LT((derivative(g, s, 4) - s).lpNorm<Eigen::Infinity>(), 1e-13 * 32 * 32 * 32 * 32);
}

TEST(Differentiate, ConstantHasZeroDerivative) {
  const Grid g(64);
  EXPECT_LT(derivative(g, Eigen::VectorXd::Constant(64, 3.5), 1).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(Differentiate, HigherHarmonic) {
  const Grid g(32);
  const Eigen::VectorXd p = g.sample([](double t) { return std::cos(5.0 * t); });
  const Eigen::VectorXd d3 = g.sample([](double t) { return 125.0 * std::sin(5.0 * t); });
  EXPECT_LT((derivative(g, p, 3) - d3).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(Differentiate, RejectsBadOrder) {
  const Grid g(16);
  const SpectralCoeffs c = analyze(g, Eigen::VectorXd::Zero(16));
  EXPECT_THROW(differentiate(c, 0), ParameterError);
}

TEST(DiffMatrix, MatchesTransformPath) {
  const Grid g(48);
  const Eigen::VectorXd s = g.sample([](double t) { return std::sin(t); });
  EXPECT_LT((diff_matrix(g, 1) * s - g.sample([](double t) { return std::cos(t); })).lpNorm<Eigen::Infinity>(), 1e-10);
  const Eigen::VectorXd p = g.sample([](double t) { return std::exp(std::sin(t)); });
  for (int order = 1; order <= 4; ++order)
    EXPECT_LT((diff_matrix(g, order) * p - derivative(g, p, order)).lpNorm<Eigen::Infinity>(), 1e-9) << order;
}

TEST(DiffMatrix, RowSumsVanish) {
  const Grid g(32);
  for (int order = 1; order <= 3; ++order) {
    const Eigen::VectorXd rows = diff_matrix(g, order).rowwise().sum();
    EXPECT_LT(rows.lpNorm<Eigen::Infinity>(), 1e-9) << order;
  }
}

TEST(DiffMatrix, OddOrdersAreAntisymmetric) {
  const Grid g(40);
  for (int order : {1, 3}) {
    const Eigen::MatrixXd d = diff_matrix(g, order);
    EXPECT_LT((d + d.transpose()).lpNorm<Eigen::Infinity>(), 1e-12 * d.lpNorm<Eigen::Infinity>()) << order;
  }
  const Eigen::MatrixXd d2 = diff_matrix(g, 2);
  EXPECT_LT((d2 - d2.transpose()).lpNorm<Eigen::Infinity>(), 1e-12 * d2.lpNorm<Eigen::Infinity>());
}

TEST(Quadrature, Basics) {
  const Grid g(32);
  EXPECT_NEAR(quadrature(Eigen::VectorXd::Constant(32, 1.7)), 2.0 * kPi * 1.7, 1e-13);
  EXPECT_NEAR(quadrature(g.sample([](double t) { return std::sin(t); })), 0.0, 1e-14);
  EXPECT_NEAR(quadrature(g.sample([](double t) { return 1.0 + 0.3 * std::sin(t); })), 2.0 * kPi, 1e-13);
  EXPECT_NEAR(quadrature_weights(g).sum(), 2.0 * kPi, 1e-13);
}

TEST(Resample, BandLimitedIsExact) {
  const Grid coarse(16), fine(64);
  auto f = [](double t) { return 0.2 + std::sin(t) - 0.3 * std::cos(3.0 * t) + 0.1 * std::sin(6.0 * t); };
  const Eigen::VectorXd up = resample(coarse, coarse.sample(f), fine);
  EXPECT_LT((up - fine.sample(f)).lpNorm<Eigen::Infinity>(), 1e-13);
  const Eigen::VectorXd down = resample(fine, fine.sample(f), coarse);
  EXPECT_LT((down - coarse.sample(f)).lpNorm<Eigen::Infinity>(), 1e-13);
}

TEST(Resample, NyquistModeSurvivesRefinement) {
  const Grid coarse(8), fine(32);
  auto f = [](double t) { return std::cos(4.0 * t); };
  const Eigen::VectorXd up = resample(coarse, coarse.sample(f), fine);
  EXPECT_LT((up - fine.sample(f)).lpNorm<Eigen::Infinity>(), 1e-13);
  EXPECT_LT((resample(fine, up, coarse) - coarse.sample(f)).lpNorm<Eigen::Infinity>(), 1e-13);
}

TEST(Dealias, ZerosUpperThird) {
  const Grid g(24);
  const SpectralCoeffs c = dealias(analyze(g, g.sample([](double t) { return std::sin(t) + std::cos(10.0 * t); })));
  EXPECT_LT(std::abs(c.at(10)), 1e-15);
  EXPECT_GT(std::abs(c.at(1)), 0.4);
}
