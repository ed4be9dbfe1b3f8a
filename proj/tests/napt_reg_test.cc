#include <gtest/gtest.h>

#include <cmath>

#include "weaksmith/napt_reg.h"

namespace weaksmith {
namespace {

TEST(NaptGradient, HandDerivedVector) {
  const std::vector<double> theta{1.0, 2.0}, init{0.0, 0.0};
  const auto g = napt_reg_gradient({theta, init}, {0.5, 0.25});
  EXPECT_EQ(g, (std::vector<double>{1.5, 3.0}));
  // ce + 0.5 * 5 + 0.25 * 5
  EXPECT_DOUBLE_EQ(napt_loss(2.0, {theta, init}, {0.5, 0.25}), 5.75);
}

TEST(NaptGradient, ZeroCoefficientsGiveZero) {
  const std::vector<double> theta{3.0, -1.0}, init{1.0, 1.0};
  EXPECT_EQ(napt_reg_gradient({theta, init}, {}), (std::vector<double>{0.0, 0.0}));
  EXPECT_DOUBLE_EQ(napt_loss(0.7, {theta, init}, {}), 0.7);
}

// Central differences of napt_loss with ce fixed.
std::vector<double> numeric_gradient(std::vector<double> theta, const std::vector<double>& init,
                                     const RegConfig& cfg, double h = 1e-5) {
  std::vector<double> g(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double x = theta[i];
    theta[i] = x + h;
    const double up = napt_loss(1.0, {theta, init}, cfg);
    theta[i] = x - h;
    const double down = napt_loss(1.0, {theta, init}, cfg);
    theta[i] = x;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, norm = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    norm += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12);
}

TEST(NaptGradient, MatchesFiniteDifferences) {
  auto rng = derived_rng(51, "fd");
  for (bool squared : {true, false}) {
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t dim = 1 + uniform_index(rng, 32);
      std::vector<double> theta(dim), init(dim);
      for (std::size_t i = 0; i < dim; ++i) {
        theta[i] = 4 * uniform_unit(rng) - 2;
        init[i] = 4 * uniform_unit(rng) - 2;
      }
      const RegConfig cfg{2 * uniform_unit(rng), 2 * uniform_unit(rng), squared};
      const auto analytic = napt_reg_gradient({theta, init}, cfg);
      ASSERT_LT(relative_error(numeric_gradient(theta, init, cfg), analytic), 1e-6) << trial;
    }
  }
}

TEST(NaptGradient, UnsquaredNormAtZero) {
  const std::vector<double> theta{0.0, 0.0}, init{0.0, 0.0};
  EXPECT_EQ(napt_reg_gradient({theta, init}, {1.0, 1.0, false}), (std::vector<double>{0.0, 0.0}));
  const std::vector<double> t2{3.0, 4.0};
  const auto terms = penalty_terms({t2, init}, {1.0, 1.0, false});
  EXPECT_DOUBLE_EQ(terms.anchored, 5.0);
  EXPECT_DOUBLE_EQ(terms.decay, 5.0);
}

TEST(NaptLoss, RejectsBadInput) {
  const std::vector<double> a{1.0, 2.0}, b{1.0};
  EXPECT_THROW(napt_loss(0.0, {a, b}, {}), DimensionError);
  EXPECT_THROW(napt_reg_gradient({a, b}, {}), DimensionError);
  const std::vector<double> nan{1.0, std::nan("")};
  EXPECT_THROW(napt_loss(0.0, {nan, a}, {}), NumericError);
  EXPECT_THROW(napt_loss(INFINITY, {a, a}, {}), NumericError);
  EXPECT_THROW(napt_loss(0.0, {a, a}, {-1.0, 0.0}), ConfigError);
}

TEST(NaptLoss, CompensatedSumOnLongVectors) {
  // Each tiny square is below half an ulp of 1, so naive summation keeps exactly 1.
  const std::size_t n = kCompensatedSumThreshold + 1;
  const double tiny = std::ldexp(1.0, -28);
  std::vector<double> theta(n, tiny), init(n, 0.0);
  theta[0] = 1.0;
  const auto terms = penalty_terms({theta, init}, {1.0, 0.0});
  const double expected = 1.0 + static_cast<double>(n - 1) * std::ldexp(1.0, -56);
  EXPECT_GT(expected, 1.0);
  EXPECT_EQ(terms.anchored, expected);
}

}  // namespace
}  // namespace weaksmith
