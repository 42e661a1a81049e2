#include "fbmlt/quadrature.hpp"
#include "oracles/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace fbmlt::quad;

TEST(Quadrature, GaussKronrodIntegratesPolynomialExactly) {
  const auto r = gauss_kronrod([](double x) { return 3 * x * x - 2 * x + 1; }, -1.0, 2.0);
  EXPECT_NEAR(r.value, 9.0 - 3.0 + 3.0, 1e-13);
}

TEST(Quadrature, GaussKronrodErrorEstimateIsHonest) {
  const auto r = gauss_kronrod([](double x) { return std::exp(-x) * std::sin(5 * x); }, 0.0, 10.0);
  const double exact = (5.0 - std::exp(-10.0) * (std::sin(50.0) + 5 * std::cos(50.0))) / 26.0;
  EXPECT_NEAR(r.value, exact, 1e-12);
  EXPECT_LE(std::abs(r.value - exact), std::max(10 * r.error, 1e-14));
}

TEST(Quadrature, PanelsAddUp) {
  const std::vector<double> breaks{0.0, 0.5, 1.0, 3.0};
  const auto r = gauss_kronrod_panels([](double x) { return std::abs(x - 0.5); }, breaks);
  EXPECT_NEAR(r.value, 0.125 + 0.125 + 3.0, 1e-13);  // int_1^3 (x - 1/2) dx = 3
}

TEST(Quadrature, GeometricPanelsHandleScaleFreeIntegrand) {
  const auto r = gauss_kronrod_geometric([](double x) { return 1.0 / (1.0 + x * x); }, 1e-6, 1e6);
  EXPECT_NEAR(r.value, std::atan(1e6) - std::atan(1e-6), 1e-10);
}

TEST(Quadrature, TanhSinhToleratesEndpointSingularity) {
  const auto r = tanh_sinh([](double x) { return std::pow(x, -0.7); }, 0.0, 1.0);
  EXPECT_NEAR(r.value, 1.0 / 0.3, 1e-8);
}

TEST(Quadrature, ExpSinhOnHalfLine) {
  const auto r = exp_sinh([](double x) { return std::exp(-x * x); }, 0.0);
  EXPECT_NEAR(r.value, std::sqrt(std::numbers::pi) / 2, 1e-10);
}

TEST(Oracle, LanczosGammaMatchesKnownValues) {
  EXPECT_NEAR(oracle::lanczos_gamma(0.5), std::sqrt(std::numbers::pi), 1e-14);
  EXPECT_NEAR(oracle::lanczos_gamma(5.0), 24.0, 1e-12);
  EXPECT_NEAR(oracle::lanczos_gamma(1.5), std::sqrt(std::numbers::pi) / 2, 1e-14);
  for (double x = 0.05; x < 3.0; x += 0.173)
    EXPECT_NEAR(oracle::lanczos_gamma(x) / std::tgamma(x), 1.0, 1e-13) << x;
}

TEST(Oracle, RombergIntegratesSmoothFunction) {
  EXPECT_NEAR(oracle::romberg([](double x) { return std::cos(x); }, 0.0, 1.0), std::sin(1.0), 1e-13);
}
