#include "fbmlt/error.hpp"
#include "fbmlt/experiments.hpp"
#include "fbmlt/fbm_engine.hpp"
#include "fbmlt/hurst_constants.hpp"
#include "fbmlt/path_io.hpp"
#include "oracles/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace fbmlt;

namespace {

// Empirical covariance of columns of `paths` at grid indices and the 5-SE check.
void expect_covariance_within_5se(const std::vector<FbmPath>& paths, double H, std::size_t stride) {
  const std::size_t N = paths.front().N;
  const double M = static_cast<double>(paths.size());
  std::vector<std::size_t> idx;
  for (std::size_t k = stride; k <= N; k += stride) idx.push_back(k);
  int failures = 0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a; b < idx.size(); ++b) {
      double s = 0, s2 = 0;
      for (const auto& p : paths) {
        const double x = p.values[idx[a]] * p.values[idx[b]];
        s += x;
        s2 += x * x;
      }
      const double mean = s / M;
      const double se = std::sqrt((s2 / M - mean * mean) / M);
      const double exact = covariance(H, paths.front().time(idx[a]), paths.front().time(idx[b]));
      if (std::abs(mean - exact) > 5 * se) ++failures;
    }
  }
  EXPECT_EQ(failures, 0);
}

}  // namespace

TEST(Covariance, Examples) {
  EXPECT_NEAR(covariance(0.3, 2.0, 2.0), std::pow(2.0, 0.6), 1e-15);
  EXPECT_DOUBLE_EQ(covariance(0.5, 0.3, 0.8), 0.3);
  EXPECT_NEAR(covariance(0.75, 1.0, 2.0), std::sqrt(2.0), 1e-15);
  EXPECT_THROW(covariance(0.5, -1.0, 1.0), DomainError);
}

TEST(Sampler, PathShapeAndOrigin) {
  for (Method m : {Method::cholesky, Method::circulant, Method::volterra}) {
    const auto p = PathSampler(0.4, 2.0, 64, 1, m).sample(3);
    ASSERT_EQ(p.values.size(), 65u);
    EXPECT_EQ(p.values[0], 0.0);
    EXPECT_DOUBLE_EQ(p.dt(), 2.0 / 64);
    EXPECT_EQ(p.wiener_increments.empty(), m != Method::volterra);
  }
}

TEST(Sampler, DeterministicPerIndexAndThreadCount) {
  const auto a = sample_paths(0.7, 1.0, 128, 20, 42, Method::circulant, 1);
  const auto b = sample_paths(0.7, 1.0, 128, 20, 42, Method::circulant, 4);
  const auto single = PathSampler(0.7, 1.0, 128, 42, Method::circulant).sample(13);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].values, b[i].values);
  EXPECT_EQ(a[13].values, single.values);
  const auto other = sample_paths(0.7, 1.0, 128, 1, 43, Method::circulant, 1);
  EXPECT_NE(a[0].values, other[0].values);
}

TEST(Sampler, BrownianIncrementsHaveVarianceDt) {
  for (Method m : {Method::cholesky, Method::circulant, Method::volterra}) {
    const auto paths = sample_paths(0.5, 1.0, 32, 10000, 9, m);
    const double dt = 1.0 / 32;
    double s = 0, s2 = 0;
    std::size_t n = 0;
    for (const auto& p : paths)
      for (std::size_t k = 1; k <= 32; ++k) {
        const double d = p.values[k] - p.values[k - 1];
        s += d * d;
        s2 += d * d * d * d;
        ++n;
      }
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, dt, 5 * se) << to_string(m);
  }
}

TEST(Sampler, TerminalVarianceIsTToTheTwoH) {
  for (double H : {0.25, 0.6, 0.85}) {
    const double T = 1.7;
    const auto paths = sample_paths(H, T, 64, 10000, 2, Method::circulant);
    double s = 0, s4 = 0;
    for (const auto& p : paths) {
      const double x = p.values.back() * p.values.back();
      s += x;
      s4 += x * x;
    }
    const double M = paths.size(), mean = s / M, se = std::sqrt((s4 / M - mean * mean) / M);
    EXPECT_NEAR(mean, std::pow(T, 2 * H), 5 * se) << H;
  }
}

TEST(Sampler, CirculantCovarianceMatchesFormula) {
  expect_covariance_within_5se(sample_paths(0.3, 1.0, 256, 10000, 17, Method::circulant), 0.3, 16);
}

TEST(Sampler, CholeskyCovarianceMatchesFormula) {
  expect_covariance_within_5se(sample_paths(0.3, 1.0, 256, 10000, 18, Method::cholesky), 0.3, 16);
}

TEST(Sampler, SelfSimilarityOfMarginals) {
  // c^{-H} B_{c t} and B_t have the same law; compare B at t = 0.5 on [0,1]
  // against 4^{-H} B at t = 2 on [0,4] from an independent family.
  const double H = 0.35, c = 4.0;
  const auto a = sample_paths(H, 1.0, 64, 10000, 100, Method::circulant);
  const auto b = sample_paths(H, c, 64, 10000, 200, Method::circulant);
  std::vector<double> x, y;
  for (const auto& p : a) x.push_back(p.values[32]);
  for (const auto& p : b) y.push_back(std::pow(c, -H) * p.values[32]);
  EXPECT_LT(ks_statistic(x, y), ks_critical(0.01, x.size(), y.size()));
}

TEST(Sampler, VolterraValuesReproducibleFromWienerIncrements) {
  const double H = 0.7;
  const auto p = PathSampler(H, 1.0, 16, 5, Method::volterra).sample(0);
  for (std::size_t k = 1; k <= 16; ++k) {
    double acc = 0;
    for (std::size_t j = 0; j < k; ++j) acc += volterra_kernel(H, p.time(k), (j + 0.5) * p.dt()) * p.wiener_increments[j];
    EXPECT_NEAR(p.values[k], acc, 1e-9 * std::max(1.0, std::abs(acc)));
  }
}

TEST(Sampler, MethodLimitsAndParsing) {
  EXPECT_THROW(PathSampler(0.5, 1.0, 5000, 0, Method::cholesky), DomainError);
  EXPECT_THROW(PathSampler(0.5, 1.0, 0, 0, Method::circulant), DomainError);
  EXPECT_THROW(PathSampler(1.2, 1.0, 8, 0, Method::circulant), DomainError);
  EXPECT_EQ(parse_method("volterra"), Method::volterra);
  EXPECT_THROW(parse_method("fft"), DomainError);
}

TEST(Kernel, BrownianCaseIsIndicator) {
  EXPECT_EQ(volterra_kernel(0.5, 2.0, 1.0), 1.0);
  EXPECT_EQ(volterra_kernel(0.5, 1.0, 2.0), 0.0);
}

TEST(Kernel, VanishesWhenSNotBelowT) {
  for (double H : {0.3, 0.75}) {
    EXPECT_EQ(volterra_kernel(H, 1.0, 1.0), 0.0);
    EXPECT_EQ(volterra_kernel(H, 1.0, 1.5), 0.0);
  }
  EXPECT_THROW(volterra_kernel(0.6, 1.0, 0.0), DomainError);
}

TEST(Kernel, PinnedAgainstSeriesOracleWithinBracket) {
  const double H = 0.75, t = 2, s = 1;
  const double k = volterra_kernel(H, t, s);
  const double lo = c_h(H) / (H - 0.5) * std::pow(t - s, H - 0.5);
  EXPECT_GE(k, lo);
  EXPECT_LE(k, std::pow(t / s, H - 0.5) * lo);
  EXPECT_NEAR(k, oracle::kernel(H, t, s), 1e-9 * k);
  EXPECT_NEAR(k, 1.1149910341991, 1e-12);
  EXPECT_NEAR(volterra_kernel(0.3, 2, 1), oracle::kernel(0.3, 2, 1), 1e-9);
  EXPECT_NEAR(volterra_kernel(0.3, 2, 1), 0.760002929002994, 1e-12);
}

TEST(KernelProperty, AgreesWithOracleOnLogGrid) {
  for (double H : {0.2, 0.3, 0.45, 0.6, 0.75, 0.9})
    for (double s : {0.01, 0.3, 1.0})
      for (double r : {1.001, 1.5, 10.0, 300.0}) {
        const double t = s * r;
        EXPECT_NEAR(volterra_kernel(H, t, s) / oracle::kernel(H, t, s), 1.0, 1e-8) << H << ' ' << t << ' ' << s;
      }
}

TEST(Kernel, TimeDerivativeMatchesFiniteDifference) {
  for (double H : {0.3, 0.75}) {
    const double t = 2.0, s = 1.0, h = 1e-5;
    const double fd = (volterra_kernel(H, t + h, s) - volterra_kernel(H, t - h, s)) / (2 * h);
    EXPECT_NEAR(volterra_kernel_dt(H, t, s), fd, 1e-6 * std::abs(fd));
    EXPECT_NEAR(volterra_kernel_increment(H, 1.5, 2.5, s), volterra_kernel(H, 2.5, s) - volterra_kernel(H, 1.5, s), 1e-9);
  }
}

TEST(Mu, BrownianAndEmptyCases) {
  EXPECT_NEAR(mu(0.5, 0.3, 1.1), 0.8, 1e-14);
  EXPECT_EQ(mu(0.7, 1.0, 1.0), 0.0);
  EXPECT_THROW(mu(0.7, 1.5, 1.0), DomainError);
}

TEST(Mu, PinnedAgainstOracleWithinBracket) {
  const double H = 0.75, r = 1.0, s = 0.5, n = 1.0;
  const double v = mu(H, r, r + s / n);
  const double lo = std::pow(c_h(H), 2) * std::pow(s, 2 * H) / (2 * H * std::pow(H - 0.5, 2));
  EXPECT_GE(std::pow(n, 2 * H) * v, lo);
  EXPECT_LE(std::pow(n, 2 * H) * v, lo * std::pow(1 + s / (r * n), 2 * H - 1));
  EXPECT_NEAR(v, oracle::mu(H, r, r + s), 1e-7 * v);
  EXPECT_NEAR(v, 0.276431617729409, 1e-10);
  EXPECT_NEAR(mu(0.3, 1, 1.5), oracle::mu(0.3, 1, 1.5), 1e-7);
}

TEST(ConditionalMean, BrownianEqualsWienerPath) {
  const auto p = PathSampler(0.5, 1.0, 64, 3, Method::volterra).sample(0);
  EXPECT_NEAR(conditional_mean_path(p, 0.5, 0.9), p.values[32], 1e-12);
  EXPECT_EQ(conditional_mean_path(p, 0.0, 0.7), 0.0);
}

TEST(ConditionalMean, RequiresWienerIncrements) {
  const auto p = PathSampler(0.6, 1.0, 64, 3, Method::circulant).sample(0);
  EXPECT_THROW(conditional_mean_path(p, 0.2, 0.5), DomainError);
}

TEST(ConditionalMean, ResidualVarianceIsMu) {
  const double H = 0.75, r = 0.5, s = 1.0;
  const std::size_t N = 256, M = 10000;
  const PathSampler sampler(H, 1.0, N, 21, Method::volterra);
  // The kernel row K(s, theta_j) is shared by all paths.
  std::vector<double> row;
  for (std::size_t j = 0; (j + 0.5) / N < r; ++j) row.push_back(volterra_kernel(H, s, (j + 0.5) / N));
  const FbmPath probe = sampler.sample(0);
  double direct = 0;
  for (std::size_t j = 0; j < row.size(); ++j) direct += row[j] * probe.wiener_increments[j];
  EXPECT_NEAR(conditional_mean_path(probe, r, s), direct, 1e-12);
  double acc = 0, acc2 = 0;
  for (std::size_t i = 0; i < M; ++i) {
    const FbmPath p = sampler.sample(i);
    double brs = 0;
    for (std::size_t j = 0; j < row.size(); ++j) brs += row[j] * p.wiener_increments[j];
    const double d = p.values[N] - brs;
    acc += d * d;
    acc2 += d * d * d * d;
  }
  const double mean = acc / M, se = std::sqrt((acc2 / M - mean * mean) / M);
  EXPECT_NEAR(mean, mu(H, r, s), 5 * se);
}

TEST(IncrementVariance, ConvergesTowardBeta3) {
  const double H = 0.75;
  const double b3 = beta3(H, 2, 1);
  const double e1 = std::abs(scaled_increment_variance(H, 1, 2, 1, 64) - b3);
  const double e2 = std::abs(scaled_increment_variance(H, 1, 2, 1, 256) - b3);
  EXPECT_LT(e2, e1);
  EXPECT_LT(e2, 0.02 * b3);
}

TEST(PathIo, FbmpRoundTripIsBitExact) {
  const auto paths = sample_paths(0.3, 1.0, 50, 4, 8, Method::circulant);
  const PathFile f = to_path_file(paths);
  const std::string bytes = encode_fbmp(f);
  EXPECT_EQ(bytes.size(), 32u + 4 * 51 * 8);
  EXPECT_EQ(bytes.substr(0, 4), "FBMP");
  EXPECT_EQ(decode_fbmp(bytes), f);
  const auto back = from_path_file(decode_fbmp(bytes));
  for (std::size_t i = 0; i < paths.size(); ++i) EXPECT_EQ(back[i].values, paths[i].values);
}

TEST(PathIo, RejectsCorruptContainers) {
  const std::string bytes = encode_fbmp(to_path_file(sample_paths(0.3, 1.0, 8, 2, 8, Method::circulant)));
  EXPECT_THROW(decode_fbmp("FBMX" + bytes.substr(4)), DomainError);
  EXPECT_THROW(decode_fbmp(bytes.substr(0, bytes.size() - 8)), DomainError);
  EXPECT_THROW(decode_fbmp("FBMP"), DomainError);
}

TEST(PathIo, CsvHasHeaderAndOneRowPerGridPoint) {
  const auto paths = sample_paths(0.3, 1.0, 8, 2, 8, Method::circulant);
  const std::string csv = paths_to_csv(paths);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "path,t,value");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 9);
}

TEST(IncrementVariance, MatchesDirectKernelDifferenceQuadrature) {
  // Independent route: Romberg over theta of (K(t2, theta) - K(t1, theta))^2
  // with the oracle kernel; theta = u^4 on [0, r/2] and theta = r - x^2 on [r/2, r]
  // smooth the endpoint behaviour.
  for (double H : {0.4, 0.75}) {
    const double r = 1, s1 = 2, s2 = 1, n = 16;
    const double t1 = r + s2 / n, t2 = r + s1 / n;
    auto sq = [&](double th) {
      const double d = oracle::kernel(H, t2, th) - oracle::kernel(H, t1, th);
      return d * d;
    };
    auto lo = [&](double u) { return u <= 0 ? 0.0 : 4 * u * u * u * sq(u * u * u * u); };
    auto hi = [&](double x) { return 2 * x * sq(r - x * x); };
    const double ref = std::pow(n, 2 * H) * (oracle::romberg(lo, 0.0, std::pow(r / 2, 0.25), 1e-10, 18) +
                                             oracle::romberg(hi, 0.0, std::sqrt(r / 2), 1e-10, 18));
    EXPECT_NEAR(scaled_increment_variance(H, r, s1, s2, n), ref, 2e-5 * ref) << H;
  }
}

TEST(IncrementVariance, BelowHalfTendsToSquaredOffsetTimesBeta3) {
  // For H < 1/2 the kernel increment carries the factor (H - 1/2), so the
  // scaled variance settles at (H - 1/2)^2 beta3 rather than beta3.
  const double H = 0.4;
  const double target = (H - 0.5) * (H - 0.5) * beta3(H, 2, 1);
  const double e1 = std::abs(scaled_increment_variance(H, 1, 2, 1, 64) - target);
  const double e2 = std::abs(scaled_increment_variance(H, 1, 2, 1, 256) - target);
  EXPECT_LT(e2, e1);
  EXPECT_LT(e2, 0.01 * target);
}
