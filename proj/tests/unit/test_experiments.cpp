#include "fbmlt/error.hpp"
#include "fbmlt/experiments.hpp"
#include "fbmlt/fbm_engine.hpp"
#include "fbmlt/hurst_constants.hpp"
#include "fbmlt/local_time.hpp"
#include "fbmlt/path_io.hpp"
#include "fbmlt/test_functions.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

using namespace fbmlt;
using nlohmann::json;

namespace {

ExperimentConfig small_clt() {
  ExperimentConfig c;
  c.experiment = "clt";
  c.H = 0.6;
  c.f = {"gaussian_derivative:sigma=1", "gaussian_bump:sigma=1,center=0"};
  c.t_list = {0.5, 1.0};
  c.n_ladder = {8, 32};
  c.path_count = 6;
  c.grid_size = 512;
  c.seed = 3;
  return c;
}

ExperimentConfig small_derivative() {
  ExperimentConfig c;
  c.experiment = "derivative";
  c.H = 0.25;
  c.f = {"gaussian_bump:sigma=1,center=0.5"};
  c.t_list = {1.0};
  c.n_ladder = {4, 16};
  c.path_count = 5;
  c.grid_size = 1024;
  c.seed = 4;
  return c;
}

double mean(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v;
  return s / x.size();
}

double stderr_of(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / (x.size() - 1) / x.size());
}

}  // namespace

TEST(ScaledFunctional, ZeroAndConstant) {
  const auto p = PathSampler(0.5, 1.0, 256, 1, Method::circulant).sample(0);
  EXPECT_EQ(scaled_additive_functional(p, zero_function(), 0.0, 64, 1.0), 0.0);
  EXPECT_NEAR(scaled_additive_functional(p, indicator(-1e9, 1e9), 0.0, 64, 1.0), 1.0, 1e-12);
  EXPECT_NEAR(scaled_additive_functional(p, indicator(-1e9, 1e9), 0.0, 64, 0.5), 0.5, 1e-12);
  EXPECT_THROW(scaled_additive_functional(p, zero_function(), 0.0, 0.5, 1.0), DomainError);
  EXPECT_THROW(scaled_additive_functional(p, zero_function(), 0.0, 4, 2.0), DomainError);
}

TEST(ScaledFunctional, RawValuesOverloadAgrees) {
  const auto p = PathSampler(0.4, 1.0, 256, 1, Method::circulant).sample(2);
  const auto f = hat(-1, 1);
  EXPECT_EQ(scaled_additive_functional(p, f, 0.1, 16, 0.5),
            scaled_additive_functional(p.values, p.dt(), 128, 0.4, f, 0.1, 16));
}

TEST(ScaledFunctional, FirstOrderMeanBrownian) {
  const double H = 0.5, n = 256;
  const auto f = gaussian_bump(1.0);
  const PathSampler s(H, 1.0, 4096, 5, Method::circulant);
  std::vector<double> x(2000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::pow(n, H) * scaled_additive_functional(s.sample(i), f, 0.0, n, 1.0);
  EXPECT_NEAR(mean(x), expected_local_time(H, 1.0, 0.0) * moments(f).m0, 3 * stderr_of(x));
}

TEST(ScaledFunctional, UndersamplingCanary) {
  const auto p = PathSampler(0.5, 1.0, 64, 1, Method::circulant).sample(0);
  EXPECT_FALSE(undersampled(p, gaussian_bump(1.0), 4));
  EXPECT_TRUE(undersampled(p, gaussian_bump(1.0), 1e4));
}

TEST(CompensatedZ, ZeroMassAndZeroTime) {
  const double H = 0.6, n = 32;
  const auto p = PathSampler(H, 1.0, 1024, 2, Method::circulant).sample(0);
  const auto f = gaussian_derivative(1.0);
  const double eps = default_epsilon(H, p.dt());
  const double expect = std::pow(n, (H + 1) / 2) * ell(n, H) * scaled_additive_functional(p, f, 0.0, n, 1.0);
  EXPECT_NEAR(compensated_functional_Z(p, f, 0.0, n, 1.0, eps), expect, 1e-14 * (1 + std::abs(expect)));
  EXPECT_EQ(compensated_functional_Z(p, gaussian_bump(1.0), 0.0, n, 0.0, eps), 0.0);
  EXPECT_THROW(compensated_functional_Z(p, f, 0.0, n, 1.0, -1.0), DomainError);
}

TEST(CompensatedZ, MeanIsZeroWithinThreeSe) {
  const double H = 0.6, n = 128;
  const PathSampler s(H, 1.0, 4096, 7, Method::circulant);
  const auto f = gaussian_derivative(1.0);
  std::vector<double> z(2000);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto p = s.sample(i);
    z[i] = compensated_functional_Z(p, f, 0.0, n, 1.0, default_epsilon(H, p.dt()));
  }
  EXPECT_NEAR(mean(z), 0.0, 3 * stderr_of(z));
}

TEST(FirstOrderProperty, L2ErrorDecreasesAsNDoubles) {
  const auto f = gaussian_bump(1.0);
  const double m0 = moments(f).m0;
  for (double H : {0.3, 0.5, 0.7}) {
    const PathSampler s(H, 1.0, 4096, 8, Method::circulant);
    std::vector<double> err;
    const std::vector<double> ns{8, 16, 32, 64};
    std::vector<double> acc(ns.size(), 0.0);
    const std::size_t M = 400;
    for (std::size_t i = 0; i < M; ++i) {
      const auto p = s.sample(i);
      const double L = mollified_local_time(p, 0.0, default_epsilon(H, p.dt())).values.back();
      for (std::size_t k = 0; k < ns.size(); ++k) {
        const double e = std::pow(ns[k], H) * scaled_additive_functional(p, f, 0.0, ns[k], 1.0) - L * m0;
        acc[k] += e * e / M;
      }
    }
    for (std::size_t k = 1; k < ns.size(); ++k) EXPECT_LT(acc[k], acc[k - 1]) << H << ' ' << ns[k];
  }
}

TEST(ScalingIdentityProperty, KsAgreesAtNSixteen) {
  // int_0^1 f(n^H B_s) ds has the law of n^{-1} int_0^n f(B_s) ds.
  const double H = 0.6, n = 16;
  const auto f = gaussian_bump(1.0);
  const std::size_t M = 2000, N = 256;
  const PathSampler short_paths(H, 1.0, N, 31, Method::circulant);
  const PathSampler long_paths(H, n, N * 16, 32, Method::circulant);
  std::vector<double> a(M), b(M);
  for (std::size_t i = 0; i < M; ++i) {
    a[i] = scaled_additive_functional(short_paths.sample(i), f, 0.0, n, 1.0);
    b[i] = scaled_additive_functional(long_paths.sample(i), f, 0.0, 1.0, n) / n;
  }
  EXPECT_LT(ks_statistic(a, b), ks_critical(0.05, M, M));
}

TEST(Statistics, Helpers) {
  const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8}, y2{3, 5, 7, 9};
  EXPECT_DOUBLE_EQ(mean_of(x), 2.5);
  EXPECT_DOUBLE_EQ(slope_through_origin(x, y), 2.0);
  EXPECT_DOUBLE_EQ(ols_slope(x, y2), 2.0);
  EXPECT_EQ(ks_statistic({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_EQ(ks_statistic({1, 2, 3}, {4, 5, 6}), 1.0);
  EXPECT_NEAR(ks_critical(0.05, 100, 100), 1.3581 * std::sqrt(2.0 / 100), 1e-4);
  EXPECT_THROW(ks_statistic({}, {1.0}), DomainError);
}

TEST(Config, JsonRoundTripAndThreadsOmitted) {
  auto c = small_clt();
  c.threads = 3;
  const json j = c.to_json();
  EXPECT_FALSE(j.contains("threads"));
  auto back = ExperimentConfig::from_json(j);
  back.threads = 3;
  EXPECT_EQ(back, c);
}

TEST(Config, FromJsonErrors) {
  EXPECT_THROW(ExperimentConfig::from_json(json::array()), DomainError);
  EXPECT_THROW(ExperimentConfig::from_json(json{{"bogus", 1}}), DomainError);
  EXPECT_THROW(ExperimentConfig::from_json(json{{"H", "high"}}), DomainError);
  const auto c = ExperimentConfig::from_json(json{{"f", "hat:a=-1,b=1"}});
  ASSERT_EQ(c.f.size(), 1u);
}

TEST(Config, Validation) {
  auto bad = [](auto mutate) {
    auto c = small_clt();
    mutate(c);
    return c;
  };
  EXPECT_NO_THROW(small_clt().validate());
  EXPECT_NO_THROW(small_derivative().validate());
  EXPECT_THROW(bad([](auto& c) { c.H = 0.3; }).validate(), DomainError);
  EXPECT_THROW(bad([](auto& c) { c.experiment = "other"; }).validate(), DomainError);
  EXPECT_THROW(bad([](auto& c) { c.n_ladder = {32, 8}; }).validate(), DomainError);
  EXPECT_THROW(bad([](auto& c) { c.n_ladder = {8, 8}; }).validate(), DomainError);
  EXPECT_THROW(bad([](auto& c) { c.path_count = 0; }).validate(), DomainError);
  EXPECT_THROW(bad([](auto& c) { c.t_list = {0.3, 1.0}; }).validate(), DomainError);
  EXPECT_THROW(bad([](auto& c) { c.t_list = {-1.0}; }).validate(), DomainError);
  EXPECT_THROW(bad([](auto& c) { c.f = {}; }).validate(), DomainError);
  EXPECT_THROW(bad([](auto& c) { c.f = {"nonsense"}; }).validate(), DomainError);
  EXPECT_THROW(bad([](auto& c) { c.eps_scale = 0; }).validate(), DomainError);
  EXPECT_THROW(bad([](auto& c) { c.method = "cholesky", c.grid_size = 8192; }).validate(), DomainError);
  EXPECT_THROW(bad([](auto& c) { c.path_count = 1000000, c.cost_budget = 1e6; }).validate(), CostGuardError);
  auto d = small_derivative();
  d.H = 0.4;
  EXPECT_THROW(d.validate(), DomainError);
  d = small_derivative();
  d.f.push_back("hat:a=-1,b=1");
  EXPECT_THROW(d.validate(), DomainError);
}

TEST(CltExperiment, EmptyPathCountRefused) {
  auto c = small_clt();
  c.path_count = 0;
  EXPECT_THROW(clt_experiment(c), DomainError);
}

TEST(CltExperiment, ShapesAndAggregates) {
  const auto c = small_clt();
  const auto r = run_experiment(c);
  ASSERT_EQ(r.per_path.size(), c.path_count);
  for (const auto& rec : r.per_path) {
    EXPECT_EQ(rec.L.size(), c.t_list.size());
    EXPECT_EQ(rec.values.size(), c.f.size() * c.n_ladder.size() * c.t_list.size());
    EXPECT_TRUE(rec.Lprime.empty());
    EXPECT_LE(rec.L[0], rec.L[1]);
  }
  EXPECT_EQ(r.aggregates.at("series").size(), c.f.size() * c.n_ladder.size() * c.t_list.size());
  EXPECT_TRUE(r.aggregates.contains("cross_time"));
  EXPECT_TRUE(r.aggregates.contains("cross_f"));
  EXPECT_TRUE(r.aggregates.contains("limit_matrix"));
  EXPECT_EQ(r.audit.at("paths"), c.path_count);
  EXPECT_EQ(r.config, c.to_json());
}

TEST(CltExperiment, DeterministicAcrossThreadCounts) {
  auto c = small_clt();
  c.threads = 1;
  const std::string a = serialize_report(clt_experiment(c), "json");
  c.threads = 4;
  const std::string b = serialize_report(clt_experiment(c), "json");
  EXPECT_EQ(a, b);
  c.seed = 4;
  EXPECT_NE(a, serialize_report(clt_experiment(c), "json"));
}

TEST(DerivativeExperiment, ShapesAndFits) {
  const auto c = small_derivative();
  const auto r = run_experiment(c);
  ASSERT_EQ(r.per_path.size(), c.path_count);
  for (const auto& rec : r.per_path) {
    EXPECT_EQ(rec.values.size(), c.n_ladder.size() * c.t_list.size());
    EXPECT_EQ(rec.Lprime.size(), c.t_list.size());
  }
  EXPECT_EQ(r.aggregates.at("fits").size(), 1u);
  EXPECT_DOUBLE_EQ(r.aggregates.at("m1").get<double>(), 0.5);
  EXPECT_THROW(clt_experiment(c), DomainError);
}

TEST(DerivativeExperiment, ErrorFormulaFromRecordedPieces) {
  // e_n = n^H (n^H F - L m0) + L' m1, recomputed from the path and the recorded L, L'.
  const auto c = small_derivative();
  const auto r = derivative_experiment(c);
  const PathSampler s(c.H, 1.0, c.grid_size, c.seed, Method::circulant);
  const auto f = parse_test_function(c.f[0]);
  const auto m = moments(f);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto p = s.sample(i);
    for (std::size_t k = 0; k < c.n_ladder.size(); ++k) {
      const double n = c.n_ladder[k], nH = std::pow(n, c.H);
      const double F = scaled_additive_functional(p, f, c.lambda, n, 1.0);
      const auto& rec = r.per_path[i];
      const double e = nH * (nH * F - rec.L[0] * m.m0) + rec.Lprime[0] * m.m1;
      EXPECT_NEAR(rec.values[k], e, 1e-10 * (1 + std::abs(e)));
    }
  }
}

TEST(Serialize, RoundTripJson) {
  const auto r = clt_experiment(small_clt());
  EXPECT_EQ(deserialize_report(serialize_report(r, "json")), r);
  const auto d = derivative_experiment(small_derivative());
  EXPECT_EQ(deserialize_report(serialize_report(d, "json")), d);
}

TEST(Serialize, EmptyAggregateOnlyReport) {
  ExperimentReport r;
  r.config = small_clt().to_json();
  r.aggregates = json{{"note", "none"}};
  const std::string text = serialize_report(r, "json");
  const json j = json::parse(text);
  EXPECT_TRUE(j.at("per_path").is_array());
  EXPECT_TRUE(j.at("per_path").empty());
  EXPECT_EQ(deserialize_report(text), r);
}

TEST(Serialize, CsvRowsPerPathFunctionScaleTime) {
  const auto c = small_clt();
  const std::string csv = serialize_report(clt_experiment(c), "csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "path,f,n,t,L,value");
  const auto rows = std::count(csv.begin(), csv.end(), '\n') - 1;
  EXPECT_EQ(static_cast<std::size_t>(rows), c.path_count * c.f.size() * c.n_ladder.size() * c.t_list.size());
  EXPECT_THROW(serialize_report(ExperimentReport{}, "xml"), DomainError);
}

TEST(Serialize, RejectsMalformedText) {
  EXPECT_THROW(deserialize_report("{"), DomainError);
  EXPECT_THROW(deserialize_report("{\"config\": {}}"), DomainError);
}

TEST(Golden, TwoPathSeedZeroReport) {
  const std::filesystem::path dir = FBMLT_GOLDEN_DIR;
  const auto cfg = ExperimentConfig::from_json(json::parse(read_text_file((dir / "clt_config.json").string())));
  EXPECT_EQ(serialize_report(run_experiment(cfg), "json"), read_text_file((dir / "clt_report.json").string()));
}
