#pragma once

#include "fbmlt/fbm_engine.hpp"
#include "fbmlt/hurst_constants.hpp"
#include "fbmlt/test_functions.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fbmlt {

/// Experiment description; the JSON form uses exactly these field names.
struct ExperimentConfig {
  std::string experiment = "clt";       // "clt" or "derivative"
  double H = 0.6;
  double lambda = 0.0;
  std::vector<std::string> f{"gaussian_derivative:sigma=1"};
  std::vector<double> t_list{1.0};
  std::vector<double> n_ladder{64, 256, 1024};
  std::size_t path_count = 1000;
  std::size_t grid_size = 1 << 14;      // steps on [0, max(t_list)]
  std::uint64_t seed = 0;
  double eps_scale = 1.0;               // eps = eps_scale * dt^{2H}
  std::string method = "circulant";
  std::string beta3_half_mode = "zero";
  unsigned threads = 0;                 // 0 = hardware concurrency; never affects results
  double cost_budget = 2e11;            // bound on path_count * grid_size * log2(grid_size)

  /// Omits `threads`: it is an execution setting, not part of the result identity.
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  /// Throws DomainError for invalid fields and CostGuardError for budget violations.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Per-path output. `values` is laid out [f][n][t] for clt and [n][t] for derivative.
struct PathRecord {
  std::uint64_t index = 0;
  std::vector<double> L;       // mollified L_t(lambda) for each t
  std::vector<double> Lprime;  // mollified int p'_eps(B_s - lambda) ds (derivative only)
  std::vector<double> values;  // Z (clt) or e_n (derivative)
  bool operator==(const PathRecord&) const = default;
};

struct ExperimentReport {
  nlohmann::json config;
  std::vector<PathRecord> per_path;
  nlohmann::json aggregates = nlohmann::json::object();
  nlohmann::json audit = nlohmann::json::object();
  bool operator==(const ExperimentReport&) const = default;
};

/// int_0^t f(n^H (B_s - lambda)) ds, trapezoid on the path grid.
double scaled_additive_functional(const FbmPath& path, const TestFunction& f, double lambda,
                                  double n, double t);
/// Same on raw grid values over the first `steps` intervals.
double scaled_additive_functional(std::span<const double> values, double dt, std::size_t steps,
                                  double H, const TestFunction& f, double lambda, double n);

/// Undersampling canary: n^H times the rms grid increment exceeds f's scale.
bool undersampled(const FbmPath& path, const TestFunction& f, double n);

/// n^{(H+1)/2} ell(n,H) (functional - n^{-H} L m0) with the mollified L at eps.
double compensated_functional_Z(const FbmPath& path, const TestFunction& f, double lambda,
                                double n, double t, double eps);

ExperimentReport clt_experiment(const ExperimentConfig& cfg);
ExperimentReport derivative_experiment(const ExperimentConfig& cfg);
/// Dispatches on cfg.experiment.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

std::string serialize_report(const ExperimentReport& r, const std::string& format);
ExperimentReport deserialize_report(const std::string& json_text);

// Statistics helpers.
double mean_of(std::span<const double> xs);
/// Least-squares slope through the origin of y on x: sum x y / sum x^2.
double slope_through_origin(std::span<const double> x, std::span<const double> y);
/// Ordinary least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);
/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b);
/// Asymptotic two-sample KS critical value at level alpha.
double ks_critical(double alpha, std::size_t n, std::size_t m);

}  // namespace fbmlt
