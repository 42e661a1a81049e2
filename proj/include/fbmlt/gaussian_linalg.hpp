#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fbmlt {

struct GaussianVectorSpec {
  Eigen::MatrixXd covariance;
  std::vector<std::string> labels;
};

enum class ConditioningStatus { ok, singular_block };

struct ConditionalVariance {
  double value = 0.0;
  ConditioningStatus status = ConditioningStatus::ok;
};

/// Var[X_target | X_given] as a Schur complement. A near-singular `given` block
/// is handled by an eigenvalue-truncated pseudo-inverse (threshold 1e-12 of
/// the largest eigenvalue) and reported through `status`.
ConditionalVariance conditional_variance(const Eigen::MatrixXd& cov, std::size_t target,
                                         std::span<const std::size_t> given);
ConditionalVariance conditional_variance(const GaussianVectorSpec& spec, std::size_t target,
                                         std::span<const std::size_t> given);

struct FlipCheck {
  double lhs = 0.0;  // Var[B | N, A]
  double rhs = 0.0;  // Var[A | N, B] Var[B | N] / Var[A | N]
};

/// Both sides of the variance flip identity, each from its own Schur complements.
FlipCheck flip_variance_check(const Eigen::MatrixXd& cov, std::size_t A, std::size_t B,
                              std::span<const std::size_t> N);

/// Covariance matrix of (B_{t_1}, ..., B_{t_m}).
Eigen::MatrixXd fbm_covariance_matrix(double H, std::span<const double> times);

/// Var[B_t | B_{t_1..t_m}] / (min_j |t - t_j|)^{2H}. Grid points at 0 carry no
/// information (B_0 = 0) and are dropped.
double lnd_ratio(double H, double t, std::span<const double> grid);

/// Symmetric PSD square root through the spectral decomposition; eigenvalues in
/// [-1e-10 trace, 0) are clamped to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& M);

/// Determinant-type quantity for two increments Da = B_{a+h} - B_a and
/// Db = B_{b+h} - B_b of the same length h:
///   Var[B_a | Da, Db] Var[B_b | B_a, Da, Db] = det Cov(B_a, B_b, Da, Db) / det Cov(Da, Db),
/// together with the case-wise lower-bound shape it is compared against.
struct IncrementDeterminant {
  double conditional_product = 0.0;
  double increment_det = 0.0;  // det Cov(Da, Db) itself, for reference
  double bound_shape = 0.0;
  int case_branch = 0;         // 1: 0<h<b-a, 2: h>b-a, 3: h<0,|h|<b-a, 4: h<0,|h|>b-a
};

IncrementDeterminant increment_determinant(double H, double a, double b, double h);

}  // namespace fbmlt
