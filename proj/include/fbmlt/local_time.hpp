#pragma once

#include "fbmlt/fbm_engine.hpp"
#include "fbmlt/test_functions.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fbmlt {

enum class LocalTimeKind { level, derivative };
enum class LocalTimeEstimator { mollified, fourier };

/// t -> L_t(lambda) (or its lambda-derivative) on the path grid.
struct LocalTimeCurve {
  std::uint64_t path_index = 0;
  double lambda = 0.0;
  double epsilon = 0.0;  // mollifier variance, or the cutoff Xi for the Fourier estimator
  double d_xi = 0.0;     // Fourier grid step (0 for mollified)
  LocalTimeKind kind = LocalTimeKind::level;
  LocalTimeEstimator estimator = LocalTimeEstimator::mollified;
  std::vector<double> values;
  double imag_residue = 0.0;  // max |Im| before discarding (explicit Fourier sums only)
  std::string warning;        // empty when there is nothing to report
};

/// p_eps(x) = (2 pi eps)^{-1/2} exp(-x^2 / (2 eps)).
double heat_kernel(double eps, double x);
/// d/dx p_eps(x) = -(x / eps) p_eps(x).
double heat_kernel_prime(double eps, double x);

/// Default mollifier variance c * dt^{2H}.
double default_epsilon(double H, double dt, double c = 1.0);

/// Trapezoidal int_0^{t_k} p_eps(B_s - lambda) ds (or p'_eps for `derivative`).
LocalTimeCurve mollified_local_time(const FbmPath& path, double lambda, double eps,
                                    LocalTimeKind kind = LocalTimeKind::level);

/// Same integral over the first `steps` grid intervals of raw values; no allocation.
double mollified_integral(std::span<const double> values, double dt, std::size_t steps,
                          double lambda, double eps, LocalTimeKind kind);

struct FourierOptions {
  /// Sum e^{i xi (B_s - lambda)} term by term instead of the closed-form
  /// Dirichlet kernel; slower, but measures the discarded imaginary part.
  bool explicit_sum = false;
};

/// (1/2pi) sum over xi = k d_xi, |k| <= xi_max/d_xi, of int_0^t e^{i xi (B_s - lambda)} ds d_xi
/// (real part); the derivative kind carries the weight i xi so that it matches
/// the mollified derivative int p'_eps.
LocalTimeCurve fourier_local_time(const FbmPath& path, double lambda, double xi_max, double d_xi,
                                  LocalTimeKind kind = LocalTimeKind::level,
                                  const FourierOptions& opt = {});

/// int_0^T f(B_s) ds by the trapezoid rule.
double occupation_integral(const FbmPath& path, const TestFunction& f);

struct OccupationCheck {
  double lhs = 0.0;  // int_0^T f(B_s) ds
  double rhs = 0.0;  // int f(x) L_T(x) dx with the mollified estimator on an x-grid
};

/// x-grid: 512 points over the path range widened by 4 sqrt(eps).
OccupationCheck occupation_density_check(const FbmPath& path, const TestFunction& f, double eps);

/// E L_t(lambda) = int_0^t p_{s^{2H}}(lambda) ds.
double expected_local_time(double H, double t, double lambda);
/// E L_{t,eps}(lambda) = int_0^t p_{eps + s^{2H}}(lambda) ds, the mean of the
/// mollified estimator in continuous time.
double expected_mollified_local_time(double H, double t, double lambda, double eps);

}  // namespace fbmlt
