#pragma once

#include <cstdint>

namespace fbmlt {

enum class Regime { subcritical, critical, supercritical };

/// Hurst index together with the deterministic constants every other module
/// needs. Built only through `make_hurst_config`, which enforces 0 < H < 1.
struct HurstConfig {
  double H = 0.5;
  Regime regime = Regime::supercritical;
  double c_h = 1.0;
  double beta1 = 1.0;
  double beta2 = 1.0;
};

HurstConfig make_hurst_config(double H);

/// True when H is 1/3 up to rounding of the literal 1.0/3.0.
bool is_critical(double H) noexcept;
Regime regime_of(double H);

/// Volterra kernel normalization C_H; C_{1/2} = 1.
double c_h(double H);

/// beta_{H,1} = C_H / (H - 1/2) for H > 1/2, C_H otherwise.
double beta1(double H);

/// beta_{H,2} = beta_{H,1}^2 / (2H).
double beta2(double H);

/// How beta_{H,3} is evaluated at H = 1/2, where the defining formula is 0 * inf.
enum class Beta3HalfMode {
  zero,           ///< kernel is identically 1, so the variance it models vanishes
  formula_limit,  ///< H -> 1/2 limit: C^2 * int_0^inf log^2((t+s1)/(t+s2)) dt
  literal,        ///< refuse with DomainError at exactly H = 1/2
};

struct Beta3Options {
  Beta3HalfMode half_mode = Beta3HalfMode::zero;
  double rel_tol = 1e-8;
};

struct Beta3Result {
  double value = 0.0;
  double error = 0.0;  // absolute error estimate (quadrature + truncated tail)
};

/// beta_{H,3}(s1, s2) = C_H^2 |H-1/2|^{-2} int_0^inf ((t+s1)^{H-1/2} - (t+s2)^{H-1/2})^2 dt.
Beta3Result beta3_with_error(double H, double s1, double s2, const Beta3Options& opt = {});
double beta3(double H, double s1, double s2, const Beta3Options& opt = {});

/// Normalizing sequence: 1 for H > 1/3 and (log n)^{-1/2} at H = 1/3. Defined on [1/3, 1).
double ell(std::uint64_t n, double H);

}  // namespace fbmlt
