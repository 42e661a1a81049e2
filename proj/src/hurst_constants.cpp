#include "fbmlt/hurst_constants.hpp"

#include "fbmlt/error.hpp"
#include "fbmlt/quadrature.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace fbmlt {

namespace {

constexpr double kThird = 1.0 / 3.0;

void require_hurst(double H) {
  if (!(H > 0.0 && H < 1.0))
    throw DomainError("Hurst index must lie in (0,1), got " + std::to_string(H));
}

}  // namespace

bool is_critical(double H) noexcept { return std::abs(H - kThird) < 1e-12; }

Regime regime_of(double H) {
  require_hurst(H);
  if (is_critical(H)) return Regime::critical;
  return H < kThird ? Regime::subcritical : Regime::supercritical;
}

double c_h(double H) {
  require_hurst(H);
  using boost::math::tgamma;
  if (H == 0.5) return 1.0;
  if (H > 0.5) {
    const double sq = H * (2.0 * H - 1.0) * tgamma(1.5 - H) /
                      (tgamma(2.0 - 2.0 * H) * tgamma(H - 0.5));
    return std::sqrt(sq);
  }
  const double sq = 2.0 * H * tgamma(1.5 - H) /
                    ((1.0 - 2.0 * H) * tgamma(1.0 - 2.0 * H) * tgamma(H + 0.5));
  return std::sqrt(sq);
}

double beta1(double H) {
  const double c = c_h(H);
  return H > 0.5 ? c / (H - 0.5) : c;
}

double beta2(double H) {
  const double b1 = beta1(H);
  return b1 * b1 / (2.0 * H);
}

HurstConfig make_hurst_config(double H) {
  HurstConfig cfg;
  cfg.H = H;
  cfg.regime = regime_of(H);
  cfg.c_h = c_h(H);
  cfg.beta1 = beta1(H);
  cfg.beta2 = cfg.beta1 * cfg.beta1 / (2.0 * H);
  return cfg;
}

Beta3Result beta3_with_error(double H, double s1, double s2, const Beta3Options& opt) {
  require_hurst(H);
  if (s1 < 0.0 || s2 < 0.0) throw DomainError("beta3 requires s1, s2 >= 0");
  if (s1 == s2) return {};

  const double lo = std::min(s1, s2);
  const double hi = std::max(s1, s2);
  const double a = H - 0.5;

  double prefactor = 0.0;
  if (H == 0.5) {
    switch (opt.half_mode) {
      case Beta3HalfMode::zero:
        return {};
      case Beta3HalfMode::literal:
        throw DomainError("beta3: literal formula is 0*inf at H = 1/2 (singular mode)");
      case Beta3HalfMode::formula_limit:
        prefactor = 1.0;
        break;
    }
  } else {
    const double c = c_h(H);
    prefactor = c * c;
  }

  // ((t+lo)^a - (t+hi)^a) / a, written to survive both a -> 0 and t >> hi.
  auto scaled_diff = [a](double t, double lo_, double hi_) {
    const double rel = (lo_ - hi_) / (t + hi_);
    const double ratio_log =
        rel > -0.5 ? std::log1p(rel) : std::log(t + lo_) - std::log(t + hi_);
    if (a == 0.0) return ratio_log;
    return std::pow(t + hi_, a) * std::expm1(a * ratio_log) / a;
  };
  auto integrand = [&](double t) {
    const double d = scaled_diff(t, lo, hi);
    return d * d;
  };

  const double tol = opt.rel_tol;
  quad::QuadResult body;

  // First panel [0, hi].
  if (lo == 0.0 && H < 0.5) {
    // t^{2H-1} at the origin, removed by t = u^{1/(2H)}.
    const double p = 1.0 / (2.0 * H);
    auto g = [&](double u) {
      const double t = std::pow(u, p);
      if (!(t > 0.0)) return p / (a * a);  // limit of the transformed integrand
      return integrand(t) * p * t / u;
    };
    body = quad::gauss_kronrod(g, 0.0, std::pow(hi, 2.0 * H), tol * 1e-2);
  } else if (lo == 0.0) {
    // t^{H-1/2} has an infinite slope at the origin.
    body = quad::tanh_sinh(integrand, 0.0, hi, tol * 1e-2);
  } else {
    body = quad::gauss_kronrod(integrand, 0.0, hi, tol * 1e-2);
  }

  // Geometric panels up to Theta, then the asymptotic tail in closed form:
  // with x = t + hi, d = lo - hi,
  //   (diff/a)^2 = d^2 x^{2a-2} + (a-1) d^3 x^{2a-3} + O(d^4 x^{2a-4}).
  const double theta = hi * 1e6;
  const auto mid = quad::gauss_kronrod_geometric(integrand, hi, theta, 4.0, tol * 1e-2);
  body.value += mid.value;
  body.error += mid.error;

  const double d = lo - hi;
  const double x = theta + hi;
  double tail;
  double tail_err;
  if (a == 0.0) {
    tail = d * d / x + (-1.0) * d * d * d / (2.0 * x * x);
    tail_err = std::abs(d * d * d * d) / (x * x * x);
  } else {
    tail = d * d * std::pow(x, 2.0 * a - 1.0) / (1.0 - 2.0 * a) +
           (a - 1.0) * d * d * d * std::pow(x, 2.0 * a - 2.0) / (2.0 - 2.0 * a);
    tail_err = 4.0 * d * d * d * d * std::pow(x, 2.0 * a - 3.0);
  }

  Beta3Result r;
  r.value = prefactor * (body.value + tail);
  r.error = prefactor * (body.error + tail_err);
  return r;
}

double beta3(double H, double s1, double s2, const Beta3Options& opt) {
  return beta3_with_error(H, s1, s2, opt).value;
}

double ell(std::uint64_t n, double H) {
  if (!(H > 0.0 && H < 1.0)) throw DomainError("ell: H must lie in [1/3,1)");
  if (H < kThird && !is_critical(H)) throw DomainError("ell is defined only for H in [1/3,1)");
  if (n < 2) throw DomainError("ell requires n >= 2");
  if (is_critical(H)) return 1.0 / std::sqrt(std::log(static_cast<double>(n)));
  return 1.0;
}

}  // namespace fbmlt
