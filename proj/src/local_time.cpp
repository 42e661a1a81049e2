#include "fbmlt/local_time.hpp"

#include "fbmlt/error.hpp"
#include "fbmlt/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace fbmlt {

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

void require_eps(double eps) {
  if (!(eps > 0.0)) throw DomainError("mollifier variance eps must be positive");
}

// Reduce theta to (-pi, pi].
double wrap(double theta) {
  const double two_pi = 2.0 * std::numbers::pi;
  theta = std::fmod(theta, two_pi);
  if (theta > std::numbers::pi) theta -= two_pi;
  if (theta <= -std::numbers::pi) theta += two_pi;
  return theta;
}

// Dirichlet kernel D_K(theta) = sum_{|k|<=K} e^{ik theta} and its derivative.
double dirichlet(long K, double theta) {
  theta = wrap(theta);
  const double s = std::sin(0.5 * theta);
  const double k2 = static_cast<double>(K) + 0.5;
  if (std::abs(s) < 1e-6) {
    const double kk = static_cast<double>(K) * (K + 1);
    return (2.0 * K + 1.0) * (1.0 - kk * theta * theta / 6.0);
  }
  return std::sin(k2 * theta) / s;
}

double dirichlet_prime(long K, double theta) {
  theta = wrap(theta);
  const double s = std::sin(0.5 * theta);
  const double k2 = static_cast<double>(K) + 0.5;
  if (std::abs(s) < 1e-6) {
    const double kk = static_cast<double>(K) * (K + 1);
    return -(2.0 * K + 1.0) * kk * theta / 3.0;
  }
  const double c = std::cos(0.5 * theta);
  return (k2 * std::cos(k2 * theta) * s - 0.5 * std::sin(k2 * theta) * c) / (s * s);
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& g, double dt) {
  std::vector<double> out(g.size(), 0.0);
  double acc = 0.0;
  for (std::size_t k = 1; k < g.size(); ++k) {
    acc += 0.5 * dt * (g[k - 1] + g[k]);
    out[k] = acc;
  }
  return out;
}

}  // namespace

double heat_kernel(double eps, double x) {
  require_eps(eps);
  return kInvSqrt2Pi / std::sqrt(eps) * std::exp(-0.5 * x * x / eps);
}

double heat_kernel_prime(double eps, double x) { return -(x / eps) * heat_kernel(eps, x); }

double default_epsilon(double H, double dt, double c) {
  if (!(dt > 0.0) || !(c > 0.0)) throw DomainError("default_epsilon: need dt > 0 and c > 0");
  return c * std::pow(dt, 2.0 * H);
}

double mollified_integral(std::span<const double> values, double dt, std::size_t steps,
                          double lambda, double eps, LocalTimeKind kind) {
  require_eps(eps);
  if (steps + 1 > values.size()) throw DomainError("mollified_integral: steps beyond path");
  const double norm = kInvSqrt2Pi / std::sqrt(eps);
  const double half_inv = 0.5 / eps;
  double acc = 0.0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double x = values[k] - lambda;
    double v = norm * std::exp(-half_inv * x * x);
    if (kind == LocalTimeKind::derivative) v *= -x / eps;
    acc += (k == 0 || k == steps) ? 0.5 * v : v;
  }
  return steps == 0 ? 0.0 : acc * dt;
}

LocalTimeCurve mollified_local_time(const FbmPath& path, double lambda, double eps,
                                    LocalTimeKind kind) {
  require_eps(eps);
  LocalTimeCurve c;
  c.path_index = path.index;
  c.lambda = lambda;
  c.epsilon = eps;
  c.kind = kind;
  c.estimator = LocalTimeEstimator::mollified;
  std::vector<double> g(path.values.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double x = path.values[k] - lambda;
    g[k] = kind == LocalTimeKind::level ? heat_kernel(eps, x) : heat_kernel_prime(eps, x);
  }
  c.values = cumulative_trapezoid(g, path.dt());
  if (kind == LocalTimeKind::derivative && path.H >= 1.0 / 3.0 - 1e-12)
    c.warning = "derivative of local time is not square integrable for H >= 1/3";
  return c;
}

LocalTimeCurve fourier_local_time(const FbmPath& path, double lambda, double xi_max, double d_xi,
                                  LocalTimeKind kind, const FourierOptions& opt) {
  if (!(xi_max > 0.0) || !(d_xi > 0.0))
    throw DomainError("fourier_local_time: xi_max and d_xi must be positive");
  const double ratio = xi_max / d_xi;
  if (ratio > 1e7) throw CostGuardError("fourier_local_time: xi_max/d_xi exceeds 1e7");
  const long K = static_cast<long>(std::floor(ratio));
  LocalTimeCurve c;
  c.path_index = path.index;
  c.lambda = lambda;
  c.epsilon = xi_max;
  c.d_xi = d_xi;
  c.kind = kind;
  c.estimator = LocalTimeEstimator::fourier;
  const double inv2pi = 0.5 / std::numbers::pi;
  std::vector<double> g(path.values.size());
  double max_imag = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double y = path.values[k] - lambda;
    if (opt.explicit_sum) {
      const std::complex<double> step = std::polar(1.0, d_xi * y);
      std::complex<double> e{1.0, 0.0};
      std::complex<double> sum{};
      if (kind == LocalTimeKind::level) sum = 1.0;
      for (long j = 1; j <= K; ++j) {
        e *= step;
        const double xi = j * d_xi;
        if (kind == LocalTimeKind::level) {
          sum += e + std::conj(e);
        } else {
          // i xi e^{i xi y} + i (-xi) e^{-i xi y}
          sum += std::complex<double>(0.0, xi) * (e - std::conj(e));
        }
      }
      g[k] = inv2pi * d_xi * sum.real();
      max_imag = std::max(max_imag, std::abs(inv2pi * d_xi * sum.imag()));
    } else if (kind == LocalTimeKind::level) {
      g[k] = inv2pi * d_xi * dirichlet(K, d_xi * y);
    } else {
      g[k] = inv2pi * d_xi * d_xi * dirichlet_prime(K, d_xi * y);
    }
  }
  c.values = cumulative_trapezoid(g, path.dt());
  c.imag_residue = max_imag;
  if (kind == LocalTimeKind::derivative && path.H >= 1.0 / 3.0 - 1e-12)
    c.warning = "derivative of local time is not square integrable for H >= 1/3";
  return c;
}

double occupation_integral(const FbmPath& path, const TestFunction& f) {
  if (path.N == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k <= path.N; ++k) {
    const double v = f(path.values[k]);
    acc += (k == 0 || k == path.N) ? 0.5 * v : v;
  }
  return acc * path.dt();
}

OccupationCheck occupation_density_check(const FbmPath& path, const TestFunction& f,
                                         double eps) {
  require_eps(eps);
  OccupationCheck out;
  out.lhs = occupation_integral(path, f);
  const auto [mn, mx] = std::minmax_element(path.values.begin(), path.values.end());
  const double lo = *mn - 4.0 * std::sqrt(eps);
  const double hi = *mx + 4.0 * std::sqrt(eps);
  constexpr int kPoints = 512;
  const double dx = (hi - lo) / (kPoints - 1);
  double acc = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const double x = lo + i * dx;
    const double fx = f(x);
    if (fx == 0.0) continue;
    const double L = mollified_integral(path.values, path.dt(), path.N, x, eps, LocalTimeKind::level);
    acc += (i == 0 || i == kPoints - 1 ? 0.5 : 1.0) * fx * L;
  }
  out.rhs = acc * dx;
  return out;
}

double expected_local_time(double H, double t, double lambda) {
  if (!(H > 0.0 && H < 1.0)) throw DomainError("expected_local_time: H must lie in (0,1)");
  if (t < 0.0) throw DomainError("expected_local_time: t must be nonnegative");
  if (t == 0.0) return 0.0;
  const double q = 1.0 - H;
  if (lambda == 0.0) return kInvSqrt2Pi * std::pow(t, q) / q;
  // u = s^{1-H} absorbs the s^{-H} singularity: p ds = exp(-lambda^2 / (2 s^{2H})) du / ((1-H) sqrt(2 pi)).
  const double l2 = lambda * lambda;
  auto g = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double s2h = std::pow(u, 2.0 * H / q);
    return std::exp(-0.5 * l2 / s2h);
  };
  const double umax = std::pow(t, q);
  // the integrand switches on around s^{2H} ~ lambda^2
  const double uswitch = std::pow(std::abs(lambda), q / H);
  std::vector<double> br{0.0, umax};
  for (double f : {0.25, 0.5, 1.0, 2.0, 4.0})
    if (f * uswitch < umax) br.push_back(f * uswitch);
  std::sort(br.begin(), br.end());
  return kInvSqrt2Pi / q * quad::gauss_kronrod_panels(g, br, 1e-12).value;
}

double expected_mollified_local_time(double H, double t, double lambda, double eps) {
  require_eps(eps);
  if (!(H > 0.0 && H < 1.0)) throw DomainError("expected_mollified_local_time: H must lie in (0,1)");
  if (t < 0.0) throw DomainError("expected_mollified_local_time: t must be nonnegative");
  if (t == 0.0) return 0.0;
  const double q = 1.0 - H;
  const double l2 = lambda * lambda;
  auto g = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double sh = std::pow(u, H / q);  // s^H
    const double v = eps + sh * sh;
    return sh / std::sqrt(v) * std::exp(-0.5 * l2 / v);
  };
  const double umax = std::pow(t, q);
  const double ueps = std::pow(eps, q / (2.0 * H));  // s^{2H} == eps
  std::vector<double> br{0.0, umax};
  for (double f : {0.1, 0.3, 1.0, 3.0, 10.0, 30.0})
    if (f * ueps < umax) br.push_back(f * ueps);
  if (lambda != 0.0) {
    const double usw = std::pow(std::abs(lambda), q / H);
    for (double f : {0.5, 1.0, 2.0})
      if (f * usw < umax) br.push_back(f * usw);
  }
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  return kInvSqrt2Pi / q * quad::gauss_kronrod_panels(g, br, 1e-12).value;
}

}  // namespace fbmlt
