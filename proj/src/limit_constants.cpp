#include "fbmlt/limit_constants.hpp"

#include "fbmlt/error.hpp"
#include "fbmlt/gaussian_linalg.hpp"
#include "fbmlt/quadrature.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace fbmlt {

namespace {

constexpr double kThird = 1.0 / 3.0;

void require_xi1(const TestFunction& f) {
  if (!f.xi().w1) throw DomainError(f.label() + " is not in Xi_1");
}

// Frequency of oscillation of fhat in eta, i.e. how far from 0 the mass sits.
double reach(const TestFunction& f) {
  const Interval iv = f.effective_interval();
  const double mid = 0.5 * (iv.lo + iv.hi);
  if (f.support()) return std::max(std::abs(iv.lo), std::abs(iv.hi));
  return std::abs(mid) + 3.0 * f.scale();
}

double sigma_u(const HurstConfig& cfg, double u, const Beta3Options& b3) {
  const double h2 = 2.0 * cfg.H;
  return cfg.beta2 * (std::pow(u, h2) + std::pow(1.0 - u, h2)) + beta3(cfg.H, u, 1.0 - u, b3);
}

// 2 int_0^inf eta^{-1/H} Re B_eta w(eta) deta, where w -> 1 as eta -> inf.
AhResult eta_integral(const TestFunction& f, const TestFunction& g, double H,
                      BetaConvention conv, double rel_tol,
                      const std::function<double(double)>& weight, bool weight_small_eta_regular) {
  require_xi1(f);
  require_xi1(g);
  const double inv_h = 1.0 / H;
  auto h = [&](double eta) { return b_eta(f, g, eta, conv).real() * weight(eta); };
  const double osc = std::max({reach(f), reach(g), 1e-12});
  const double smin = std::min(f.scale(), g.scale());
  const double smax = std::max(f.scale(), g.scale());
  const bool compact = f.support().has_value() || g.support().has_value();
  const double eta0 = 0.5 / std::max(osc, smax);
  const double eta1 = std::max((compact ? 2000.0 : 40.0) / smin, 4.0 * eta0);

  AhResult r;
  // [0, eta0]: near 0, Re B_eta ~ m1(f) m1(g) eta^2, so eta^{-1/H} B is like
  // eta^{2-1/H}; eta = eta0 v^p with p = 1/(3 - 1/H) makes it bounded.
  if (weight_small_eta_regular) {
    const auto q = quad::gauss_kronrod(
        [&](double eta) { return eta > 0.0 ? std::pow(eta, -inv_h) * h(eta) : 0.0; }, 0.0, eta0,
        rel_tol);
    r.value += q.value;
    r.error += q.error;
  } else {
    const double p = 1.0 / (3.0 - inv_h);
    const auto q = quad::gauss_kronrod(
        [&](double v) {
          if (v <= 0.0) return 0.0;
          const double eta = eta0 * std::pow(v, p);
          return std::pow(eta, -inv_h) * h(eta) * eta * p / v;
        },
        0.0, 1.0, rel_tol);
    r.value += q.value;
    r.error += q.error;
  }
  // [eta0, eta1] in panels short enough to resolve the oscillation of fhat.
  const double width = std::min(0.5 * std::numbers::pi / osc, 0.5 / smin);
  const auto panels = static_cast<std::size_t>(std::ceil((eta1 - eta0) / width));
  std::vector<double> br(panels + 1);
  for (std::size_t i = 0; i <= panels; ++i)
    br[i] = eta0 + (eta1 - eta0) * static_cast<double>(i) / static_cast<double>(panels);
  const auto mid = quad::gauss_kronrod_panels(
      [&](double eta) { return std::pow(eta, -inv_h) * h(eta); }, br, rel_tol, 12);
  r.value += mid.value;
  r.error += mid.error;
  // [eta1, inf): Re B_eta -> m0(f) m0(g) once fhat, ghat have decayed; the
  // constant integrates exactly, the decayed remainder is bounded.
  const double sign = conv == BetaConvention::positive ? 1.0 : -1.0;
  const double m0f = fourier(f, 0.0).real(), m0g = fourier(g, 0.0).real();
  const double tail_scale = std::pow(eta1, 1.0 - inv_h) / (inv_h - 1.0);
  r.value += sign * m0f * m0g * tail_scale;
  const double af = std::abs(fourier(f, eta1)), ag = std::abs(fourier(g, eta1));
  r.error += (af * (std::abs(m0g) + ag) + ag * std::abs(m0f)) * tail_scale;
  r.value *= 2.0;
  r.error *= 2.0;
  return r;
}

double prefactor(const HurstConfig& cfg) {
  const double H = cfg.H;
  return cfg.beta1 * cfg.beta1 / std::numbers::pi * boost::math::tgamma(1.0 + 0.5 / H) /
         (2.0 * H);
}

void require_above_third(double H, const char* who) {
  if (!(H > kThird) || is_critical(H))
    throw DomainError(std::string(who) +
                      ": requires H > 1/3; the s-integral diverges for H <= 1/3 "
                      "(use a_one_third at H = 1/3)");
  if (!(H < 1.0)) throw DomainError(std::string(who) + ": requires H < 1");
}

}  // namespace

std::complex<double> b_eta(const TestFunction& f, const TestFunction& g, double eta,
                           BetaConvention conv) {
  require_xi1(f);
  require_xi1(g);
  if (eta == 0.0) return {};
  const std::complex<double> F = fourier(f, eta) - fourier(f, 0.0);
  const std::complex<double> G = fourier(g, eta) - fourier(g, 0.0);
  const std::complex<double> v = F * std::conj(G);
  return conv == BetaConvention::positive ? v : -v;
}

AhResult radial_factor(double H, const Beta3Options& b3) {
  const HurstConfig cfg = make_hurst_config(H);
  const double a = H - 0.5;
  const double alpha = 1.0 + 0.5 / H;
  // symmetric in u <-> 1-u; u = v^{1/(a+1)} absorbs u^a at 0.
  auto g = [&](double v) {
    if (v <= 0.0) v = 1e-300;
    const double u = std::pow(v, 1.0 / (a + 1.0));
    return std::pow(1.0 - u, a) * std::pow(0.5 * sigma_u(cfg, u, b3), -alpha) / (a + 1.0);
  };
  const double vmax = std::pow(0.5, a + 1.0);
  const auto q = quad::gauss_kronrod(g, 0.0, vmax, 1e-10);
  return {2.0 * q.value, 2.0 * q.error};
}

AhResult eta_factor(const TestFunction& f, const TestFunction& g, double H, BetaConvention conv,
                    double rel_tol) {
  require_above_third(H, "eta_factor");
  return eta_integral(f, g, H, conv, rel_tol, [](double) { return 1.0; }, false);
}

AhResult a_h(const TestFunction& f, const TestFunction& g, double H, const AhOptions& opt) {
  require_above_third(H, "a_h");
  const HurstConfig cfg = make_hurst_config(H);
  const double qtol = std::min(1e-8, opt.rel_tol * 1e-2);
  const AhResult E = eta_factor(f, g, H, opt.convention, qtol);
  if (E.value == 0.0 && E.error == 0.0) return {};
  Beta3Options b3 = opt.beta3;
  b3.rel_tol = std::min(b3.rel_tol, 1e-9);
  const AhResult U = radial_factor(H, b3);
  const double P = prefactor(cfg);
  AhResult r;
  r.value = P * U.value * E.value;
  r.error = P * (std::abs(U.error * E.value) + std::abs(U.value * E.error));
  return r;
}

double a_h_value(const TestFunction& f, const TestFunction& g, double H, const AhOptions& opt) {
  return a_h(f, g, H, opt).value;
}

AhResult a_h_truncated(const TestFunction& f, const TestFunction& g, double H, double r_max,
                       const AhOptions& opt) {
  if (!(H > 0.25 && H < 1.0)) throw DomainError("a_h_truncated: H must lie in (1/4, 1)");
  if (!(r_max > 0.0)) throw DomainError("a_h_truncated: r_max must be positive");
  const HurstConfig cfg = make_hurst_config(H);
  const double a = H - 0.5;
  const double alpha = 1.0 + 0.5 / H;
  const double ga = boost::math::tgamma(alpha);
  const double r2h = std::pow(r_max, 2.0 * H);
  const double qtol = std::min(1e-6, opt.rel_tol * 1e-2);
  auto outer = [&](double v) {
    if (v <= 0.0) v = 1e-300;
    const double u = std::pow(v, 1.0 / (a + 1.0));
    const double sig = sigma_u(cfg, u, opt.beta3);
    auto w = [&](double eta) {
      return boost::math::tgamma_lower(alpha, 0.5 * sig * eta * eta * r2h) / ga;
    };
    const AhResult E = eta_integral(f, g, H, opt.convention, qtol, w, true);
    const double c = std::pow(1.0 - u, a) * std::pow(0.5 * sig, -alpha) / (a + 1.0);
    return c * E.value;
  };
  const double vmax = std::pow(0.5, a + 1.0);
  const auto q = quad::gauss_kronrod(outer, 0.0, vmax, std::max(opt.rel_tol * 1e-2, 1e-7), 8);
  const double P = prefactor(cfg);
  return {P * 2.0 * q.value, P * 2.0 * q.error};
}

double one_third_integral(const Beta3Options& b3) {
  const double H = kThird;
  const double b2 = beta2(H);
  // s = u^6 removes s^{-1/6}: ds s^{-1/6} = 6 u^4 du.
  auto g = [&](double u) {
    const double s = std::pow(u, 6.0);
    const double sig = b2 * (1.0 + u * u * u * u) + beta3(H, 1.0, s, b3);
    return 6.0 * u * u * u * u * std::pow(sig, -2.5);
  };
  return quad::gauss_kronrod(g, 0.0, 1.0, 1e-11).value;
}

double a_one_third(const TestFunction& f, const TestFunction& g, const Beta3Options& b3) {
  for (const auto* h : {&f, &g}) {
    if (!h->xi().w2 || !std::isfinite(weighted_norm(*h, 2.0)))
      throw DomainError("a_one_third: " + h->label() + " is not in Xi_2");
  }
  const double m1f = moments(f).m1, m1g = moments(g).m1;
  if (m1f == 0.0 || m1g == 0.0) return 0.0;
  const double b1 = beta1(kThird);
  Beta3Options o = b3;
  o.rel_tol = std::min(o.rel_tol, 1e-10);
  return 6.0 * b1 * b1 / std::sqrt(std::numbers::pi) * m1f * m1g * one_third_integral(o);
}

LimitMatrix covariance_matrix(const std::vector<TestFunction>& fs, double H,
                              const AhOptions& opt) {
  if (!(H > 0.0 && H < 1.0)) throw DomainError("covariance_matrix: H must lie in (0,1)");
  const bool critical = is_critical(H);
  if (!critical && H < kThird)
    throw DomainError("covariance_matrix: no mixed-Gaussian limit for H < 1/3");
  const auto d = static_cast<Eigen::Index>(fs.size());
  LimitMatrix out;
  out.H = H;
  out.matrix = Eigen::MatrixXd::Zero(d, d);
  out.errors = Eigen::MatrixXd::Zero(d, d);
  for (const auto& f : fs) out.labels.push_back(f.label());
  if (d == 0) {
    out.sqrt_matrix = out.matrix;
    return out;
  }
  std::optional<AhResult> U;
  if (!critical) {
    Beta3Options b3 = opt.beta3;
    b3.rel_tol = std::min(b3.rel_tol, 1e-9);
    U = radial_factor(H, b3);
  }
  const double qtol = std::min(1e-8, opt.rel_tol * 1e-2);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      try {
        double v, e;
        if (critical) {
          v = a_one_third(fs[i], fs[j], opt.beta3);
          e = 1e-8 * std::abs(v);
        } else {
          const AhResult E = eta_factor(fs[i], fs[j], H, opt.convention, qtol);
          const double P = prefactor(make_hurst_config(H));
          v = P * U->value * E.value;
          e = P * (std::abs(U->error * E.value) + std::abs(U->value * E.error));
        }
        out.matrix(i, j) = out.matrix(j, i) = v;
        out.errors(i, j) = out.errors(j, i) = e;
      } catch (const std::exception& ex) {
        throw NumericalError("covariance_matrix entry (" + std::to_string(i) + "," +
                             std::to_string(j) + "): " + ex.what());
      }
    }
  }
  // Clamp round-off negativity, then take the root.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.matrix);
  const double tol = 1e-8 * std::abs(out.matrix.trace());
  Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() < -tol)
    throw NumericalError("covariance_matrix: limit matrix is not positive semidefinite");
  if (ev.minCoeff() < 0.0) {
    ev = ev.cwiseMax(0.0);
    out.matrix = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    out.matrix = (0.5 * (out.matrix + out.matrix.transpose())).eval();
  }
  out.sqrt_matrix = psd_sqrt(out.matrix);
  return out;
}

}  // namespace fbmlt
