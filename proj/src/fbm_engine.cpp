#include "fbmlt/fbm_engine.hpp"

#include "fbmlt/error.hpp"
#include "fbmlt/hurst_constants.hpp"
#include "fbmlt/parallel.hpp"
#include "fbmlt/quadrature.hpp"
#include "fbmlt/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>

namespace fbmlt {

std::string to_string(Method m) {
  switch (m) {
    case Method::cholesky: return "cholesky";
    case Method::circulant: return "circulant";
    case Method::volterra: return "volterra";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  if (s == "cholesky") return Method::cholesky;
  if (s == "circulant") return Method::circulant;
  if (s == "volterra") return Method::volterra;
  throw DomainError("unknown simulation method '" + std::string(s) + "'");
}

double covariance(double H, double s, double t) {
  if (s < 0.0 || t < 0.0) throw DomainError("covariance: times must be nonnegative");
  const double h2 = 2.0 * H;
  return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
}

// ---------------------------------------------------------------- kernel

namespace {

constexpr double kKernelTol = 1e-11;
constexpr unsigned kKernelDepth = 10;

// (1/a) int_{v1}^{v2} (s + v^{1/a})^a dv, the t-integral of the kernel
// derivative after v = (u - s)^a.
double kernel_core(double a, double s, double v1, double v2) {
  auto g = [a, s](double v) { return std::pow(s + std::pow(v, 1.0 / a), a); };
  const double lo = std::min(v1, v2), hi = std::max(v1, v2);
  const double mid = std::pow(s, a);  // where u - s == s
  double val;
  if (mid > lo && mid < hi) {
    const double br[3] = {lo, mid, hi};
    val = quad::gauss_kronrod_panels(g, br, kKernelTol, kKernelDepth).value;
  } else {
    val = quad::gauss_kronrod(g, lo, hi, kKernelTol, kKernelDepth).value;
  }
  // Orientation: v runs backwards when a < 0.
  if (v2 < v1) val = -val;
  return val / a;
}

}  // namespace

double volterra_kernel(double H, double t, double s) {
  if (!(s > 0.0) || !(t > 0.0)) throw DomainError("volterra_kernel: need s > 0 and t > 0");
  if (!(H > 0.0 && H < 1.0)) throw DomainError("volterra_kernel: H must lie in (0,1)");
  if (s >= t) return 0.0;
  if (H == 0.5) return 1.0;
  const double C = c_h(H);
  const double a = H - 0.5;
  if (H > 0.5) return C * std::pow(s, -a) * kernel_core(a, s, 0.0, std::pow(t - s, a));
  // H < 1/2: boundary term plus (1/2-H) s^{-a} int_s^t u^{H-3/2} (u-s)^{H-1/2} du.
  // With u - s = y^m, m = 3/(H+1/2), the integral is m int (s + y^m)^{H-3/2} y^2 dy,
  // smooth at y = 0.
  const double m = 3.0 / (H + 0.5);
  auto g = [m, s, H](double y) { return y * y * std::pow(s + std::pow(y, m), H - 1.5); };
  const double ymax = std::pow(t - s, 1.0 / m);
  const double mid = std::pow(s, 1.0 / m);
  // Past y = s^{1/m} the integrand decays like y^{2 + m(H-3/2)}; geometric panels.
  double I;
  if (mid < ymax) {
    I = quad::gauss_kronrod(g, 0.0, mid, kKernelTol, kKernelDepth).value +
        quad::gauss_kronrod_geometric(g, mid, ymax, 4.0, kKernelTol, kKernelDepth).value;
  } else {
    I = quad::gauss_kronrod(g, 0.0, ymax, kKernelTol, kKernelDepth).value;
  }
  I *= m;
  return C * (std::pow(t / s, a) * std::pow(t - s, a) + (0.5 - H) * std::pow(s, -a) * I);
}

double volterra_kernel_dt(double H, double t, double s) {
  if (!(s > 0.0) || !(t > 0.0)) throw DomainError("volterra_kernel_dt: need s > 0 and t > 0");
  if (s >= t || H == 0.5) return 0.0;
  const double a = H - 0.5;
  // Differentiating the H < 1/2 form leaves an extra factor (H - 1/2).
  const double lead = H > 0.5 ? c_h(H) : c_h(H) * a;
  return lead * std::pow(s, -a) * std::pow(t - s, a - 1.0) * std::pow(t, a);
}

double volterra_kernel_increment(double H, double t1, double t2, double s) {
  if (t2 < t1) return -volterra_kernel_increment(H, t2, t1, s);
  if (!(s > 0.0)) throw DomainError("volterra_kernel_increment: need s > 0");
  if (s >= t2 || t1 == t2) return 0.0;
  if (s >= t1) return volterra_kernel(H, t2, s);
  if (H == 0.5) return 0.0;
  const double a = H - 0.5;
  const double lead = H > 0.5 ? c_h(H) : c_h(H) * a;
  return lead * std::pow(s, -a) * kernel_core(a, s, std::pow(t1 - s, a), std::pow(t2 - s, a));
}

double mu(double H, double r, double s) {
  if (r < 0.0 || s < 0.0) throw DomainError("mu: times must be nonnegative");
  if (r > s) throw DomainError("mu: need r <= s");
  if (r == s) return 0.0;
  if (H == 0.5) return s - r;
  // theta = s - y^{1/H}: K^2 dtheta = K^2 (1/H) y^{1/H-1} dy, and since
  // K(s, theta) ~ (s-theta)^{H-1/2} the transformed integrand is ~ y near 0.
  const double p = 1.0 / H;
  auto g = [&](double y) {
    if (y <= 0.0) return 0.0;
    const double d = std::pow(y, p);
    const double theta = s - d;
    if (theta <= 0.0) return 0.0;
    const double k = volterra_kernel(H, s, theta);
    return k * k * p * d / y;
  };
  if (r > 0.0) return quad::gauss_kronrod(g, 0.0, std::pow(s - r, H), 1e-9, 10).value;
  // r = 0: K(s, theta)^2 ~ theta^{-|2H-1|} as theta -> 0, removed on [0, s/2]
  // by theta = x^q with q = 1 / (1 - |2H-1|).
  const double q = 1.0 / (1.0 - std::abs(2.0 * H - 1.0));
  auto g0 = [&](double x) {
    if (x <= 0.0) return 0.0;
    const double theta = std::pow(x, q);
    if (!(theta > 0.0)) return 0.0;
    const double k = volterra_kernel(H, s, theta);
    return k * k * q * theta / x;
  };
  const double near = quad::gauss_kronrod(g0, 0.0, std::pow(0.5 * s, 1.0 / q), 1e-9, 10).value;
  return near + quad::gauss_kronrod(g, 0.0, std::pow(0.5 * s, H), 1e-9, 10).value;
}

double conditional_mean_path(const FbmPath& path, double r, double s) {
  if (path.wiener_increments.empty())
    throw DomainError("conditional_mean_path: path carries no Wiener increments");
  if (r < 0.0 || r > s || s > path.T * (1.0 + 1e-12))
    throw DomainError("conditional_mean_path: need 0 <= r <= s <= T");
  const double dt = path.dt();
  double acc = 0.0;
  for (std::size_t j = 0; j < path.N; ++j) {
    const double theta = (static_cast<double>(j) + 0.5) * dt;
    if (theta >= r) break;
    acc += volterra_kernel(path.H, s, theta) * path.wiener_increments[j];
  }
  return acc;
}

double scaled_increment_variance(double H, double r, double s1, double s2, double n) {
  if (!(r > 0.0) || s1 < 0.0 || s2 < 0.0 || !(n > 0.0))
    throw DomainError("scaled_increment_variance: need r > 0, s1, s2 >= 0, n > 0");
  if (s1 == s2 || H == 0.5) return 0.0;
  const double lo = std::min(s1, s2), hi = std::max(s1, s2);
  const double t1 = r + lo / n, t2 = r + hi / n;
  auto g = [&](double theta) {
    if (theta <= 0.0 || theta >= r) return 0.0;
    const double d = volterra_kernel_increment(H, t1, t2, theta);
    return d * d;
  };
  // [0, r/2]: theta^{1-2H} at the origin when H > 1/2, removed by theta = x^q.
  const double q = 1.0 / (1.0 - std::abs(2.0 * H - 1.0));
  auto g0 = [&](double x) {
    const double theta = std::pow(x, q);
    if (!(theta > 0.0)) return 0.0;
    return g(theta) * q * theta / x;
  };
  double total = quad::gauss_kronrod(g0, 0.0, std::pow(0.5 * r, 1.0 / q), 1e-10, 10).value;
  // [r/2, r]: structure on the scale hi/n next to r.
  std::vector<double> br{0.5 * r, r};
  for (int k = -20; k <= 60; ++k) {
    const double d = (hi / n) * std::pow(2.0, k);
    if (d < 0.5 * r) br.push_back(r - d);
  }
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  total += quad::gauss_kronrod_panels(g, br, 1e-10, 10).value;
  return std::pow(n, 2.0 * H) * total;
}

// ---------------------------------------------------------------- sampling

struct PathSampler::State {
  Eigen::MatrixXd chol_L;              // cholesky
  std::vector<double> circ_sqrt;       // circulant: sqrt(lambda_k / m)
  std::vector<double> kernel;          // volterra: packed lower triangle
};

PathSampler::PathSampler(double H, double T, std::size_t N, std::uint64_t seed, Method method)
    : H_(H), T_(T), N_(N), seed_(seed), method_(method), state_(std::make_unique<State>()) {
  if (!(H > 0.0 && H < 1.0)) throw DomainError("sample_paths: H must lie in (0,1)");
  if (!(T > 0.0)) throw DomainError("sample_paths: T must be positive");
  if (N < 1) throw DomainError("sample_paths: N must be >= 1");
  const double dt = T / static_cast<double>(N);
  switch (method) {
    case Method::cholesky: {
      if (N > 4096) throw DomainError("sample_paths: cholesky is limited to N <= 4096");
      Eigen::MatrixXd R(N, N);
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j <= i; ++j)
          R(i, j) = R(j, i) = covariance(H, (i + 1) * dt, (j + 1) * dt);
      Eigen::LLT<Eigen::MatrixXd> llt(R);
      if (llt.info() != Eigen::Success)
        throw NumericalError("sample_paths: covariance factorization failed (degenerate grid)");
      state_->chol_L = llt.matrixL();
      break;
    }
    case Method::circulant: {
      const std::size_t m = 2 * N;
      const double h2 = 2.0 * H;
      auto gamma = [h2](double k) {
        return 0.5 * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + std::pow(std::abs(k - 1.0), h2));
      };
      std::vector<std::complex<double>> row(m), lam;
      for (std::size_t j = 0; j <= N; ++j) row[j] = gamma(static_cast<double>(j));
      for (std::size_t j = 1; j < N; ++j) row[m - j] = row[j];
      Eigen::FFT<double> fft;
      fft.fwd(lam, row);
      double maxlam = 0.0;
      for (const auto& l : lam) maxlam = std::max(maxlam, l.real());
      state_->circ_sqrt.resize(m);
      const double scale = std::pow(dt, H);
      for (std::size_t k = 0; k < m; ++k) {
        double l = lam[k].real();
        if (l < 0.0) {
          if (l < -1e-10 * maxlam)
            throw NumericalError(
                "sample_paths: circulant embedding has a negative eigenvalue; "
                "double the embedding size");
          l = 0.0;
        }
        state_->circ_sqrt[k] = scale * std::sqrt(l / static_cast<double>(m));
      }
      break;
    }
    case Method::volterra: {
      if (N > 4096) throw DomainError("sample_paths: volterra is limited to N <= 4096");
      // K(t_k, theta_j) = dt^{H-1/2} K(k, j + 1/2) by homogeneity.
      auto& K = state_->kernel;
      K.assign(N * (N + 1) / 2, 0.0);
      const double sc = std::pow(dt, H - 0.5);
      parallel_for(N, 0, [&](std::size_t k1) {
        const std::size_t k = k1 + 1;
        const std::size_t off = k1 * (k1 + 1) / 2;
        for (std::size_t j = 0; j < k; ++j)
          K[off + j] = sc * volterra_kernel(H, static_cast<double>(k), j + 0.5);
      });
      break;
    }
  }
}

PathSampler::~PathSampler() = default;
PathSampler::PathSampler(PathSampler&&) noexcept = default;

void PathSampler::sample_into(std::uint64_t index, std::vector<double>& values,
                              std::vector<double>* wiener) const {
  rng::NormalStream z(rng::substream_key(seed_, index));
  const std::size_t N = N_;
  values.assign(N + 1, 0.0);
  switch (method_) {
    case Method::cholesky: {
      Eigen::VectorXd g(N);
      for (std::size_t i = 0; i < N; ++i) g[i] = z.next();
      const Eigen::VectorXd x = state_->chol_L.triangularView<Eigen::Lower>() * g;
      for (std::size_t i = 0; i < N; ++i) values[i + 1] = x[i];
      break;
    }
    case Method::circulant: {
      const std::size_t m = 2 * N;
      thread_local Eigen::FFT<double> fft;
      thread_local std::vector<std::complex<double>> w, y;
      w.resize(m);
      for (std::size_t k = 0; k < m; ++k) {
        const double re = z.next();
        const double im = z.next();
        w[k] = state_->circ_sqrt[k] * std::complex<double>(re, im);
      }
      fft.fwd(y, w);
      double acc = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        acc += y[i].real();
        values[i + 1] = acc;
      }
      break;
    }
    case Method::volterra: {
      std::vector<double> local;
      std::vector<double>& dW = wiener ? *wiener : local;
      dW.resize(N);
      const double sd = std::sqrt(T_ / static_cast<double>(N));
      for (auto& x : dW) x = sd * z.next();
      const auto& K = state_->kernel;
      for (std::size_t k1 = 0; k1 < N; ++k1) {
        const std::size_t off = k1 * (k1 + 1) / 2;
        double acc = 0.0;
        for (std::size_t j = 0; j <= k1; ++j) acc += K[off + j] * dW[j];
        values[k1 + 1] = acc;
      }
      break;
    }
  }
}

FbmPath PathSampler::sample(std::uint64_t index) const {
  FbmPath p;
  p.H = H_;
  p.T = T_;
  p.N = N_;
  p.seed = seed_;
  p.index = index;
  p.method = method_;
  sample_into(index, p.values, method_ == Method::volterra ? &p.wiener_increments : nullptr);
  return p;
}

std::vector<FbmPath> sample_paths(double H, double T, std::size_t N, std::size_t count,
                                  std::uint64_t seed, Method method, unsigned threads) {
  if (count < 1) throw DomainError("sample_paths: count must be >= 1");
  const PathSampler sampler(H, T, N, seed, method);
  std::vector<FbmPath> out(count);
  parallel_for(count, threads, [&](std::size_t i) { out[i] = sampler.sample(i); });
  return out;
}

}  // namespace fbmlt
