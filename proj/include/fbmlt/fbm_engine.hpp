#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace fbmlt {

enum class Method { cholesky, circulant, volterra };

std::string to_string(Method m);
Method parse_method(std::string_view s);

/// One trajectory on the uniform grid t_k = k T / N, k = 0..N.
struct FbmPath {
  double H = 0.5;
  double T = 1.0;
  std::size_t N = 0;
  std::vector<double> values;             // N + 1 entries, values[0] == 0
  std::vector<double> wiener_increments;  // N entries, volterra method only
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  Method method = Method::circulant;

  double dt() const noexcept { return T / static_cast<double>(N); }
  double time(std::size_t k) const noexcept { return T * static_cast<double>(k) / N; }
};

/// R(s, t) = (s^{2H} + t^{2H} - |t - s|^{2H}) / 2.
double covariance(double H, double s, double t);

/// Draws path `index` of the family (H, T, N, seed, method) on demand. The
/// factorization is computed once in the constructor; `sample` is const and
/// thread-safe, and its output depends only on (seed, index).
class PathSampler {
 public:
  PathSampler(double H, double T, std::size_t N, std::uint64_t seed, Method method);
  ~PathSampler();
  PathSampler(PathSampler&&) noexcept;

  FbmPath sample(std::uint64_t index) const;
  /// Writes the N+1 path values (and the increments for volterra) into caller buffers.
  void sample_into(std::uint64_t index, std::vector<double>& values,
                   std::vector<double>* wiener = nullptr) const;

  double H() const noexcept { return H_; }
  double T() const noexcept { return T_; }
  std::size_t N() const noexcept { return N_; }
  Method method() const noexcept { return method_; }

 private:
  struct State;
  double H_, T_;
  std::size_t N_;
  std::uint64_t seed_;
  Method method_;
  std::unique_ptr<State> state_;
};

std::vector<FbmPath> sample_paths(double H, double T, std::size_t N, std::size_t count,
                                  std::uint64_t seed, Method method, unsigned threads = 0);

/// K_H(t, s); zero when s >= t. Requires s > 0 and t > 0.
double volterra_kernel(double H, double t, double s);
/// d/dt K_H(t, s) = c s^{1/2-H} (t-s)^{H-3/2} t^{H-1/2} for s < t, with c = C_H when
/// H > 1/2 and c = (H - 1/2) C_H when H < 1/2.
double volterra_kernel_dt(double H, double t, double s);
/// K_H(t2, s) - K_H(t1, s) for t1 <= t2, integrated directly from the t-derivative.
double volterra_kernel_increment(double H, double t1, double t2, double s);

/// mu_{r,s} = int_r^s K_H(s, theta)^2 dtheta.
double mu(double H, double r, double s);

/// B_{r,s} = sum over theta_j < r of K_H(s, theta_j) dW_j with midpoints theta_j.
double conditional_mean_path(const FbmPath& path, double r, double s);

/// n^{2H} E[(B_{r,r+s1/n} - B_{r,r+s2/n})^2], computed by quadrature (no sampling).
double scaled_increment_variance(double H, double r, double s1, double s2, double n);

}  // namespace fbmlt
