#pragma once

#include "fbmlt/hurst_constants.hpp"
#include "fbmlt/test_functions.hpp"

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace fbmlt {

/// Sign convention for B_eta[f,g].
enum class BetaConvention {
  positive,  ///< F(eta) conj(G(eta)): a genuine covariance kernel (default)
  literal,   ///< -F(eta) conj(G(eta)), the integrand as displayed
};

/// F(eta) conj(G(eta)) with F = fhat(eta) - fhat(0), G = ghat(eta) - ghat(0).
std::complex<double> b_eta(const TestFunction& f, const TestFunction& g, double eta,
                           BetaConvention conv = BetaConvention::positive);

struct AhOptions {
  double rel_tol = 1e-4;
  Beta3Options beta3{};
  BetaConvention convention = BetaConvention::positive;
};

struct AhResult {
  double value = 0.0;
  double error = 0.0;  // absolute
};

/// A_H[f,g] for H > 1/3. After s = R (u, 1-u) the radial integral is a Gamma
/// function and the constant factors as
///   (beta1^2/pi) Gamma(1 + 1/(2H)) / (2H) * U(H) * E(f,g),
///   U(H) = int_0^1 (u(1-u))^{H-1/2} (Sigma(u)/2)^{-1-1/(2H)} du,
///   E(f,g) = int_R |eta|^{-1/H} Re B_eta[f,g] deta,
/// with Sigma(u) = beta2 (u^{2H} + (1-u)^{2H}) + beta3(u, 1-u).
AhResult a_h(const TestFunction& f, const TestFunction& g, double H, const AhOptions& opt = {});
double a_h_value(const TestFunction& f, const TestFunction& g, double H,
                 const AhOptions& opt = {});

/// U(H) above, with its quadrature error.
AhResult radial_factor(double H, const Beta3Options& b3 = {});
/// E(f,g) above.
AhResult eta_factor(const TestFunction& f, const TestFunction& g, double H,
                    BetaConvention conv = BetaConvention::positive, double rel_tol = 1e-8);

/// A_H with the radial variable cut at R <= r_max (lower incomplete Gamma in
/// place of Gamma). Finite for every H; used to watch the blow-up as H -> 1/3.
AhResult a_h_truncated(const TestFunction& f, const TestFunction& g, double H, double r_max,
                       const AhOptions& opt = {});

/// A_{1/3}[f,g] = (6 beta1^2 / sqrt(pi)) m1(f) m1(g) J,
/// J = int_0^1 s^{-1/6} (beta2 (1 + s^{2/3}) + beta3(1, s))^{-5/2} ds at H = 1/3.
double a_one_third(const TestFunction& f, const TestFunction& g,
                   const Beta3Options& b3 = {});
/// J alone.
double one_third_integral(const Beta3Options& b3 = {});

struct LimitMatrix {
  double H = 0.0;
  std::vector<std::string> labels;
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd sqrt_matrix;
  Eigen::MatrixXd errors;  // per-entry absolute error estimates
};

/// Entries A_H[f_i, f_j] (or A_{1/3} at H = 1/3), symmetrized, with PSD square root.
LimitMatrix covariance_matrix(const std::vector<TestFunction>& fs, double H,
                              const AhOptions& opt = {});

}  // namespace fbmlt
