#pragma once

#include <functional>
#include <span>

namespace fbmlt::quad {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
};

using Integrand = std::function<double(double)>;

/// Adaptive 31-point Gauss-Kronrod on a finite interval [a, b].
/// `rel_tol` is relative to the L1 norm of the integrand, matching Boost.
QuadResult gauss_kronrod(const Integrand& f, double a, double b,
                         double rel_tol = 1e-10, unsigned max_depth = 18);

/// Gauss-Kronrod applied panel by panel over the sorted breakpoints; errors add.
QuadResult gauss_kronrod_panels(const Integrand& f, std::span<const double> breaks,
                                double rel_tol = 1e-10, unsigned max_depth = 18);

/// Panels [a, a*ratio, a*ratio^2, ..., b] for integrands with structure at
/// every scale (a > 0).
QuadResult gauss_kronrod_geometric(const Integrand& f, double a, double b,
                                   double ratio = 4.0, double rel_tol = 1e-10,
                                   unsigned max_depth = 18);

/// Tanh-sinh on [a, b]; tolerates integrable endpoint singularities.
QuadResult tanh_sinh(const Integrand& f, double a, double b, double rel_tol = 1e-10);

/// Exp-sinh on [a, +inf).
QuadResult exp_sinh(const Integrand& f, double a, double rel_tol = 1e-10);

}  // namespace fbmlt::quad
