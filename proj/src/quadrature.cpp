#include "fbmlt/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <vector>

namespace fbmlt::quad {

QuadResult gauss_kronrod(const Integrand& f, double a, double b, double rel_tol,
                         unsigned max_depth) {
  if (a == b) return {};
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, max_depth, rel_tol, &err);
  return {v, err};
}

QuadResult gauss_kronrod_panels(const Integrand& f, std::span<const double> breaks,
                                double rel_tol, unsigned max_depth) {
  QuadResult total;
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    const auto r = gauss_kronrod(f, breaks[i - 1], breaks[i], rel_tol, max_depth);
    total.value += r.value;
    total.error += r.error;
  }
  return total;
}

QuadResult gauss_kronrod_geometric(const Integrand& f, double a, double b, double ratio,
                                   double rel_tol, unsigned max_depth) {
  std::vector<double> breaks{a};
  for (double x = a * ratio; x < b; x *= ratio) breaks.push_back(x);
  breaks.push_back(b);
  return gauss_kronrod_panels(f, breaks, rel_tol, max_depth);
}

QuadResult tanh_sinh(const Integrand& f, double a, double b, double rel_tol) {
  if (a == b) return {};
  static thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  double err = 0.0;
  const double v = integrator.integrate(f, a, b, rel_tol, &err);
  return {v, err};
}

QuadResult exp_sinh(const Integrand& f, double a, double rel_tol) {
  static thread_local boost::math::quadrature::exp_sinh<double> integrator;
  double err = 0.0;
  const double v = integrator.integrate(
      [&](double x) { return f(x); }, a, std::numeric_limits<double>::infinity(),
      rel_tol, &err);
  return {v, err};
}

}  // namespace fbmlt::quad
