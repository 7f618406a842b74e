#include "wgf/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wgf/errors.hpp"

namespace wgf {

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 double rel_tol) {
  if (a == b) return 0.0;
  if (a > b) return -integrate(f, b, a, abs_tol, rel_tol);
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double err = 0.0, l1 = 0.0;
  double value = GK::integrate(f, a, b, 0, rel_tol, &err, &l1);
  const double target = std::max(abs_tol, rel_tol * l1);
  if (std::isfinite(value) && err <= target) return value;
  value = GK::integrate(f, a, b, 20, l1 > 0.0 ? target / l1 : rel_tol, &err, &l1);
  if (!std::isfinite(value) || err > std::max(abs_tol, rel_tol * l1) * 100.0)
    throw NumericError("quadrature failed on [" + std::to_string(a) + ", " + std::to_string(b) +
                       "], error estimate " + std::to_string(err));
  return value;
}

double integrate_split(const std::function<double(double)>& f, double a, double b,
                       std::span<const double> breaks, double abs_tol, double rel_tol) {
  std::vector<double> pts{a};
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  std::sort(pts.begin() + 1, pts.end() - 1);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k)
    if (pts[k + 1] > pts[k]) total += integrate(f, pts[k], pts[k + 1], abs_tol, rel_tol);
  return total;
}

}  // namespace wgf
