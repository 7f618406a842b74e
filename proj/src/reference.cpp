#include "wgf/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

#include "wgf/oracles.hpp"
#include "wgf/quadrature.hpp"

namespace wgf {

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }
double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("normal_quantile: u outside (0, 1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

namespace {

// x * pdf(x) with the limit 0 at infinity.
double x_phi(double x) { return std::isinf(x) ? 0.0 : x * normal_pdf(x); }

std::array<double, 3> gaussian_moments(double mean, double sd, double lo, double hi) {
  const double ul = (lo - mean) / sd, uh = (hi - mean) / sd;
  const double m0 = ul > 0.0 ? normal_sf(ul) - normal_sf(uh) : normal_cdf(uh) - normal_cdf(ul);
  const double m1 = normal_pdf(ul) - normal_pdf(uh);
  const double m2 = m0 + x_phi(ul) - x_phi(uh);
  return {m0, mean * m0 + sd * m1, mean * mean * m0 + 2.0 * mean * sd * m1 + sd * sd * m2};
}

}  // namespace

ReferenceDensity ReferenceDensity::gaussian(double mean, double sd) {
  if (!(sd > 0.0)) throw std::invalid_argument("gaussian reference: sd must be positive");
  ReferenceDensity r;
  r.kind_ = ReferenceKind::gaussian;
  r.mean_ = mean;
  r.sd_ = sd;
  return r;
}

ReferenceDensity ReferenceDensity::barenblatt(double t0, double t) {
  if (!(t0 + t > 0.0)) throw std::invalid_argument("barenblatt reference: t0 + t must be positive");
  ReferenceDensity r;
  r.kind_ = ReferenceKind::barenblatt;
  r.t0_ = t0;
  r.t_ = t;
  const double radius = barenblatt_radius(t, t0);
  r.lo_ = -radius;
  r.hi_ = radius;
  return r;
}

ReferenceDensity ReferenceDensity::custom(std::function<double(double)> pdf,
                                          std::function<double(double)> cdf,
                                          std::function<double(double)> inverse_cdf, double lo,
                                          double hi) {
  if (!pdf || !cdf) throw std::invalid_argument("custom reference needs pdf and cdf");
  ReferenceDensity r;
  r.kind_ = ReferenceKind::custom;
  r.pdf_ = std::move(pdf);
  r.cdf_ = std::move(cdf);
  r.inv_ = std::move(inverse_cdf);
  r.lo_ = lo;
  r.hi_ = hi;
  return r;
}

double ReferenceDensity::pdf(double z) const {
  switch (kind_) {
    case ReferenceKind::gaussian: return normal_pdf((z - mean_) / sd_) / sd_;
    case ReferenceKind::barenblatt: return wgf::barenblatt(t_, z, t0_);
    case ReferenceKind::custom: return pdf_(z);
  }
  return 0.0;
}

double ReferenceDensity::cdf(double z) const {
  switch (kind_) {
    case ReferenceKind::gaussian: return normal_cdf((z - mean_) / sd_);
    case ReferenceKind::barenblatt: return barenblatt_cdf(t_, z, t0_);
    case ReferenceKind::custom: return cdf_(z);
  }
  return 0.0;
}

double ReferenceDensity::survival(double z) const {
  if (kind_ == ReferenceKind::gaussian) return normal_sf((z - mean_) / sd_);
  if (kind_ == ReferenceKind::barenblatt) return barenblatt_cdf(t_, -z, t0_);
  return 1.0 - cdf(z);
}

double ReferenceDensity::mass(double lo, double hi) const {
  if (hi <= lo) return 0.0;
  const double mid = kind_ == ReferenceKind::gaussian ? mean_ : 0.0;
  if (lo >= mid) return survival(lo) - survival(hi);
  return cdf(hi) - cdf(lo);
}

double ReferenceDensity::inverse_cdf(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("inverse_cdf: u outside (0, 1)");
  switch (kind_) {
    case ReferenceKind::gaussian: return mean_ + sd_ * normal_quantile(u);
    case ReferenceKind::barenblatt: return barenblatt_quantile(t_, u, t0_);
    case ReferenceKind::custom:
      if (inv_) return inv_(u);
      break;
  }
  // Bracket and bisect.
  double a = std::isfinite(lo_) ? lo_ : -1.0, b = std::isfinite(hi_) ? hi_ : 1.0;
  while (cdf(a) > u) a = 2.0 * a - 1.0;
  while (cdf(b) < u) b = 2.0 * b + 1.0;
  for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
    const double m = 0.5 * (a + b);
    (cdf(m) < u ? a : b) = m;
  }
  return 0.5 * (a + b);
}

std::array<double, 3> ReferenceDensity::moments(double lo, double hi) const {
  lo = std::max(lo, lo_);
  hi = std::min(hi, hi_);
  if (!(hi > lo)) return {0.0, 0.0, 0.0};
  if (kind_ == ReferenceKind::gaussian) return gaussian_moments(mean_, sd_, lo, hi);
  if (kind_ == ReferenceKind::barenblatt) {
    // p = A - B x^2 on the support
    const double T = t0_ + t_;
    const double A = std::cbrt(3.0) / 4.0 / std::cbrt(T);
    const double B = 1.0 / (12.0 * T);
    auto prim = [&](int k, double x) {
      return A * std::pow(x, k + 1) / (k + 1) - B * std::pow(x, k + 3) / (k + 3);
    };
    return {prim(0, hi) - prim(0, lo), prim(1, hi) - prim(1, lo), prim(2, hi) - prim(2, lo)};
  }
  std::array<double, 3> m{};
  for (int k = 0; k < 3; ++k)
    m[k] = integrate([&](double z) { return std::pow(z, k) * pdf_(z); }, lo, hi);
  return m;
}

std::vector<double> ReferenceDensity::sample(std::size_t count, std::uint64_t seed) const {
  if (count == 0) throw std::invalid_argument("sample: count must be positive");
  std::vector<double> out(count);
  std::mt19937_64 rng(seed);
  if (kind_ == ReferenceKind::gaussian) {
    std::normal_distribution<double> nd(mean_, sd_);
    for (double& z : out) z = nd(rng);
    return out;
  }
  // Open interval (0, 1): generate_canonical can return 0.
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (double& z : out) {
    double u = ud(rng);
    while (u <= 0.0) u = ud(rng);
    z = inverse_cdf(u);
  }
  return out;
}

}  // namespace wgf
