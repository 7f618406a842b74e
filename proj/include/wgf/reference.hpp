#pragma once

// Reference densities p_r with CDF, quantile, truncated moments and a seeded
// sampler.  Gaussian and Barenblatt (m = 2) references have closed forms;
// a custom reference falls back to adaptive quadrature.

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace wgf {

enum class ReferenceKind { gaussian, barenblatt, custom };

class ReferenceDensity {
 public:
  static ReferenceDensity gaussian(double mean = 0.0, double sd = 1.0);
  /// Barenblatt profile of the m = 2 porous medium equation at time t.
  static ReferenceDensity barenblatt(double t0, double t = 0.0);
  /// Arbitrary density; `inverse_cdf` may be empty, in which case it is
  /// obtained by bracketing the CDF.
  static ReferenceDensity custom(std::function<double(double)> pdf,
                                 std::function<double(double)> cdf,
                                 std::function<double(double)> inverse_cdf = {},
                                 double lo = -std::numeric_limits<double>::infinity(),
                                 double hi = std::numeric_limits<double>::infinity());

  ReferenceKind kind() const { return kind_; }
  bool is_standard_gaussian() const {
    return kind_ == ReferenceKind::gaussian && mean_ == 0.0 && sd_ == 1.0;
  }

  double pdf(double z) const;
  double cdf(double z) const;
  /// 1 - cdf(z), accurate in the upper tail.
  double survival(double z) const;
  double inverse_cdf(double u) const;
  /// cdf(hi) - cdf(lo), computed on the side that avoids cancellation.
  double mass(double lo, double hi) const;
  /// (int z^k p_r dz over [lo, hi]) for k = 0, 1, 2; lo/hi may be infinite.
  std::array<double, 3> moments(double lo, double hi) const;
  /// Support interval (infinite for the Gaussian).
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }

  std::vector<double> sample(std::size_t count, std::uint64_t seed) const;

 private:
  ReferenceKind kind_ = ReferenceKind::gaussian;
  double mean_ = 0.0, sd_ = 1.0;
  double t0_ = 1.0, t_ = 0.0;
  double lo_ = -std::numeric_limits<double>::infinity();
  double hi_ = std::numeric_limits<double>::infinity();
  std::function<double(double)> pdf_, cdf_, inv_;
};

double normal_pdf(double x);
double normal_cdf(double x);
/// Upper tail 1 - Phi(x).
double normal_sf(double x);
double normal_quantile(double u);

}  // namespace wgf
