#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "support/oracles.hpp"
#include "wgf/errors.hpp"
#include "wgf/oracles.hpp"
#include "wgf/quadrature.hpp"
#include "wgf/reference.hpp"
#include "wgf/sample_set.hpp"

using namespace wgf;

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
}

TEST_CASE("gaussian pdf, cdf and quantile") {
  for (double x : {-8.0, -2.5, -0.3, 0.0, 0.7, 3.1, 9.0}) {
    CHECK(normal_pdf(x) == doctest::Approx(oracle::phi(x)).epsilon(1e-14));
    CHECK(normal_cdf(x) == doctest::Approx(oracle::Phi(x)).epsilon(1e-14));
    CHECK(normal_sf(x) == doctest::Approx(oracle::Phi(-x)).epsilon(1e-14));
  }
  for (double u : {1e-12, 1e-5, 0.1, 0.5, 0.77, 1.0 - 1e-9}) {
    CHECK(oracle::Phi(normal_quantile(u)) == doctest::Approx(u).epsilon(1e-12));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
}

TEST_CASE("built-in densities integrate to one") {
  const auto g = ReferenceDensity::gaussian();
  CHECK(oracle::simpson([&](double z) { return g.pdf(z); }, -12.0, 12.0, 20000) == doctest::Approx(1.0).epsilon(1e-8));
  for (double t : {0.0, 0.5, 1.0}) {
    const auto b = ReferenceDensity::barenblatt(1.0, t);
    const double R = barenblatt_radius(t, 1.0);
    CHECK(oracle::simpson([&](double z) { return b.pdf(z); }, -R, R, 20000) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("cdf is monotone with limits 0 and 1") {
  for (const auto& r : {ReferenceDensity::gaussian(0.3, 2.0), ReferenceDensity::barenblatt(1.0)}) {
    double prev = r.cdf(-50.0);
    CHECK(prev == doctest::Approx(0.0));
    for (double z = -50.0; z <= 50.0; z += 0.01) {
      const double c = r.cdf(z);
      CHECK(c >= prev);
      prev = c;
    }
    CHECK(prev == doctest::Approx(1.0));
  }
}

TEST_CASE("truncated moments match quadrature") {
  const auto g = ReferenceDensity::gaussian(0.5, 1.5);
  const auto b = ReferenceDensity::barenblatt(1.0, 0.25);
  for (auto [lo, hi] : {std::pair{-1.0, 0.7}, std::pair{0.2, 3.0}, std::pair{-2.0, 2.0}}) {
    for (const auto* r : {&g, &b}) {
      const auto m = r->moments(lo, hi);
      for (int k = 0; k < 3; ++k) {
        // integrate inside the support so the rule never straddles its edge
        const double a = std::max(lo, r->support_lo()), c = std::min(hi, r->support_hi());
        const double q = oracle::simpson([&](double z) { return std::pow(z, k) * r->pdf(z); }, a, c, 4000);
        CHECK(m[k] == doctest::Approx(q).epsilon(1e-9).scale(1.0));
      }
    }
  }
  const auto m = g.moments(-inf, inf);
  CHECK(m[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m[2] == doctest::Approx(0.25 + 2.25).epsilon(1e-14));
}

TEST_CASE("custom reference falls back to quadrature and bisection") {
  // Laplace density
  auto pdf = [](double z) { return 0.5 * std::exp(-std::abs(z)); };
  auto cdf = [](double z) { return z < 0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z); };
  const auto r = ReferenceDensity::custom(pdf, cdf);
  CHECK(r.inverse_cdf(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(r.inverse_cdf(0.9) == doctest::Approx(-std::log(0.2)).epsilon(1e-12));
  const auto m = r.moments(0.0, inf);
  CHECK(m[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(m[1] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(m[2] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("sampling is deterministic and has the right moments") {
  const auto g = ReferenceDensity::gaussian();
  const auto s1 = g.sample(1000000, 42);
  const auto s2 = g.sample(1000000, 42);
  CHECK(s1 == s2);
  CHECK(g.sample(10, 43) != g.sample(10, 42));
  const double m = std::accumulate(s1.begin(), s1.end(), 0.0) / s1.size();
  double v = 0.0;
  for (double x : s1) v += (x - m) * (x - m);
  v /= s1.size() - 1;
  // standard errors of the mean and of the variance
  CHECK(std::abs(m) <= 4.0 / std::sqrt(1e6));
  CHECK(std::abs(v - 1.0) <= 4.0 * std::sqrt(2.0 / 1e6));
  CHECK_THROWS_AS(g.sample(0, 1), std::invalid_argument);

  const auto b = ReferenceDensity::barenblatt(1.0);
  const auto sb = b.sample(100000, 7);
  const double R = barenblatt_radius(0.0, 1.0);
  for (double x : sb) REQUIRE(std::abs(x) <= R);
  // second moment of the profile: R^2 / 5
  double m2 = 0.0;
  for (double x : sb) m2 += x * x;
  m2 /= sb.size();
  CHECK(m2 == doctest::Approx(R * R / 5.0).epsilon(2e-2));
}

TEST_CASE("integrate handles infinite ranges, breaks and tiny intervals") {
  CHECK(integrate([](double z) { return oracle::phi(z); }, -inf, inf) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(integrate([](double z) { return z * z * oracle::phi(z); }, 0.0, inf) == doctest::Approx(0.5).epsilon(1e-12));
  const std::vector<double> breaks{0.3, -2.0, 0.1};
  const double kinked = integrate_split([](double z) { return std::abs(z - 0.1) + std::abs(z - 0.3); }, -1.0, 1.0, breaks);
  CHECK(kinked == doctest::Approx(oracle::simpson([](double z) { return std::abs(z - 0.1); }, -1.0, 0.1, 2) +
                                  oracle::simpson([](double z) { return std::abs(z - 0.1); }, 0.1, 1.0, 2) +
                                  oracle::simpson([](double z) { return std::abs(z - 0.3); }, -1.0, 0.3, 2) +
                                  oracle::simpson([](double z) { return std::abs(z - 0.3); }, 0.3, 1.0, 2))
                          .epsilon(1e-12));
  CHECK(integrate([](double z) { return std::exp(z); }, 1.0, 1.0 + 1e-9) ==
        doctest::Approx(std::exp(1.0) * std::expm1(1e-9)).epsilon(1e-10));
}

TEST_CASE("sample set prefix sums") {
  std::vector<double> z{3.0, -1.0, 2.0, 0.5, 2.0};
  const SampleSet s(z);
  CHECK(s.size() == 5);
  CHECK(s[0] == -1.0);
  CHECK(s.upper(2.0) == 4);
  CHECK(s.lower(2.0) == 2);
  const auto r = s.range_sums(1, 4);
  CHECK(static_cast<double>(r[0]) == 3.0);
  CHECK(static_cast<double>(r[1]) == 4.5);
  CHECK(static_cast<double>(r[2]) == 8.25);
  const std::vector<double> w{1.0, 2.0, 3.0, 4.0, 5.0};
  const WeightedPrefix wp(s, w);
  const auto c = wp.range_sums(0, 2);
  CHECK(static_cast<double>(c[0]) == 3.0);
  CHECK(static_cast<double>(c[1]) == -1.0 + 1.0);
}
