#include <doctest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "wgf/errors.hpp"
#include "wgf/oracles.hpp"
#include "wgf/reference.hpp"

using namespace wgf;

namespace {

// dT/dt + V'(T) at (t, z) by central differences in t.
double ode_defect(const std::function<double(double, double)>& T, const std::function<double(double)>& dV, double t,
                  double z) {
  const double h = 1e-5;
  const double dT = (T(t + h, z) - T(t - h, z)) / (2.0 * h);
  return dT + dV(T(t, z));
}

std::vector<double> gaussian_on(const GridSpec& g, double mean, double sd) {
  std::vector<double> p(g.n_points);
  for (std::size_t i = 0; i < g.n_points; ++i) p[i] = oracle::phi((g.x(i) - mean) / sd) / sd;
  return p;
}

double grid_l1(const GridSpec& g, const std::vector<double>& p, const std::function<double(double)>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.n_points; ++i) s += std::abs(p[i] - q(g.x(i)));
  return s * g.dx();
}

}  // namespace

TEST_CASE("linear transport map") {
  CHECK(map_quadratic(0.0, 1.3, 2.0) == 1.3);
  CHECK(map_quadratic(50.0, 1.3, 2.0) == doctest::Approx(2.0));
  CHECK(map_quadratic(1.0, 2.0, 0.0) == doctest::Approx(0.735758882342885).epsilon(1e-14));
}

TEST_CASE("quartic and sextic maps") {
  for (double t : {0.0, 0.3, 2.0}) {
    CHECK(map_quartic(t, 1.0) == 1.0);
    CHECK(map_sextic(t, 4.0) == 4.0);
  }
  for (double z : {-3.0, 0.2, 0.999, 1.5, 5.0}) CHECK(map_quartic(0.0, z) == doctest::Approx(z).epsilon(1e-14));
  for (double z : {-3.0, 3.5, 4.2, 7.0}) CHECK(map_sextic(0.0, z) == doctest::Approx(z).epsilon(1e-12));
}

TEST_CASE("analytic maps follow their characteristics") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> ut(0.05, 1.0), uz(-2.0, 6.0);
  auto dV4 = [](double x) { return std::pow(x - 1.0, 3) - (x - 1.0); };
  auto dV6 = [](double x) { return std::pow(x - 4.0, 5); };
  auto dV2 = [](double x) { return x - 0.7; };
  for (int k = 0; k < 100; ++k) {
    const double t = ut(rng), z = uz(rng);
    CHECK(std::abs(ode_defect(map_quartic, dV4, t, z)) <= 1e-6);
    CHECK(std::abs(ode_defect(map_sextic, dV6, t, z)) <= 1e-6);
    CHECK(std::abs(ode_defect([](double s, double y) { return map_quadratic(s, y, 0.7); }, dV2, t, z)) <= 1e-6);
  }
}

TEST_CASE("Ornstein-Uhlenbeck moments and map") {
  CHECK(map_ou(0.0, 0.4, 1.0, 30.0, 8.0) == doctest::Approx(0.4));
  CHECK(density_ou(0.0, 0.4, 1.0, 30.0, 8.0) == doctest::Approx(oracle::phi(0.4)));
  CHECK(ou_mean(1.0, 1.0, 30.0) == doctest::Approx(18.9636167648567).epsilon(1e-12));
  CHECK(ou_variance(1.0, 1.0, 8.0) == doctest::Approx(7.052653017343711).epsilon(1e-12));
  const double a = map_ou(0.7, -1.0, 1.0, 30.0, 8.0), b = map_ou(0.7, 0.0, 1.0, 30.0, 8.0),
               c = map_ou(0.7, 1.0, 1.0, 30.0, 8.0);
  CHECK(a - 2.0 * b + c == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("Barenblatt profile") {
  const double r0 = barenblatt_radius(0.0, 1.0);
  CHECK(r0 == doctest::Approx(std::pow(3.0, 2.0 / 3.0)).epsilon(1e-14));
  CHECK(barenblatt(0.0, r0 * 1.0000001, 1.0) == 0.0);
  CHECK(barenblatt(0.0, 10.0, 1.0) == 0.0);
  CHECK(barenblatt(0.0, 0.0, 1.0) == doctest::Approx(std::cbrt(3.0) / 4.0).epsilon(1e-14));
  for (double t : {0.0, 0.5, 1.0}) {
    const double r = barenblatt_radius(t, 1.0);
    CHECK(r == doctest::Approx(std::pow(3.0, 2.0 / 3.0) * std::cbrt(1.0 + t)).epsilon(1e-14));
    CHECK(barenblatt(t, r * (1.0 - 1e-12), 1.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    CHECK(oracle::simpson([&](double x) { return barenblatt(t, x, 1.0); }, -r, r, 2000) ==
          doctest::Approx(1.0).epsilon(1e-8));
    for (double x : {-r, -0.5 * r, 0.0, 0.3 * r, r}) {
      const double c = oracle::simpson([&](double y) { return barenblatt(t, y, 1.0); }, -r, x, 200);
      CHECK(barenblatt_cdf(t, x, 1.0) == doctest::Approx(c).epsilon(1e-10).scale(1.0));
    }
    for (double u : {0.0, 0.01, 0.5, 0.93, 1.0})
      CHECK(barenblatt_cdf(t, barenblatt_quantile(t, u, 1.0), 1.0) == doctest::Approx(u).epsilon(1e-12).scale(1.0));
  }
  CHECK_THROWS_AS(barenblatt(-2.0, 0.0, 1.0), std::invalid_argument);
  // the self-similar map pushes the t = 0 profile onto the one at t
  for (double z : {-1.5, -0.2, 0.9, 2.0})
    CHECK(barenblatt_cdf(1.0, barenblatt_map(1.0, z, 1.0), 1.0) == doctest::Approx(barenblatt_cdf(0.0, z, 1.0)).epsilon(1e-13));
}

TEST_CASE("Keller-Segel second moment") {
  CHECK(ks_second_moment_rate(1.0, 3.0) == 0.0);
  CHECK(ks_second_moment_rate(0.5, 1.0) == 1.0);
  CHECK(ks_second_moment_rate(1.5, 1.0) == -1.0);
  CHECK(ks_second_moment(0.0, 0.5, 0.9) == 0.9);
  CHECK(ks_second_moment(0.5, 1.5, 0.9) == doctest::Approx(0.4));
}

TEST_CASE("finite-difference solver reproduces the OU density") {
  GridSpec g{-10.0, 50.0, 6001};
  FokkerPlanckOptions opt;
  opt.gamma = 8.0;
  opt.dt = 1e-3;
  opt.steps = 1000;
  opt.theta = 0.5;
  const DensityGrid d = fd_fokker_planck([](double x) { return x - 30.0; }, g, gaussian_on(g, 0.0, 1.0), opt);
  REQUIRE(d.values.size() == 2);
  CHECK(d.times.back() == doctest::Approx(1.0));
  const double err = grid_l1(g, d.values.back(), [](double x) { return density_ou(1.0, x, 1.0, 30.0, 8.0); });
  CHECK(err <= 1e-3);
  CHECK(std::abs(d.mass(1) - d.mass(0)) <= 1e-6);
}

TEST_CASE("finite-difference solver is first order in time with backward Euler") {
  GridSpec g{-8.0, 8.0, 1601};
  auto run = [&](double dt) {
    FokkerPlanckOptions opt;
    opt.gamma = 0.5;
    opt.dt = dt;
    opt.steps = static_cast<std::size_t>(std::lround(1.0 / dt));
    return fd_fokker_planck([](double x) { return x - 1.0; }, g, gaussian_on(g, 0.0, 1.0), opt).values.back();
  };
  const auto p1 = run(4e-2), p2 = run(2e-2), p3 = run(1e-2);
  double d12 = 0.0, d23 = 0.0;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    d12 += std::abs(p1[i] - p2[i]);
    d23 += std::abs(p2[i] - p3[i]);
  }
  CHECK(std::log2(d12 / d23) >= 0.9);
}

TEST_CASE("finite-difference solver edge cases") {
  GridSpec g{-6.0, 6.0, 1201};
  auto p0 = gaussian_on(g, 0.5, 0.7);
  FokkerPlanckOptions opt;
  opt.gamma = 0.0;
  opt.steps = 50;
  const DensityGrid d = fd_fokker_planck([](double) { return 0.0; }, g, p0, opt);
  for (std::size_t i = 1; i + 1 < p0.size(); ++i) CHECK(d.values.back()[i] == doctest::Approx(p0[i]).epsilon(1e-13));

  GridSpec wide{-10.0, 10.0, 2001};
  opt.gamma = 1.0;
  opt.steps = 1000;
  opt.record_every = 100;
  const DensityGrid e = fd_fokker_planck([](double x) { return x; }, wide, gaussian_on(wide, 0.0, 1.0), opt);
  CHECK(e.values.size() == 11);
  for (std::size_t k = 0; k < e.values.size(); ++k) CHECK(std::abs(e.mass(k) - e.mass(0)) <= 1e-6);

  GridSpec narrow{-2.0, 2.0, 401};
  opt.gamma = 1.0;
  opt.steps = 100;
  CHECK_THROWS_AS(fd_fokker_planck([](double) { return 0.0; }, narrow, gaussian_on(narrow, 0.0, 1.0), opt), NumericError);
  CHECK_THROWS_AS(fd_fokker_planck([](double) { return 0.0; }, g, std::vector<double>(3, 0.0), opt), std::invalid_argument);
}

TEST_CASE("quantile transport") {
  GridSpec g{-12.0, 12.0, 24001};
  const CDFGrid F0 = CDFGrid::from_density(g, gaussian_on(g, 0.0, 1.0));
  const CDFGrid F1 = CDFGrid::from_density(g, gaussian_on(g, 1.5, 2.0));
  CHECK(F0.F.front() == 0.0);
  CHECK(F0.F.back() == doctest::Approx(1.0).epsilon(1e-8));
  double prev = -1e300;
  for (double z = -3.0; z <= 3.0; z += 0.01) {
    CHECK(std::abs(quantile_transport(F0, F0, z) - z) <= 1e-4);
    CHECK(std::abs(quantile_transport(F0, F1, z) - (1.5 + 2.0 * z)) <= 1e-4);
    const double m = quantile_transport([](double x) { return oracle::Phi(x); }, F1, z);
    CHECK(std::abs(m - (1.5 + 2.0 * z)) <= 1e-4);
    CHECK(m >= prev);
    prev = m;
  }
  const std::size_t before = quantile_clamp_count();
  (void)F1.inverse(0.0);
  CHECK(quantile_clamp_count() == before + 1);
}

TEST_CASE("quantile transport through the FD solver recovers the OU map") {
  GridSpec g{-10.0, 50.0, 6001};
  FokkerPlanckOptions opt;
  opt.gamma = 8.0;
  opt.dt = 1e-3;
  opt.steps = 1000;
  opt.theta = 0.5;
  const DensityGrid d = fd_fokker_planck([](double x) { return x - 30.0; }, g, gaussian_on(g, 0.0, 1.0), opt);
  const CDFGrid Ft = CDFGrid::from_density(g, d.values.back());
  double sup = 0.0;
  for (double z = -3.0; z <= 3.0; z += 0.01)
    sup = std::max(sup, std::abs(quantile_transport(normal_cdf, Ft, z) - map_ou(1.0, z, 1.0, 30.0, 8.0)));
  CHECK(sup <= 1e-3);
}
