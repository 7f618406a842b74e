#include "wgf/oracles.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "wgf/errors.hpp"
#include "wgf/reference.hpp"

namespace wgf {

namespace {

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

std::atomic<std::size_t> g_clamps{0};

const double kBarenblattC = std::cbrt(3.0) / 4.0;

}  // namespace

double map_quadratic(double t, double z, double mu0) { return mu0 + std::exp(-t) * (z - mu0); }

double map_quartic(double t, double z) {
  const double d = z - 1.0;
  if (d == 0.0) return 1.0;
  return sgn(d) * std::exp(t) / std::sqrt(1.0 / (d * d) + std::expm1(2.0 * t)) + 1.0;
}

double map_sextic(double t, double z) {
  const double d = z - 4.0;
  if (d == 0.0) return 4.0;
  const double d2 = d * d;
  return 4.0 + sgn(d) / std::sqrt(2.0 * std::sqrt(1.0 / (4.0 * d2 * d2) + t));
}

double ou_mean(double t, double gamma0, double mu0) { return -mu0 * std::expm1(-gamma0 * t); }

double ou_variance(double t, double gamma0, double D) {
  return std::exp(-2.0 * gamma0 * t) - D * std::expm1(-2.0 * gamma0 * t) / gamma0;
}

double map_ou(double t, double z, double gamma0, double mu0, double D) {
  return ou_mean(t, gamma0, mu0) + z * std::sqrt(ou_variance(t, gamma0, D));
}

double density_ou(double t, double x, double gamma0, double mu0, double D) {
  const double sd = std::sqrt(ou_variance(t, gamma0, D));
  return normal_pdf((x - ou_mean(t, gamma0, mu0)) / sd) / sd;
}

double barenblatt_radius(double t, double t0) {
  return std::cbrt(9.0) * std::cbrt(t0 + t);
}

double barenblatt(double t, double x, double t0) {
  const double T = t0 + t;
  if (!(T > 0.0)) throw std::invalid_argument("barenblatt: t0 + t must be positive");
  const double s = std::cbrt(T);
  const double v = kBarenblattC - x * x / (12.0 * s * s);
  return v > 0.0 ? v / s : 0.0;
}

double barenblatt_cdf(double t, double x, double t0) {
  const double R = barenblatt_radius(t, t0);
  if (x <= -R) return 0.0;
  if (x >= R) return 1.0;
  const double y = x / R;
  return (2.0 + 3.0 * y - y * y * y) / 4.0;
}

double barenblatt_quantile(double t, double u, double t0) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("barenblatt_quantile: u outside [0, 1]");
  // y^3 - 3y + (4u - 2) = 0 on [-1, 1] via y = 2 cos(phi)
  const double phi = (2.0 * std::numbers::pi - std::acos(std::clamp(1.0 - 2.0 * u, -1.0, 1.0))) / 3.0;
  const double y = std::clamp(2.0 * std::cos(phi), -1.0, 1.0);
  return y * barenblatt_radius(t, t0);
}

double barenblatt_map(double t, double z, double t0) { return z * std::cbrt((t0 + t) / t0); }

double ks_second_moment_rate(double chi, double m2_0) { return 2.0 * (1.0 - chi) * m2_0; }

double ks_second_moment(double t, double chi, double m2_0) {
  return m2_0 + 2.0 * (1.0 - chi) * t;
}

double DensityGrid::mass(std::size_t snapshot) const {
  const auto& p = values.at(snapshot);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    s += (i == 0 || i + 1 == p.size()) ? 0.5 * p[i] : p[i];
  return s * grid.dx();
}

CDFGrid CDFGrid::from_density(const GridSpec& grid, std::span<const double> density) {
  if (density.size() != grid.n_points || grid.n_points < 2)
    throw std::invalid_argument("CDFGrid: density does not match grid");
  CDFGrid c;
  c.x.resize(grid.n_points);
  c.F.resize(grid.n_points);
  const double dx = grid.dx();
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    c.x[i] = grid.x(i);
    if (i > 0) acc += 0.5 * dx * (std::max(density[i - 1], 0.0) + std::max(density[i], 0.0));
    c.F[i] = acc;
  }
  if (!(acc > 0.0)) throw NumericError("CDFGrid: density has no mass");
  for (double& f : c.F) f /= acc;
  return c;
}

double CDFGrid::operator()(double z) const {
  if (z <= x.front()) return 0.0;
  if (z >= x.back()) return 1.0;
  const std::size_t k = std::upper_bound(x.begin(), x.end(), z) - x.begin();
  const double w = (z - x[k - 1]) / (x[k] - x[k - 1]);
  return F[k - 1] + w * (F[k] - F[k - 1]);
}

double CDFGrid::inverse(double u) const {
  constexpr double lo = 1e-12, hi = 1.0 - 1e-12;
  if (u < lo || u > hi) {
    ++g_clamps;
    u = std::clamp(u, lo, hi);
  }
  // first node with F >= u; flat runs collapse onto their left end
  const std::size_t k = std::lower_bound(F.begin(), F.end(), u) - F.begin();
  if (k == 0) return x.front();
  if (k >= F.size()) return x.back();
  const double dF = F[k] - F[k - 1];
  if (!(dF > 0.0)) return x[k];
  return x[k - 1] + (u - F[k - 1]) / dF * (x[k] - x[k - 1]);
}

std::size_t quantile_clamp_count() { return g_clamps.load(); }

double quantile_transport(const std::function<double(double)>& F0, const CDFGrid& Ft, double z) {
  return Ft.inverse(F0(z));
}

double quantile_transport(const CDFGrid& F0, const CDFGrid& Ft, double z) {
  return Ft.inverse(F0(z));
}

DensityGrid fd_fokker_planck(const std::function<double(double)>& dV, const GridSpec& grid,
                             std::span<const double> p0, const FokkerPlanckOptions& opts) {
  const std::size_t n = grid.n_points;
  if (n < 3 || p0.size() != n) throw std::invalid_argument("fd_fokker_planck: p0 does not match grid");
  if (!(opts.dt > 0.0) || opts.gamma < 0.0 || opts.theta < 0.0 || opts.theta > 1.0)
    throw std::invalid_argument("fd_fokker_planck: bad options");
  const double dx = grid.dx();
  const double diff = opts.gamma / (dx * dx);
  const double adv = 1.0 / (2.0 * dx);

  std::vector<double> drift(n);
  for (std::size_t i = 0; i < n; ++i) drift[i] = dV(grid.x(i));

  // (L p)_i = lo_i p_{i-1} + di p_i + up_i p_{i+1} on interior nodes
  std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    lo[i] = diff - adv * drift[i - 1];
    di[i] = -2.0 * diff;
    up[i] = diff + adv * drift[i + 1];
  }

  DensityGrid out;
  out.grid = grid;
  out.dt = opts.dt;
  out.n_steps = opts.steps;
  std::vector<double> p(p0.begin(), p0.end());
  p.front() = p.back() = 0.0;
  out.times.push_back(0.0);
  out.values.push_back(p);

  const double a = opts.theta * opts.dt, b = (1.0 - opts.theta) * opts.dt;
  std::vector<double> rhs(n), cp(n), dp(n);
  for (std::size_t step = 1; step <= opts.steps; ++step) {
    for (std::size_t i = 1; i + 1 < n; ++i)
      rhs[i] = p[i] + b * (lo[i] * p[i - 1] + di[i] * p[i] + up[i] * p[i + 1]);
    // Thomas sweep on (I - a L) over interior nodes
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double l = -a * lo[i], d = 1.0 - a * di[i], u = -a * up[i];
      const double denom = i == 1 ? d : d - l * cp[i - 1];
      if (!(std::abs(denom) > 1e-300)) throw NumericError("fd_fokker_planck: tridiagonal solve failed");
      cp[i] = u / denom;
      dp[i] = (rhs[i] - (i == 1 ? 0.0 : l * dp[i - 1])) / denom;
    }
    p[n - 2] = dp[n - 2];
    for (std::size_t i = n - 2; i-- > 1;) p[i] = dp[i] - cp[i] * p[i + 1];
    if (!std::isfinite(p[n / 2])) throw NumericError("fd_fokker_planck: solution diverged");
    if (std::abs(p[1]) > opts.boundary_tol || std::abs(p[n - 2]) > opts.boundary_tol)
      throw NumericError("fd_fokker_planck: density reached the grid boundary at t = " +
                         std::to_string(step * opts.dt));
    const bool record = opts.record_every > 0 ? step % opts.record_every == 0 : step == opts.steps;
    if (record) {
      out.times.push_back(step * opts.dt);
      out.values.push_back(p);
    }
  }
  return out;
}

}  // namespace wgf
