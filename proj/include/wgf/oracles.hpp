#pragma once

// Ground-truth transport maps, densities and moments, a finite-difference
// Fokker–Planck solver, and quantile-based map extraction.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace wgf {

// Linear transport x' = -V'(x) with V = (x - mu0)^2 / 2.
double map_quadratic(double t, double z, double mu0);
// V = (x - 1)^4 / 4 - (x - 1)^2 / 2.
double map_quartic(double t, double z);
// V = (x - 4)^6 / 6.
double map_sextic(double t, double z);

// Ornstein–Uhlenbeck: p_t = gamma0 ((x - mu0) p)_x + D p_xx from N(0, 1).
double ou_mean(double t, double gamma0, double mu0);
double ou_variance(double t, double gamma0, double D);
double map_ou(double t, double z, double gamma0, double mu0, double D);
double density_ou(double t, double x, double gamma0, double mu0, double D);

// Barenblatt profile of p_t = (p^2)_xx, started at time t0.
double barenblatt(double t, double x, double t0);
double barenblatt_cdf(double t, double x, double t0);
double barenblatt_quantile(double t, double u, double t0);
/// Support half-width 3^{2/3} (t0 + t)^{1/3}.
double barenblatt_radius(double t, double t0);
/// Monotone map from the t = 0 profile to the profile at t.
double barenblatt_map(double t, double z, double t0);

/// d/dt E[x^2] for the modified Keller–Segel model, scaled by m2_0.
double ks_second_moment_rate(double chi, double m2_0);
/// Second moment along the exact flow: m2_0 + 2 (1 - chi) t.
double ks_second_moment(double t, double chi, double m2_0);

struct GridSpec {
  double x_min = -6.0;
  double x_max = 6.0;
  std::size_t n_points = (1u << 14) + 1;

  double dx() const { return (x_max - x_min) / static_cast<double>(n_points - 1); }
  double x(std::size_t i) const { return x_min + dx() * static_cast<double>(i); }
};

/// Grid density snapshots; values[k] is the density at times[k].
struct DensityGrid {
  GridSpec grid;
  double dt = 0.0;
  std::size_t n_steps = 0;
  std::vector<double> times;
  std::vector<std::vector<double>> values;

  double mass(std::size_t snapshot) const;
};

/// Nondecreasing CDF on grid nodes.
struct CDFGrid {
  std::vector<double> x;
  std::vector<double> F;

  static CDFGrid from_density(const GridSpec& grid, std::span<const double> density);
  double operator()(double z) const;
  /// Piecewise-linear inverse; u is clamped to [1e-12, 1 - 1e-12].
  double inverse(double u) const;
};

struct FokkerPlanckOptions {
  double gamma = 1.0;
  double dt = 1e-3;
  std::size_t steps = 1000;
  /// Snapshot every `record_every` steps (0 records only the initial and final state).
  std::size_t record_every = 0;
  /// Time weighting: 1 = backward Euler, 0.5 = Crank–Nicolson.
  double theta = 1.0;
  /// Abort when boundary density exceeds this.
  double boundary_tol = 1e-12;
};

/// Centered-difference solve of p_t = (p V')_x + gamma p_xx with zero
/// Dirichlet boundaries.
DensityGrid fd_fokker_planck(const std::function<double(double)>& dV, const GridSpec& grid,
                             std::span<const double> p0, const FokkerPlanckOptions& opts);

/// Monotone transport F_t^{-1}(F_0(z)).
double quantile_transport(const std::function<double(double)>& F0, const CDFGrid& Ft, double z);
double quantile_transport(const CDFGrid& F0, const CDFGrid& Ft, double z);

/// Number of quantile queries clamped into [1e-12, 1 - 1e-12] so far (process-wide).
std::size_t quantile_clamp_count();

}  // namespace wgf
