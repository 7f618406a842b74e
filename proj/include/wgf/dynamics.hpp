#pragma once

// Forward-Euler natural-gradient flow theta <- theta - h G^+ grad F, and the
// closed-form semi-discrete bias flows of the one-sided network.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wgf/functionals.hpp"
#include "wgf/metric.hpp"
#include "wgf/network.hpp"
#include "wgf/reference.hpp"

namespace wgf {

enum class MetricMode { empirical, analytic_gaussian };

struct FlowConfig {
  double dt = 1e-3;
  std::size_t steps = 1000;
  MetricMode metric_mode = MetricMode::empirical;
  ParamSubset param_subset = ParamSubset::both;
  double pinv_rel_tol = 1e-12;
  std::size_t sample_count = 100000;
  std::uint64_t seed = 0;
  /// Draw a fresh particle set every step instead of freezing the initial one.
  bool resample = false;
  /// Steps (0..steps) at which theta is stored in the record.
  std::vector<std::size_t> snapshot_steps;

  void validate() const;
};

struct StepDiagnostics {
  double min_bias_gap = 0.0;
  double condition = 0.0;
  std::size_t skipped_pairs = 0;
};

struct TrajectoryRecord {
  std::vector<double> times;   // t_k = k h, k = 0..L
  std::vector<double> energy;  // energy at t_k
  std::vector<StepDiagnostics> diagnostics;  // state at t_k (condition of the step taken from t_k)
  std::vector<std::size_t> snapshot_steps;
  std::vector<NetworkParams> theta_history;
};

/// Updates the subset coordinates by -h G^+ grad; `grad` has full length
/// dim(), G has the subset dimension.
NetworkParams euler_step(const NetworkParams& params, std::span<const double> grad, const MetricTensor& G,
                         double h, ParamSubset subset, double rel_tol = 1e-12, PinvInfo* info = nullptr);

/// Runs Algorithm-style Euler steps.  `samples` overrides the particle set
/// drawn from ref (it is still frozen unless config.resample).
TrajectoryRecord run_flow(const NetworkParams& params0, const EnergySpec& spec, const ReferenceDensity& ref,
                          const FlowConfig& config, std::span<const double> samples = {});

enum class Quadrature { trapezoid, exact };

/// Bias velocity of the projected potential flow of a monotone one-sided
/// network.  `trapezoid` evaluates interval averages of V' o f with the
/// trapezoid rule (the tail interval [b_N, inf) by quadrature); `exact`
/// integrates every interval by adaptive quadrature.
std::vector<double> potential_flow_rhs(const NetworkParams& params, const std::function<double(double)>& dV,
                                       const ReferenceDensity& ref, Quadrature rule = Quadrature::trapezoid,
                                       double gap_floor = 1e-14);

/// Bias velocity of the projected entropy flow (heat equation) of a monotone
/// one-sided network.
std::vector<double> heat_flow_rhs(const NetworkParams& params, const ReferenceDensity& ref,
                                  double gap_floor = 1e-14);

/// Bias gradient of the entropy of a monotone one-sided network, counting
/// the atom F(b_1) at f = 0.  Interior nodes: -p(b_i) log(S_{i-1}/S_i) with
/// S_i the partial slope sums.  Node 1: p(b_1)(log F(b_1) + 1 + log a_1),
/// which leaves out the -p(b_1) log p_r(b_1) term of the moving lower limit.
std::vector<double> entropy_bias_gradient(const NetworkParams& params, const ReferenceDensity& ref);

/// Piecewise-constant map velocity d/dt f(z) = bdot . d_b f(z).
struct PiecewiseVelocity {
  std::vector<double> knots;   // sorted biases
  std::vector<double> values;  // knots.size() + 1 pieces, piece 0 left of knots[0]

  double operator()(double z) const;
};

PiecewiseVelocity map_velocity(const NetworkParams& params, std::span<const double> bdot);

}  // namespace wgf
