#include "wgf/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "wgf/errors.hpp"
#include "wgf/quadrature.hpp"
#include "wgf/sample_set.hpp"

namespace wgf {

namespace {

void check_gap(double gap, double floor, std::size_t node) {
  if (!(gap > floor))
    throw NumericError("CDF gap " + std::to_string(gap) + " below floor at node " + std::to_string(node));
}

// gaps[i] = F(b_{i+1}) - F(b_i) for i < n-1, gaps[n-1] = 1 - F(b_{n-1})
std::vector<double> cdf_gaps(const NetworkParams& p, const ReferenceDensity& ref, double floor) {
  const std::size_t n = p.size();
  std::vector<double> gaps(n);
  for (std::size_t i = 0; i + 1 < n; ++i) gaps[i] = ref.mass(p.biases[i], p.biases[i + 1]);
  gaps[n - 1] = ref.survival(p.biases[n - 1]);
  for (std::size_t i = 0; i < n; ++i) check_gap(gaps[i], floor, i + 1);
  return gaps;
}

}  // namespace

void FlowConfig::validate() const {
  if (!(dt >= 0.0)) throw std::invalid_argument("FlowConfig: dt must be nonnegative");
  if (steps < 1) throw std::invalid_argument("FlowConfig: steps must be at least 1");
  if (sample_count < 1) throw std::invalid_argument("FlowConfig: sample_count must be at least 1");
  if (!(pinv_rel_tol > 0.0)) throw std::invalid_argument("FlowConfig: pinv_rel_tol must be positive");
}

NetworkParams euler_step(const NetworkParams& params, std::span<const double> grad, const MetricTensor& G,
                         double h, ParamSubset subset, double rel_tol, PinvInfo* info) {
  if (grad.size() != params.dim()) throw std::invalid_argument("euler_step: gradient length mismatch");
  const auto idx = subset_indices(params, subset);
  if (G.dim() != idx.size()) throw std::invalid_argument("euler_step: metric does not match subset");
  std::vector<double> g(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) g[r] = grad[idx[r]];
  const Eigen::VectorXd dir = pinv_solve(G, g, rel_tol, info);
  std::vector<double> theta = params.flatten();
  for (std::size_t r = 0; r < idx.size(); ++r) theta[idx[r]] -= h * dir[static_cast<Eigen::Index>(r)];
  NetworkParams out = params;
  out.assign(theta);
  return out;
}

TrajectoryRecord run_flow(const NetworkParams& params0, const EnergySpec& spec, const ReferenceDensity& ref,
                          const FlowConfig& config, std::span<const double> samples) {
  config.validate();
  spec.validate();
  params0.validate();
  const bool analytic = config.metric_mode == MetricMode::analytic_gaussian;
  if (analytic && !ref.is_standard_gaussian())
    throw std::invalid_argument("run_flow: analytic metric needs the standard Gaussian reference");
  const bool tridiagonal =
      analytic && params0.layout == Layout::one_sided && config.param_subset == ParamSubset::b_only;

  auto draw = [&](std::size_t step) {
    if (!samples.empty() && step == 0) return SampleSet(std::vector<double>(samples.begin(), samples.end()));
    return SampleSet(ref.sample(config.sample_count, config.seed + step));
  };
  SampleSet particles = draw(0);

  TrajectoryRecord rec;
  std::vector<std::size_t> snaps = config.snapshot_steps;
  std::sort(snaps.begin(), snaps.end());
  auto maybe_snapshot = [&](std::size_t step, const NetworkParams& p) {
    if (std::binary_search(snaps.begin(), snaps.end(), step)) {
      rec.snapshot_steps.push_back(step);
      rec.theta_history.push_back(p);
    }
  };

  NetworkParams theta = params0;
  for (std::size_t step = 0;; ++step) {
    try {
      GradientDiagnostics gd;
      const double e = energy_value(theta, spec, particles, ref, &gd);
      if (!std::isfinite(e)) throw NumericError("energy is not finite");
      rec.times.push_back(static_cast<double>(step) * config.dt);
      rec.energy.push_back(e);
      rec.diagnostics.push_back({min_bias_gap(theta), 0.0, gd.skipped_pairs});
      maybe_snapshot(step, theta);
      if (step == config.steps) break;

      gd = {};
      const std::vector<double> grad = assemble_gradient(theta, spec, particles, ref, &gd);
      PinvInfo info;
      if (tridiagonal) {
        const TridiagonalMatrix inv = analytic_inverse_bb(theta, ref);
        const std::size_t k = theta.size();
        const std::vector<double> dir = inv.apply(std::span<const double>(grad).subspan(k));
        for (std::size_t i = 0; i < k; ++i) theta.biases[i] -= config.dt * dir[i];
        info.condition = std::numeric_limits<double>::quiet_NaN();
      } else {
        const MetricTensor G = analytic ? reference_metric(theta, ref, config.param_subset)
                                        : empirical_metric(theta, particles, config.param_subset);
        theta = euler_step(theta, grad, G, config.dt, config.param_subset, config.pinv_rel_tol, &info);
      }
      const std::vector<double> flat = theta.flatten();
      if (!std::all_of(flat.begin(), flat.end(), [](double x) { return std::isfinite(x); }))
        throw NumericError("parameters are not finite after the update");
      rec.diagnostics.back().condition = info.condition;
      rec.diagnostics.back().skipped_pairs += gd.skipped_pairs;
      if (config.resample) particles = draw(step + 1);
    } catch (const NumericError& err) {
      throw NumericError("step " + std::to_string(step) + ": " + err.what());
    }
  }
  return rec;
}

std::vector<double> potential_flow_rhs(const NetworkParams& params, const std::function<double(double)>& dV,
                                       const ReferenceDensity& ref, Quadrature rule, double gap_floor) {
  require_monotone_one_sided(params);
  const std::size_t n = params.size();
  const auto& b = params.biases;
  const std::vector<double> gaps = cdf_gaps(params, ref, gap_floor);
  const PiecewiseLinear f = to_piecewise(params);
  const double inf = std::numeric_limits<double>::infinity();

  // avg[i]: p_r-average of V'(f) over [b_i, b_{i+1}] (b_{n} = +inf)
  std::vector<double> avg(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = b[i], hi = i + 1 < n ? b[i + 1] : inf;
    if (rule == Quadrature::trapezoid && i + 1 < n) {
      avg[i] = 0.5 * (dV(f(lo)) + dV(f(hi)));
      continue;
    }
    const double slope = f.slopes[i + 1], icpt = f.intercepts[i + 1];
    const double a = std::max(lo, ref.support_lo()), c = std::min(hi, ref.support_hi());
    avg[i] = integrate([&](double z) { return dV(slope * z + icpt) * ref.pdf(z); }, a, c) / gaps[i];
  }
  std::vector<double> bdot(n);
  for (std::size_t i = 0; i < n; ++i) bdot[i] = (avg[i] - (i > 0 ? avg[i - 1] : 0.0)) / params.slope(i);
  return bdot;
}

std::vector<double> entropy_bias_gradient(const NetworkParams& params, const ReferenceDensity& ref) {
  require_monotone_one_sided(params);
  const std::size_t n = params.size();
  std::vector<double> g(n);
  double partial = params.slope(0);
  const double f1 = ref.cdf(params.biases[0]);
  if (!(f1 > 0.0)) throw NumericError("entropy_bias_gradient: F(b_1) underflows");
  g[0] = ref.pdf(params.biases[0]) * (std::log(f1) + 1.0 + std::log(params.slope(0)));
  for (std::size_t i = 1; i < n; ++i) {
    const double next = partial + params.slope(i);
    g[i] = -std::log(partial / next) * ref.pdf(params.biases[i]);
    partial = next;
  }
  return g;
}

std::vector<double> heat_flow_rhs(const NetworkParams& params, const ReferenceDensity& ref, double gap_floor) {
  require_monotone_one_sided(params);
  const std::size_t n = params.size();
  if (n < 2) throw std::invalid_argument("heat_flow_rhs: needs at least two nodes");
  const std::vector<double> gaps = cdf_gaps(params, ref, gap_floor);
  std::vector<double> a(n), L(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = params.slope(i);
  const double f1 = ref.cdf(params.biases[0]);
  if (!(f1 > 0.0)) throw NumericError("heat_flow_rhs: F(b_1) underflows");
  // L[0] carries the boundary node: minus its bias gradient
  L[0] = -ref.pdf(params.biases[0]) * (std::log(f1) + 1.0 + std::log(a[0]));
  double partial = a[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double next = partial + a[i];
    L[i] = std::log(partial / next) * ref.pdf(params.biases[i]);
    partial = next;
  }

  std::vector<double> bdot(n);
  bdot[0] = (L[0] / a[0] - L[1] / a[1]) / (a[0] * gaps[0]);
  for (std::size_t i = 1; i < n; ++i) {
    const double self = L[i] / (a[i] * a[i]);
    bdot[i] = (self - L[i - 1] / (a[i] * a[i - 1])) / gaps[i - 1];
    bdot[i] += i + 1 < n ? (self - L[i + 1] / (a[i] * a[i + 1])) / gaps[i] : self / gaps[i];
  }
  return bdot;
}

double PiecewiseVelocity::operator()(double z) const {
  const std::size_t k = std::upper_bound(knots.begin(), knots.end(), z) - knots.begin();
  return values[k];
}

PiecewiseVelocity map_velocity(const NetworkParams& params, std::span<const double> bdot) {
  const std::size_t k = params.size();
  if (bdot.size() != k) throw std::invalid_argument("map_velocity: bdot length mismatch");
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t l, std::size_t r) { return params.biases[l] < params.biases[r]; });
  // leftmost piece: only backward neurons contribute, +a_i bdot_i each
  double v = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    if (params.facing(i) == Facing::backward) v += params.slope(i) * bdot[i];
  PiecewiseVelocity out;
  out.values.push_back(v);
  for (std::size_t i : order) {
    // crossing b_i switches a forward neuron on and a backward neuron off
    v -= params.slope(i) * bdot[i];
    out.knots.push_back(params.biases[i]);
    out.values.push_back(v);
  }
  return out;
}

}  // namespace wgf
