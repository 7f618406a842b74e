#include "wgf/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace wgf {

namespace {

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

void NetworkParams::validate() const {
  if (weights.size() != biases.size()) throw std::invalid_argument("weights/biases length mismatch");
  if (neuron_count < 1) throw std::invalid_argument("neuron_count must be positive");
  const std::size_t expect =
      layout == Layout::symmetric ? 2 * static_cast<std::size_t>(neuron_count)
                                  : static_cast<std::size_t>(neuron_count);
  if (weights.size() != expect) throw std::invalid_argument("parameter length does not match layout");
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
  if (!(init_offset > 0.0)) throw std::invalid_argument("init_offset must be positive");
}

std::vector<double> NetworkParams::flatten() const {
  std::vector<double> theta(weights);
  theta.insert(theta.end(), biases.begin(), biases.end());
  return theta;
}

void NetworkParams::assign(std::span<const double> theta) {
  if (theta.size() != dim()) throw std::invalid_argument("theta length mismatch");
  const std::size_t k = size();
  std::copy(theta.begin(), theta.begin() + k, weights.begin());
  std::copy(theta.begin() + k, theta.end(), biases.begin());
}

NetworkParams init_identity(int n, double half_width, double eps, double beta) {
  if (n < 2) throw std::invalid_argument("init_identity: N must be at least 2");
  if (!(half_width > 0.0) || !(eps > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("init_identity: B, eps and beta must be positive");
  NetworkParams p;
  p.neuron_count = n;
  p.scale = beta;
  p.init_offset = eps;
  p.layout = Layout::symmetric;
  p.weights.assign(2 * n, 0.0);
  p.biases.assign(2 * n, 0.0);
  const double w = beta / n;
  for (int i = 0; i < n; ++i) {
    // linspace(-B, B, n) with exact endpoints
    const double b = i == n - 1 ? half_width : -half_width + 2.0 * half_width * i / (n - 1);
    p.weights[i] = w;
    p.weights[n + i] = -w;
    p.biases[i] = b;
    p.biases[n + i] = b + eps;
  }
  return p;
}

NetworkParams make_one_sided(std::vector<double> slopes, std::vector<double> biases, double beta) {
  if (slopes.size() != biases.size() || slopes.empty())
    throw std::invalid_argument("make_one_sided: slopes and biases must be nonempty and equal length");
  if (!(beta > 0.0)) throw std::invalid_argument("make_one_sided: beta must be positive");
  NetworkParams p;
  p.neuron_count = static_cast<int>(slopes.size());
  p.layout = Layout::one_sided;
  p.scale = beta;
  p.weights = std::move(slopes);
  for (double& w : p.weights) w *= beta;
  p.biases = std::move(biases);
  return p;
}

bool is_monotone_one_sided(const NetworkParams& params) {
  if (params.layout != Layout::one_sided) return false;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!(params.weights[i] > 0.0)) return false;
    if (i > 0 && !(params.biases[i] > params.biases[i - 1])) return false;
  }
  return true;
}

void require_monotone_one_sided(const NetworkParams& params) {
  if (params.layout != Layout::one_sided)
    throw std::invalid_argument("closed-form path needs a one-sided network");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!(params.weights[i] > 0.0)) throw std::invalid_argument("closed-form path needs positive weights");
    if (i > 0 && !(params.biases[i] > params.biases[i - 1]))
      throw std::invalid_argument("closed-form path needs strictly increasing biases");
  }
}

double forward(const NetworkParams& params, double z) {
  double f = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double a = params.slope(i);
    f += params.facing(i) == Facing::forward ? a * relu(z - params.biases[i])
                                             : a * relu(params.biases[i] - z);
  }
  return f;
}

double z_derivative(const NetworkParams& params, double z) {
  double d = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double b = params.biases[i];
    if (params.facing(i) == Facing::forward) {
      if (b <= z) d += params.slope(i);
    } else if (b >= z) {
      d -= params.slope(i);
    }
  }
  return d;
}

void param_jacobian_into(const NetworkParams& params, double z, std::span<double> out) {
  const std::size_t k = params.size();
  if (out.size() != 2 * k) throw std::invalid_argument("param_jacobian: output length mismatch");
  const double inv_beta = 1.0 / params.scale;
  for (std::size_t i = 0; i < k; ++i) {
    const double b = params.biases[i];
    if (params.facing(i) == Facing::forward) {
      const bool on = z > b;
      out[i] = on ? (z - b) * inv_beta : 0.0;
      out[k + i] = on ? -params.slope(i) : 0.0;
    } else {
      const bool on = z < b;
      out[i] = on ? (b - z) * inv_beta : 0.0;
      out[k + i] = on ? params.slope(i) : 0.0;
    }
  }
}

std::vector<double> param_jacobian(const NetworkParams& params, double z) {
  std::vector<double> j(params.dim());
  param_jacobian_into(params, z, j);
  return j;
}

double min_bias_gap(const NetworkParams& params) {
  if (params.size() < 2) return std::numeric_limits<double>::infinity();
  std::vector<double> b(params.biases);
  std::sort(b.begin(), b.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < b.size(); ++i) gap = std::min(gap, b[i] - b[i - 1]);
  return gap;
}

std::size_t PiecewiseLinear::piece_of(double z) const {
  return static_cast<std::size_t>(std::upper_bound(knots.begin(), knots.end(), z) - knots.begin());
}

PiecewiseLinear to_piecewise(const NetworkParams& params) {
  const std::size_t k = params.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t l, std::size_t r) { return params.biases[l] < params.biases[r]; });

  // Leftmost piece: only backward neurons are active, f = sum a_i (b_i - z).
  double slope = 0.0, icpt = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (params.facing(i) == Facing::backward) {
      slope -= params.slope(i);
      icpt += params.slope(i) * params.biases[i];
    }
  }
  PiecewiseLinear pl;
  pl.knots.reserve(k);
  pl.slopes.reserve(k + 1);
  pl.intercepts.reserve(k + 1);
  pl.slopes.push_back(slope);
  pl.intercepts.push_back(icpt);
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t i = order[r];
    const double a = params.slope(i), b = params.biases[i];
    // a forward neuron switching on and a backward neuron switching off
    // change the piece identically
    slope += a;
    icpt -= a * b;
    pl.knots.push_back(b);
    pl.slopes.push_back(slope);
    pl.intercepts.push_back(icpt);
  }
  return pl;
}

void evaluate_sorted(const NetworkParams& params, std::span<const double> sorted_z,
                     std::span<double> values, std::span<double> slopes) {
  const PiecewiseLinear pl = to_piecewise(params);
  std::size_t piece = 0;
  const std::size_t nk = pl.knots.size();
  for (std::size_t l = 0; l < sorted_z.size(); ++l) {
    const double z = sorted_z[l];
    while (piece < nk && pl.knots[piece] <= z) ++piece;
    if (!values.empty()) values[l] = pl.slopes[piece] * z + pl.intercepts[piece];
    if (!slopes.empty()) slopes[l] = pl.slopes[piece];
  }
}

}  // namespace wgf
