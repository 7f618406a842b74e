#pragma once

// Two-layer ReLU pushforward map
//
//   f(theta, z) = sum_{i<N} a_i relu(z - b_i) + sum_{i>=N} a_i relu(b_i - z),
//
// with slopes stored in rescaled form a_i = abar_i / beta.  The symmetric
// layout has 2N neurons (N forward-facing, N backward-facing); the one-sided
// layout has N forward-facing neurons only and is the monotone model on which
// the closed-form metric results hold.
//
// Parameter vectors are always ordered (abar_0..abar_{K-1}, b_0..b_{K-1}) where
// K is the neuron count of the layout.

#include <cstddef>
#include <span>
#include <vector>

namespace wgf {

enum class Layout { symmetric, one_sided };
enum class Facing { forward, backward };

struct NetworkParams {
  int neuron_count = 0;          // N
  std::vector<double> weights;   // abar, length K
  std::vector<double> biases;    // b, length K
  double scale = 1.0;            // beta
  double init_offset = 5e-6;     // epsilon
  Layout layout = Layout::symmetric;

  /// Number of neurons K (2N symmetric, N one-sided).
  std::size_t size() const { return weights.size(); }
  /// Number of trainable coordinates, 2K.
  std::size_t dim() const { return 2 * weights.size(); }

  Facing facing(std::size_t i) const {
    return (layout == Layout::one_sided || static_cast<int>(i) < neuron_count) ? Facing::forward
                                                                               : Facing::backward;
  }
  /// Effective slope a_i = abar_i / beta.
  double slope(std::size_t i) const { return weights[i] / scale; }

  /// Throws std::invalid_argument when the layout invariants are broken.
  void validate() const;

  /// Flat parameter vector (abar..., b...).
  std::vector<double> flatten() const;
  /// Inverse of flatten(); keeps layout, scale and offset.
  void assign(std::span<const double> theta);
};

/// Identity-approximating symmetric network: abar = +-beta/N, forward biases
/// linspace(-B, B, N), backward biases shifted by eps.
NetworkParams init_identity(int n, double half_width, double eps, double beta);

/// One-sided network from effective slopes and biases.
NetworkParams make_one_sided(std::vector<double> slopes, std::vector<double> biases,
                             double beta = 1.0);

/// True when the one-sided closed-form regime holds: one-sided layout,
/// strictly increasing biases, strictly positive slopes.
bool is_monotone_one_sided(const NetworkParams& params);
/// Throws std::invalid_argument unless is_monotone_one_sided().
void require_monotone_one_sided(const NetworkParams& params);

double forward(const NetworkParams& params, double z);

/// Piecewise-constant slope D_z f.  Node convention: a forward neuron counts
/// from z >= b_i on, a backward neuron up to z <= b_i.
double z_derivative(const NetworkParams& params, double z);

/// d f / d(abar, b) at z; length dim().  Nodes are excluded (strict
/// inequalities): at z == b_i the forward neuron takes its left limit and the
/// backward neuron its right limit.
std::vector<double> param_jacobian(const NetworkParams& params, double z);

/// Writes param_jacobian into a caller buffer of length dim().
void param_jacobian_into(const NetworkParams& params, double z, std::span<double> out);

/// Smallest pairwise distance between biases (infinity for K < 2).
double min_bias_gap(const NetworkParams& params);

/// Sorted-breakpoint representation of f: on [knots[k], knots[k+1]) the map
/// is slope[k+1] * z + intercept[k+1]; piece 0 covers (-inf, knots[0]).
struct PiecewiseLinear {
  std::vector<double> knots;
  std::vector<double> slopes;      // knots.size() + 1 entries
  std::vector<double> intercepts;  // knots.size() + 1 entries

  std::size_t piece_of(double z) const;
  double operator()(double z) const {
    const std::size_t k = piece_of(z);
    return slopes[k] * z + intercepts[k];
  }
};

PiecewiseLinear to_piecewise(const NetworkParams& params);

/// Evaluates f and D_z f at every (ascending) sample in one sweep.
void evaluate_sorted(const NetworkParams& params, std::span<const double> sorted_z,
                     std::span<double> values, std::span<double> slopes);

}  // namespace wgf
