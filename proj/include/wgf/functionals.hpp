#pragma once

// Free energies of the pushforward density f#p_r and their Euclidean
// parameter gradients.
//
// Energy terms:
//   potential    E[V(f(z))]
//   interaction  1/2 E_{z != z'}[W(f(z), f(z'))]
//   internal     E[Uhat(p_r(z) / D_z f(z))], Uhat = log (entropy) or p (m = 2)
//
// Every estimator has two overloads: one taking an arbitrary sample span,
// evaluated sample by sample, and one taking a sorted SampleSet, evaluated
// through prefix sums.  Both compute the same quantity.

#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "wgf/network.hpp"
#include "wgf/reference.hpp"
#include "wgf/sample_set.hpp"

namespace wgf {

enum class InternalKind { entropy, porous };

struct PotentialTerm {
  std::function<double(double)> V;
  std::function<double(double)> dV;
};

struct InteractionTerm {
  std::function<double(double, double)> W;
  std::function<double(double, double)> grad1W;  // d/dx W(x, y)
  bool exclude_self = true;
};

struct InternalTerm {
  InternalKind kind = InternalKind::entropy;
};

using EnergyTerm = std::variant<PotentialTerm, InteractionTerm, InternalTerm>;

struct EnergySpec {
  std::vector<EnergyTerm> terms;
  double diffusion_gamma = 1.0;  // weight of entropy terms
  double singular_delta = 2.5e-6;
  /// Shrink delta to half the smallest bias gap when biases come closer
  /// than 2 delta, instead of raising a collision error.
  bool adaptive_delta = false;

  double effective_delta(const NetworkParams& params) const;

  void validate() const;
};

struct GradientDiagnostics {
  std::size_t skipped_pairs = 0;  // singular interaction pairs left out
};

// Convenience constructors.
PotentialTerm quadratic_potential(double mu0, double stiffness = 1.0);
PotentialTerm quartic_potential();
PotentialTerm sextic_potential();
/// W(x, y) = 2 chi log|x - y|.
InteractionTerm log_interaction(double chi);

double energy_value(const NetworkParams& params, const EnergySpec& spec,
                    std::span<const double> samples, const ReferenceDensity& ref,
                    GradientDiagnostics* diag = nullptr);
double energy_value(const NetworkParams& params, const EnergySpec& spec, const SampleSet& samples,
                    const ReferenceDensity& ref, GradientDiagnostics* diag = nullptr);

std::vector<double> grad_potential(const NetworkParams& params, const PotentialTerm& term,
                                   std::span<const double> samples);
std::vector<double> grad_potential(const NetworkParams& params, const PotentialTerm& term,
                                   const SampleSet& samples);

std::vector<double> grad_interaction(const NetworkParams& params, const InteractionTerm& term,
                                     std::span<const double> samples,
                                     GradientDiagnostics* diag = nullptr);
std::vector<double> grad_interaction(const NetworkParams& params, const InteractionTerm& term,
                                     const SampleSet& samples, GradientDiagnostics* diag = nullptr);

/// Weight gradient by Monte Carlo; bias gradient from the one-sided slope
/// jumps D_z f(b -+ delta) at each node.
std::vector<double> grad_internal(const NetworkParams& params, const InternalTerm& term,
                                  std::span<const double> samples, const ReferenceDensity& ref,
                                  double delta);
std::vector<double> grad_internal(const NetworkParams& params, const InternalTerm& term,
                                  const SampleSet& samples, const ReferenceDensity& ref, double delta);

std::vector<double> assemble_gradient(const NetworkParams& params, const EnergySpec& spec,
                                      std::span<const double> samples, const ReferenceDensity& ref,
                                      GradientDiagnostics* diag = nullptr);
std::vector<double> assemble_gradient(const NetworkParams& params, const EnergySpec& spec,
                                      const SampleSet& samples, const ReferenceDensity& ref,
                                      GradientDiagnostics* diag = nullptr);

/// Internal energy integrated exactly over the slope pieces of f (no
/// sampling): sum over pieces of int Uhat(p_r / D) p_r dz.
double internal_energy_quadrature(const NetworkParams& params, InternalKind kind,
                                  const ReferenceDensity& ref);

/// Checks the preconditions of the node formulas: pairwise bias gaps of at
/// least 2 delta (up to roundoff).  Throws NumericError.
void check_bias_separation(const NetworkParams& params, double delta);

}  // namespace wgf
