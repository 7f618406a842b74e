#pragma once

// Neural mapping metric G = E[J J^T] over the parameter Jacobian J of the
// ReLU map, its closed-form pieces, pseudoinverse solves and the projection
// residual of a velocity field onto the Jacobian span.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wgf/network.hpp"
#include "wgf/reference.hpp"
#include "wgf/sample_set.hpp"

namespace wgf {

enum class ParamSubset { a_only, b_only, both };

/// Indices into the flat (abar, b) vector selected by a subset.
std::vector<std::size_t> subset_indices(const NetworkParams& params, ParamSubset subset);

struct MetricTensor {
  Eigen::MatrixXd entries;
  std::size_t dim() const { return static_cast<std::size_t>(entries.rows()); }
};

/// Symmetric tridiagonal matrix; off[i] couples rows i and i + 1.
struct TridiagonalMatrix {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t dim() const { return diag.size(); }
  Eigen::MatrixXd dense() const;
  std::vector<double> apply(std::span<const double> x) const;
};

/// (1/M) sum_l J(z_l) J(z_l)^T by explicit accumulation over the samples.
MetricTensor empirical_metric(const NetworkParams& params, std::span<const double> samples,
                              ParamSubset subset);
/// Same matrix assembled from half-line moment sums of a sorted sample set.
MetricTensor empirical_metric(const NetworkParams& params, const SampleSet& samples,
                              ParamSubset subset);

/// Exact metric E_{p_r}[J J^T] for any layout, from truncated moments of the
/// reference.
MetricTensor reference_metric(const NetworkParams& params, const ReferenceDensity& ref,
                              ParamSubset subset = ParamSubset::both);

/// Exact metric of a monotone one-sided network (sorted biases, positive
/// weights); throws std::invalid_argument otherwise.
MetricTensor analytic_metric(const NetworkParams& params, const ReferenceDensity& ref);

/// Closed-form tridiagonal inverse of the bias block of a monotone one-sided
/// network.  Throws NumericError when a CDF gap or the upper tail mass falls
/// below gap_floor.
TridiagonalMatrix analytic_inverse_bb(const NetworkParams& params, const ReferenceDensity& ref,
                                      double gap_floor = 1e-14);

struct PinvInfo {
  double condition = 0.0;  // largest / smallest singular value (inf if singular)
  std::size_t rank = 0;
};

/// Minimum-norm least-squares solution with singular values below
/// rel_tol * sigma_max discarded.
Eigen::VectorXd pinv_solve(const MetricTensor& G, std::span<const double> g,
                           double rel_tol = 1e-12, PinvInfo* info = nullptr);

/// Squared L2(p_r) distance on [b_1, inf) from v(f(z)) to the span of the
/// parameter Jacobian of a monotone one-sided network.
double projection_residual(const NetworkParams& params, const std::function<double(double)>& v,
                           const ReferenceDensity& ref);

}  // namespace wgf
