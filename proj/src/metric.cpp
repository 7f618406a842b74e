#include "wgf/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "wgf/errors.hpp"
#include "wgf/parallel.hpp"
#include "wgf/quadrature.hpp"

namespace wgf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sign s_i with J_abar_i = s_i (z - b_i) / beta and J_b_i = -s_i a_i on the
// support of neuron i.
double facing_sign(const NetworkParams& p, std::size_t i) {
  return p.facing(i) == Facing::forward ? 1.0 : -1.0;
}

// Fills the full 2K x 2K metric given pair moments (m0, m1, m2) of the
// intersection of the supports of neurons i and j.
template <class PairMoments>
Eigen::MatrixXd assemble_full(const NetworkParams& p, PairMoments&& pair_moments) {
  const std::size_t k = p.size();
  const double inv_beta = 1.0 / p.scale;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * k, 2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    const double si = facing_sign(p, i), bi = p.biases[i], ai = p.slope(i);
    for (std::size_t j = i; j < k; ++j) {
      const double sj = facing_sign(p, j), bj = p.biases[j], aj = p.slope(j);
      const auto [m0, m1, m2] = pair_moments(i, j);
      if (m0 == 0.0) continue;
      const double aa = si * sj * inv_beta * inv_beta * (m2 - (bi + bj) * m1 + bi * bj * m0);
      const double bb = si * sj * ai * aj * m0;
      // E[J_abar_i J_b_j] and E[J_abar_j J_b_i]
      const double ab = -si * sj * aj * inv_beta * (m1 - bi * m0);
      const double ba = -si * sj * ai * inv_beta * (m1 - bj * m0);
      G(i, j) = G(j, i) = aa;
      G(k + i, k + j) = G(k + j, k + i) = bb;
      G(i, k + j) = G(k + j, i) = ab;
      G(j, k + i) = G(k + i, j) = ba;
    }
  }
  return G;
}

Eigen::MatrixXd restrict(const Eigen::MatrixXd& full, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(idx.size(), idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t c = 0; c < idx.size(); ++c) out(r, c) = full(idx[r], idx[c]);
  return out;
}

}  // namespace

std::vector<std::size_t> subset_indices(const NetworkParams& params, ParamSubset subset) {
  const std::size_t k = params.size();
  std::vector<std::size_t> idx;
  if (subset != ParamSubset::b_only)
    for (std::size_t i = 0; i < k; ++i) idx.push_back(i);
  if (subset != ParamSubset::a_only)
    for (std::size_t i = 0; i < k; ++i) idx.push_back(k + i);
  return idx;
}

Eigen::MatrixXd TridiagonalMatrix::dense() const {
  const std::size_t n = diag.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = diag[i];
  for (std::size_t i = 0; i + 1 < n; ++i) m(i, i + 1) = m(i + 1, i) = off[i];
  return m;
}

std::vector<double> TridiagonalMatrix::apply(std::span<const double> x) const {
  const std::size_t n = diag.size();
  if (x.size() != n) throw std::invalid_argument("TridiagonalMatrix::apply: size mismatch");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag[i] * x[i];
    if (i > 0) s += off[i - 1] * x[i - 1];
    if (i + 1 < n) s += off[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

MetricTensor empirical_metric(const NetworkParams& params, std::span<const double> samples,
                              ParamSubset subset) {
  if (samples.empty()) throw std::invalid_argument("empirical_metric: empty sample set");
  const auto idx = subset_indices(params, subset);
  const std::size_t d = idx.size();
  const std::size_t chunks = chunk_count(samples.size());
  std::vector<Eigen::MatrixXd> partial(chunks, Eigen::MatrixXd::Zero(d, d));
  for_chunks(samples.size(), [&](std::size_t c, std::size_t begin, std::size_t end) {
    std::vector<double> jac(params.dim());
    Eigen::VectorXd js(d);
    for (std::size_t l = begin; l < end; ++l) {
      param_jacobian_into(params, samples[l], jac);
      for (std::size_t r = 0; r < d; ++r) js[r] = jac[idx[r]];
      partial[c].selfadjointView<Eigen::Lower>().rankUpdate(js);
    }
  });
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(d, d);
  for (const auto& m : partial) G += m;
  G = G.selfadjointView<Eigen::Lower>();
  G /= static_cast<double>(samples.size());
  return {G};
}

MetricTensor empirical_metric(const NetworkParams& params, const SampleSet& samples,
                              ParamSubset subset) {
  if (samples.empty()) throw std::invalid_argument("empirical_metric: empty sample set");
  const std::size_t k = params.size(), m = samples.size();
  // index support [lo, hi) of every neuron's strict-indicator Jacobian
  std::vector<std::size_t> lo(k), hi(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (params.facing(i) == Facing::forward) {
      lo[i] = samples.upper(params.biases[i]);
      hi[i] = m;
    } else {
      lo[i] = 0;
      hi[i] = samples.lower(params.biases[i]);
    }
  }
  const long double inv_m = 1.0L / static_cast<long double>(m);
  auto pair = [&](std::size_t i, std::size_t j) {
    const auto s = samples.range_sums(std::max(lo[i], lo[j]), std::min(hi[i], hi[j]));
    return std::array<double, 3>{static_cast<double>(s[0] * inv_m), static_cast<double>(s[1] * inv_m),
                                 static_cast<double>(s[2] * inv_m)};
  };
  return {restrict(assemble_full(params, pair), subset_indices(params, subset))};
}

MetricTensor reference_metric(const NetworkParams& params, const ReferenceDensity& ref,
                              ParamSubset subset) {
  const std::size_t k = params.size();
  std::vector<double> lo(k), hi(k);
  for (std::size_t i = 0; i < k; ++i) {
    const bool fwd = params.facing(i) == Facing::forward;
    lo[i] = fwd ? params.biases[i] : -kInf;
    hi[i] = fwd ? kInf : params.biases[i];
  }
  auto pair = [&](std::size_t i, std::size_t j) {
    return ref.moments(std::max(lo[i], lo[j]), std::min(hi[i], hi[j]));
  };
  return {restrict(assemble_full(params, pair), subset_indices(params, subset))};
}

MetricTensor analytic_metric(const NetworkParams& params, const ReferenceDensity& ref) {
  require_monotone_one_sided(params);
  return reference_metric(params, ref, ParamSubset::both);
}

TridiagonalMatrix analytic_inverse_bb(const NetworkParams& params, const ReferenceDensity& ref,
                                      double gap_floor) {
  require_monotone_one_sided(params);
  const std::size_t n = params.size();
  std::vector<double> a(n), gap(n + 1);
  for (std::size_t i = 0; i < n; ++i) a[i] = params.slope(i);
  // gap[i] = F(b_i) - F(b_{i-1}) for i = 1..n-1, gap[n] = 1 - F(b_{n-1})
  for (std::size_t i = 1; i < n; ++i) gap[i] = ref.mass(params.biases[i - 1], params.biases[i]);
  gap[n] = ref.survival(params.biases[n - 1]);
  for (std::size_t i = 1; i <= n; ++i)
    if (!(gap[i] > gap_floor))
      throw NumericError("analytic_inverse_bb: CDF gap " + std::to_string(gap[i]) + " below floor at node " +
                         std::to_string(i));
  TridiagonalMatrix t;
  t.diag.resize(n);
  t.off.resize(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? 1.0 / gap[i] : 0.0;
    t.diag[i] = (left + 1.0 / gap[i + 1]) / (a[i] * a[i]);
    if (i + 1 < n) t.off[i] = -1.0 / (a[i] * a[i + 1] * gap[i + 1]);
  }
  return t;
}

Eigen::VectorXd pinv_solve(const MetricTensor& G, std::span<const double> g, double rel_tol,
                           PinvInfo* info) {
  const Eigen::Index d = G.entries.rows();
  if (G.entries.cols() != d || static_cast<Eigen::Index>(g.size()) != d)
    throw std::invalid_argument("pinv_solve: dimension mismatch");
  const Eigen::Map<const Eigen::VectorXd> rhs(g.data(), d);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  if (d == 0) return x;

  Eigen::VectorXd sigma;
  const double scale = G.entries.cwiseAbs().maxCoeff();
  const bool symmetric =
      (G.entries - G.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(scale, 1e-300);
  if (scale == 0.0) {
    if (info) *info = {kInf, 0};
    return x;
  }
  // For a symmetric matrix the singular values are |lambda| with the
  // eigenvectors (up to sign) as singular vectors.
  if (symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G.entries);
    if (es.info() != Eigen::Success) throw NumericError("pinv_solve: eigendecomposition failed");
    sigma = es.eigenvalues().cwiseAbs();
    const double cutoff = rel_tol * sigma.maxCoeff();
    const Eigen::VectorXd proj = es.eigenvectors().transpose() * rhs;
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(d);
    for (Eigen::Index r = 0; r < d; ++r)
      if (sigma[r] > cutoff) coef[r] = proj[r] / es.eigenvalues()[r];
    x = es.eigenvectors() * coef;
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(G.entries, Eigen::ComputeThinU | Eigen::ComputeThinV);
    sigma = svd.singularValues();
    const double cutoff = rel_tol * sigma.maxCoeff();
    const Eigen::VectorXd proj = svd.matrixU().transpose() * rhs;
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(d);
    for (Eigen::Index r = 0; r < d; ++r)
      if (sigma[r] > cutoff) coef[r] = proj[r] / sigma[r];
    x = svd.matrixV() * coef;
  }
  if (info) {
    const double cutoff = rel_tol * sigma.maxCoeff();
    info->rank = static_cast<std::size_t>((sigma.array() > cutoff).count());
    const double smin = sigma.minCoeff();
    info->condition = smin > 0.0 ? sigma.maxCoeff() / smin : kInf;
  }
  return x;
}

double projection_residual(const NetworkParams& params, const std::function<double(double)>& v,
                           const ReferenceDensity& ref) {
  require_monotone_one_sided(params);
  const std::size_t n = params.size();
  const PiecewiseLinear f = to_piecewise(params);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = std::max(params.biases[i], ref.support_lo());
    const double hi = std::min(i + 1 < n ? params.biases[i + 1] : kInf, ref.support_hi());
    if (!(hi > lo)) continue;
    const auto mom = ref.moments(lo, hi);
    const double m0 = mom[0];
    if (!(m0 > 0.0)) continue;
    const double center = mom[1] / m0;
    // on [b_i, b_{i+1}) the map is affine with the slope of piece i + 1
    const double slope = f.slopes[i + 1], icpt = f.intercepts[i + 1];
    auto g = [&](double z) { return v(slope * z + icpt); };
    const double var = integrate([&](double z) { return (z - center) * (z - center) * ref.pdf(z); }, lo, hi);
    const double alpha = integrate([&](double z) { return g(z) * ref.pdf(z); }, lo, hi) / m0;
    const double beta =
        var > 0.0 ? integrate([&](double z) { return g(z) * (z - center) * ref.pdf(z); }, lo, hi) / var : 0.0;
    total += integrate(
        [&](double z) {
          const double r = g(z) - alpha - beta * (z - center);
          return r * r * ref.pdf(z);
        },
        lo, hi);
  }
  return total;
}

}  // namespace wgf
