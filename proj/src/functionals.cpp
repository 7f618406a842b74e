#include "wgf/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "wgf/errors.hpp"
#include "wgf/parallel.hpp"
#include "wgf/quadrature.hpp"

namespace wgf {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double facing_sign(const NetworkParams& p, std::size_t i) {
  return p.facing(i) == Facing::forward ? 1.0 : -1.0;
}

// f and D_z f at every sample.
struct MapValues {
  std::vector<double> f, d;
};

MapValues evaluate(const NetworkParams& params, std::span<const double> samples) {
  MapValues mv{std::vector<double>(samples.size()), std::vector<double>(samples.size())};
  for_chunks(samples.size(), [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t l = b; l < e; ++l) {
      mv.f[l] = forward(params, samples[l]);
      mv.d[l] = z_derivative(params, samples[l]);
    }
  });
  return mv;
}

MapValues evaluate(const NetworkParams& params, const SampleSet& samples) {
  MapValues mv{std::vector<double>(samples.size()), std::vector<double>(samples.size())};
  evaluate_sorted(params, samples.values(), mv.f, mv.d);
  return mv;
}

// Chunked sum with a fixed reduction order.
template <class F>
double chunked_sum(std::size_t n, F&& term) {
  std::vector<double> part(chunk_count(n), 0.0);
  for_chunks(n, [&](std::size_t c, std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t l = b; l < e; ++l) s += term(l);
    part[c] = s;
  });
  return std::accumulate(part.begin(), part.end(), 0.0);
}

// (1/M) sum_l c_l J(z_l), sample by sample.
std::vector<double> weighted_jacobian_direct(const NetworkParams& params, std::span<const double> samples,
                                             std::span<const double> c) {
  const std::size_t dim = params.dim();
  std::vector<std::vector<double>> part(chunk_count(samples.size()), std::vector<double>(dim, 0.0));
  for_chunks(samples.size(), [&](std::size_t ch, std::size_t b, std::size_t e) {
    std::vector<double> jac(dim);
    for (std::size_t l = b; l < e; ++l) {
      if (c[l] == 0.0) continue;
      param_jacobian_into(params, samples[l], jac);
      for (std::size_t r = 0; r < dim; ++r) part[ch][r] += c[l] * jac[r];
    }
  });
  std::vector<double> g(dim, 0.0);
  for (const auto& p : part)
    for (std::size_t r = 0; r < dim; ++r) g[r] += p[r];
  for (double& x : g) x /= static_cast<double>(samples.size());
  return g;
}

// (1/M) sum_l c_l J(z_l) from half-line prefix sums.
std::vector<double> weighted_jacobian_fast(const NetworkParams& params, const SampleSet& samples,
                                           std::span<const double> c) {
  const std::size_t k = params.size(), m = samples.size();
  const WeightedPrefix pre(samples, c);
  std::vector<double> g(2 * k);
  const long double inv_m = 1.0L / static_cast<long double>(m);
  for (std::size_t i = 0; i < k; ++i) {
    const double b = params.biases[i], s = facing_sign(params, i);
    const auto [c0, c1] = params.facing(i) == Facing::forward ? pre.range_sums(samples.upper(b), m)
                                                              : pre.range_sums(0, samples.lower(b));
    g[i] = static_cast<double>(s * (c1 - b * c0) * inv_m) / params.scale;
    g[k + i] = static_cast<double>(-s * params.slope(i) * c0 * inv_m);
  }
  return g;
}

// Per-particle interaction weight c_k = norm * sum_{l != k} grad1W(x_k, x_l)
// with norm = 1/(M-1) (self excluded) or 1/M.
std::vector<double> interaction_weights(const InteractionTerm& term, std::span<const double> x,
                                        std::size_t& skipped) {
  const std::size_t m = x.size();
  if (term.exclude_self && m < 2) throw std::invalid_argument("interaction: need at least 2 samples");
  const double norm = 1.0 / static_cast<double>(term.exclude_self ? m - 1 : m);
  std::vector<double> c(m, 0.0);
  std::vector<std::size_t> skips(chunk_count(m), 0);
  for_chunks(m, [&](std::size_t ch, std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      double s = 0.0;
      for (std::size_t l = 0; l < m; ++l) {
        if (l == k && term.exclude_self) continue;
        const double g = term.grad1W(x[k], x[l]);
        if (!std::isfinite(g)) {
          ++skips[ch];
          continue;
        }
        s += g;
      }
      c[k] = s * norm;
    }
  });
  skipped += std::accumulate(skips.begin(), skips.end(), std::size_t{0});
  return c;
}

double interaction_energy(const InteractionTerm& term, std::span<const double> x, std::size_t& skipped) {
  const std::size_t m = x.size();
  if (term.exclude_self && m < 2) throw std::invalid_argument("interaction: need at least 2 samples");
  const double pairs = term.exclude_self ? static_cast<double>(m) * (m - 1) : static_cast<double>(m) * m;
  std::vector<std::size_t> skips(chunk_count(m), 0);
  std::vector<double> part(chunk_count(m), 0.0);
  for_chunks(m, [&](std::size_t ch, std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t k = b; k < e; ++k)
      for (std::size_t l = 0; l < m; ++l) {
        if (l == k && term.exclude_self) continue;
        const double w = term.W(x[k], x[l]);
        if (!std::isfinite(w)) {
          ++skips[ch];
          continue;
        }
        s += w;
      }
    part[ch] = s;
  });
  skipped += std::accumulate(skips.begin(), skips.end(), std::size_t{0});
  return 0.5 * std::accumulate(part.begin(), part.end(), 0.0) / pairs;
}

double uhat(InternalKind kind, double p) { return kind == InternalKind::entropy ? std::log(p) : p; }

void require_positive_slope(double d, double z) {
  if (!(d > 0.0))
    throw NumericError("nonpositive map slope " + std::to_string(d) + " at z = " + std::to_string(z));
}

// Weight of d(D_z f)/d(abar) in the internal-energy gradient:
// Uhat'(p/D) * (-p / D^2).
double internal_weight(InternalKind kind, double p, double d) {
  return kind == InternalKind::entropy ? -1.0 / d : -p / (d * d);
}

std::vector<double> internal_weights(const NetworkParams&, InternalKind kind, std::span<const double> z,
                                     const MapValues& mv, const ReferenceDensity& ref) {
  std::vector<double> w(z.size());
  for_chunks(z.size(), [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t l = b; l < e; ++l) {
      require_positive_slope(mv.d[l], z[l]);
      w[l] = internal_weight(kind, ref.pdf(z[l]), mv.d[l]);
    }
  });
  return w;
}

// Bias components from the slope jump at each node.
void internal_bias_gradient(const NetworkParams& params, InternalKind kind, const ReferenceDensity& ref,
                            double delta, double z_lo, double z_hi, std::span<double> gb) {
  check_bias_separation(params, delta);
  for (std::size_t j = 0; j < params.size(); ++j) {
    const double b = params.biases[j];
    const double p = ref.pdf(b);
    if (p == 0.0 || b < z_lo || b > z_hi) {
      gb[j] = 0.0;
      continue;
    }
    // (slope without neuron j, slope with neuron j) on either side of b_j
    double without, with;
    if (params.facing(j) == Facing::forward) {
      without = z_derivative(params, b - delta);
      with = z_derivative(params, b);
    } else {
      without = z_derivative(params, b + delta);
      with = z_derivative(params, b);
    }
    const double s = facing_sign(params, j);
    if (kind == InternalKind::entropy) {
      require_positive_slope(without, b);
      require_positive_slope(with, b);
      gb[j] = -s * p * std::log(without / with);
    } else {
      gb[j] = s * p * p * (1.0 / without - 1.0 / with);
    }
  }
}

template <class Samples>
std::vector<double> grad_internal_impl(const NetworkParams& params, const InternalTerm& term,
                                       const Samples& samples, const ReferenceDensity& ref, double delta,
                                       bool fast) {
  if (!(delta > 0.0)) throw std::invalid_argument("grad_internal: delta must be positive");
  std::span<const double> z;
  MapValues mv;
  if constexpr (std::is_same_v<Samples, SampleSet>) {
    z = samples.values();
    mv = evaluate(params, samples);
  } else {
    z = samples;
    mv = evaluate(params, samples);
  }
  if (z.empty()) throw std::invalid_argument("grad_internal: empty sample set");
  const std::size_t k = params.size(), m = z.size();
  const std::vector<double> w = internal_weights(params, term.kind, z, mv, ref);
  std::vector<double> g(2 * k, 0.0);
  // d(D_z f)/d(abar_i) = s_i / beta on the closed support of neuron i
  if (fast) {
    if constexpr (std::is_same_v<Samples, SampleSet>) {
      const WeightedPrefix pre(samples, w);
      for (std::size_t i = 0; i < k; ++i) {
        const double b = params.biases[i];
        const auto sums = params.facing(i) == Facing::forward ? pre.range_sums(samples.lower(b), m)
                                                              : pre.range_sums(0, samples.upper(b));
        g[i] = static_cast<double>(sums[0] / m) * facing_sign(params, i) / params.scale;
      }
    }
  } else {
    for (std::size_t i = 0; i < k; ++i) {
      const double b = params.biases[i];
      const bool fwd = params.facing(i) == Facing::forward;
      double s = 0.0;
      for (std::size_t l = 0; l < m; ++l)
        if (fwd ? z[l] >= b : z[l] <= b) s += w[l];
      g[i] = s / static_cast<double>(m) * facing_sign(params, i) / params.scale;
    }
  }
  const auto [lo, hi] = std::minmax_element(z.begin(), z.end());
  internal_bias_gradient(params, term.kind, ref, delta, *lo, *hi, std::span<double>(g).subspan(k));
  return g;
}

void add_scaled(std::vector<double>& acc, const std::vector<double>& x, double s) {
  for (std::size_t r = 0; r < acc.size(); ++r) acc[r] += s * x[r];
}

double term_weight(const EnergySpec& spec, const EnergyTerm& t) {
  if (const auto* it = std::get_if<InternalTerm>(&t))
    return it->kind == InternalKind::entropy ? spec.diffusion_gamma : 1.0;
  return 1.0;
}

template <class Samples>
double energy_impl(const NetworkParams& params, const EnergySpec& spec, const Samples& samples,
                   std::span<const double> z, const ReferenceDensity& ref, GradientDiagnostics* diag) {
  spec.validate();
  if (z.empty()) throw std::invalid_argument("energy_value: empty sample set");
  const MapValues mv = evaluate(params, samples);
  const double m = static_cast<double>(z.size());
  double total = 0.0;
  std::size_t skipped = 0;
  for (const auto& term : spec.terms) {
    const double w = term_weight(spec, term);
    if (w == 0.0) continue;
    total += w * std::visit(
                     overloaded{
                         [&](const PotentialTerm& t) {
                           return chunked_sum(z.size(), [&](std::size_t l) { return t.V(mv.f[l]); }) / m;
                         },
                         [&](const InteractionTerm& t) { return interaction_energy(t, mv.f, skipped); },
                         [&](const InternalTerm& t) {
                           return chunked_sum(z.size(),
                                              [&](std::size_t l) {
                                                require_positive_slope(mv.d[l], z[l]);
                                                return uhat(t.kind, ref.pdf(z[l]) / mv.d[l]);
                                              }) /
                                  m;
                         }},
                     term);
  }
  if (diag) diag->skipped_pairs += skipped;
  return total;
}

}  // namespace

double EnergySpec::effective_delta(const NetworkParams& params) const {
  if (!adaptive_delta) return singular_delta;
  const double gap = min_bias_gap(params);
  if (!(gap > 0.0)) throw NumericError("bias collision: two biases coincide");
  return std::min(singular_delta, 0.5 * gap);
}

void EnergySpec::validate() const {
  if (terms.empty()) throw std::invalid_argument("EnergySpec: at least one term required");
  if (!(singular_delta > 0.0)) throw std::invalid_argument("EnergySpec: delta must be positive");
  if (diffusion_gamma < 0.0) throw std::invalid_argument("EnergySpec: gamma must be nonnegative");
}

PotentialTerm quadratic_potential(double mu0, double stiffness) {
  return {[=](double x) { return 0.5 * stiffness * (x - mu0) * (x - mu0); },
          [=](double x) { return stiffness * (x - mu0); }};
}

PotentialTerm quartic_potential() {
  return {[](double x) {
            const double y = (x - 1.0) * (x - 1.0);
            return 0.25 * y * y - 0.5 * y;
          },
          [](double x) {
            const double d = x - 1.0;
            return d * d * d - d;
          }};
}

PotentialTerm sextic_potential() {
  return {[](double x) {
            const double d = x - 4.0, d2 = d * d;
            return d2 * d2 * d2 / 6.0;
          },
          [](double x) {
            const double d = x - 4.0, d2 = d * d;
            return d2 * d2 * d;
          }};
}

InteractionTerm log_interaction(double chi) {
  return {[=](double x, double y) { return 2.0 * chi * std::log(std::abs(x - y)); },
          [=](double x, double y) { return 2.0 * chi / (x - y); }, true};
}

void check_bias_separation(const NetworkParams& params, double delta) {
  const double gap = min_bias_gap(params);
  if (gap < 2.0 * delta * (1.0 - 1e-6))
    throw NumericError("bias collision: minimum gap " + std::to_string(gap) + " below 2*delta");
}

double energy_value(const NetworkParams& params, const EnergySpec& spec, std::span<const double> samples,
                    const ReferenceDensity& ref, GradientDiagnostics* diag) {
  return energy_impl(params, spec, samples, samples, ref, diag);
}

double energy_value(const NetworkParams& params, const EnergySpec& spec, const SampleSet& samples,
                    const ReferenceDensity& ref, GradientDiagnostics* diag) {
  return energy_impl(params, spec, samples, samples.values(), ref, diag);
}

std::vector<double> grad_potential(const NetworkParams& params, const PotentialTerm& term,
                                   std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("grad_potential: empty sample set");
  const MapValues mv = evaluate(params, samples);
  std::vector<double> c(samples.size());
  for (std::size_t l = 0; l < c.size(); ++l) c[l] = term.dV(mv.f[l]);
  return weighted_jacobian_direct(params, samples, c);
}

std::vector<double> grad_potential(const NetworkParams& params, const PotentialTerm& term,
                                   const SampleSet& samples) {
  if (samples.empty()) throw std::invalid_argument("grad_potential: empty sample set");
  const MapValues mv = evaluate(params, samples);
  std::vector<double> c(samples.size());
  for_chunks(c.size(), [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t l = b; l < e; ++l) c[l] = term.dV(mv.f[l]);
  });
  return weighted_jacobian_fast(params, samples, c);
}

std::vector<double> grad_interaction(const NetworkParams& params, const InteractionTerm& term,
                                     std::span<const double> samples, GradientDiagnostics* diag) {
  const MapValues mv = evaluate(params, samples);
  std::size_t skipped = 0;
  const std::vector<double> c = interaction_weights(term, mv.f, skipped);
  if (diag) diag->skipped_pairs += skipped;
  return weighted_jacobian_direct(params, samples, c);
}

std::vector<double> grad_interaction(const NetworkParams& params, const InteractionTerm& term,
                                     const SampleSet& samples, GradientDiagnostics* diag) {
  const MapValues mv = evaluate(params, samples);
  std::size_t skipped = 0;
  const std::vector<double> c = interaction_weights(term, mv.f, skipped);
  if (diag) diag->skipped_pairs += skipped;
  return weighted_jacobian_fast(params, samples, c);
}

std::vector<double> grad_internal(const NetworkParams& params, const InternalTerm& term,
                                  std::span<const double> samples, const ReferenceDensity& ref,
                                  double delta) {
  return grad_internal_impl(params, term, samples, ref, delta, false);
}

std::vector<double> grad_internal(const NetworkParams& params, const InternalTerm& term,
                                  const SampleSet& samples, const ReferenceDensity& ref, double delta) {
  return grad_internal_impl(params, term, samples, ref, delta, true);
}

namespace {

template <class Samples>
std::vector<double> assemble_impl(const NetworkParams& params, const EnergySpec& spec, const Samples& samples,
                                  const ReferenceDensity& ref, GradientDiagnostics* diag) {
  spec.validate();
  std::vector<double> g(params.dim(), 0.0);
  for (const auto& term : spec.terms) {
    const double w = term_weight(spec, term);
    if (w == 0.0) continue;
    std::visit(overloaded{[&](const PotentialTerm& t) { add_scaled(g, grad_potential(params, t, samples), w); },
                          [&](const InteractionTerm& t) {
                            add_scaled(g, grad_interaction(params, t, samples, diag), w);
                          },
                          [&](const InternalTerm& t) {
                            add_scaled(g, grad_internal(params, t, samples, ref, spec.effective_delta(params)), w);
                          }},
               term);
  }
  return g;
}

}  // namespace

std::vector<double> assemble_gradient(const NetworkParams& params, const EnergySpec& spec,
                                      std::span<const double> samples, const ReferenceDensity& ref,
                                      GradientDiagnostics* diag) {
  return assemble_impl(params, spec, samples, ref, diag);
}

std::vector<double> assemble_gradient(const NetworkParams& params, const EnergySpec& spec,
                                      const SampleSet& samples, const ReferenceDensity& ref,
                                      GradientDiagnostics* diag) {
  return assemble_impl(params, spec, samples, ref, diag);
}

double internal_energy_quadrature(const NetworkParams& params, InternalKind kind, const ReferenceDensity& ref) {
  const PiecewiseLinear f = to_piecewise(params);
  const double inf = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (std::size_t piece = 0; piece < f.slopes.size(); ++piece) {
    const double lo = std::max(piece == 0 ? -inf : f.knots[piece - 1], ref.support_lo());
    const double hi = std::min(piece == f.knots.size() ? inf : f.knots[piece], ref.support_hi());
    if (!(hi > lo)) continue;
    const double d = f.slopes[piece];
    if (kind == InternalKind::entropy) {
      const double mass = ref.mass(lo, hi);
      if (mass == 0.0) continue;
      require_positive_slope(d, lo);
      const double plogp = integrate(
          [&](double z) {
            const double p = ref.pdf(z);
            return p > 0.0 ? p * std::log(p) : 0.0;
          },
          lo, hi);
      total += plogp - std::log(d) * mass;
    } else {
      const double p2 = integrate([&](double z) { return ref.pdf(z) * ref.pdf(z); }, lo, hi);
      if (p2 == 0.0) continue;
      require_positive_slope(d, lo);
      total += p2 / d;
    }
  }
  return total;
}

}  // namespace wgf
