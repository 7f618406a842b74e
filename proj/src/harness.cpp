#include "wgf/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>

#include <json.hpp>

#include "wgf/csv.hpp"
#include "wgf/errors.hpp"
#include "wgf/network.hpp"
#include "wgf/reference.hpp"
#include "wgf/sample_set.hpp"

namespace wgf {

namespace {

struct NamedExperiment {
  Experiment e;
  const char* name;
};

constexpr NamedExperiment kExperiments[] = {
    {Experiment::linear_quadratic, "LINEAR_QUADRATIC"}, {Experiment::linear_quartic, "LINEAR_QUARTIC"},
    {Experiment::linear_sextic, "LINEAR_SEXTIC"},       {Experiment::fpk_quadratic, "FPK_QUADRATIC"},
    {Experiment::fpk_quartic, "FPK_QUARTIC"},           {Experiment::fpk_sextic, "FPK_SEXTIC"},
    {Experiment::porous, "POROUS"},                     {Experiment::keller_segel, "KELLER_SEGEL"},
    {Experiment::sweep_n, "SWEEP_N"}};

bool is_fpk(Experiment e) {
  return e == Experiment::fpk_quadratic || e == Experiment::fpk_quartic || e == Experiment::fpk_sextic;
}

std::vector<std::size_t> snapshot_steps(std::size_t steps) {
  std::vector<std::size_t> s{0, steps / 4, steps / 2, 3 * steps / 4, steps};
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

ReferenceDensity reference_for(const ExperimentConfig& cfg) {
  return cfg.experiment == Experiment::porous ? ReferenceDensity::barenblatt(cfg.t0)
                                              : ReferenceDensity::gaussian();
}

PotentialTerm potential_for(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::linear_quadratic:
      return quadratic_potential(cfg.mu0.value_or(0.0), 1.0);
    case Experiment::fpk_quadratic:
      return quadratic_potential(cfg.mu0.value(), cfg.gamma0);
    case Experiment::linear_quartic:
    case Experiment::fpk_quartic:
      return quartic_potential();
    case Experiment::linear_sextic:
    case Experiment::fpk_sextic:
      return sextic_potential();
    default:
      throw std::logic_error("experiment has no potential");
  }
}

EnergySpec energy_for(const ExperimentConfig& cfg) {
  EnergySpec spec;
  spec.singular_delta = 0.5 * cfg.eps;
  spec.adaptive_delta = true;
  switch (cfg.experiment) {
    case Experiment::linear_quadratic:
    case Experiment::linear_quartic:
    case Experiment::linear_sextic:
      spec.terms.push_back(potential_for(cfg));
      break;
    case Experiment::fpk_quadratic:
      spec.terms.push_back(potential_for(cfg));
      spec.terms.push_back(InternalTerm{InternalKind::entropy});
      spec.diffusion_gamma = 0.5 * *cfg.sigma0 * *cfg.sigma0;
      break;
    case Experiment::fpk_quartic:
    case Experiment::fpk_sextic:
      spec.terms.push_back(potential_for(cfg));
      spec.terms.push_back(InternalTerm{InternalKind::entropy});
      spec.diffusion_gamma = cfg.diffusion;
      break;
    case Experiment::porous:
      spec.terms.push_back(InternalTerm{InternalKind::porous});
      break;
    case Experiment::keller_segel:
      spec.terms.push_back(log_interaction(cfg.chi));
      spec.terms.push_back(InternalTerm{InternalKind::entropy});
      spec.diffusion_gamma = 1.0;
      break;
    case Experiment::sweep_n:
      throw std::logic_error("sweep has no energy");
  }
  return spec;
}

ExperimentConfig sweep_member(const ExperimentConfig& cfg, int n, ParamSubset subset) {
  ExperimentConfig c = cfg;
  c.experiment = cfg.sweep_base;
  c.n = n;
  c.flow.param_subset = subset;
  return c;
}

std::vector<double> pushed(const NetworkParams& p, const SampleSet& s) {
  std::vector<double> f(s.size());
  evaluate_sorted(p, s.values(), f, {});
  return f;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

std::string experiment_name(Experiment e) {
  for (const auto& ne : kExperiments)
    if (ne.e == e) return ne.name;
  throw std::logic_error("unknown experiment");
}

Experiment parse_experiment(const std::string& name) {
  std::string up = name;
  for (char& c : up) c = c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (const auto& ne : kExperiments)
    if (up == ne.name) return ne.e;
  throw ConfigError("unknown experiment '" + name + "'");
}

std::string subset_name(ParamSubset s) {
  switch (s) {
    case ParamSubset::a_only: return "a";
    case ParamSubset::b_only: return "b";
    case ParamSubset::both: return "both";
  }
  return "both";
}

ParamSubset parse_subset(const std::string& name) {
  if (name == "a" || name == "A_ONLY") return ParamSubset::a_only;
  if (name == "b" || name == "B_ONLY") return ParamSubset::b_only;
  if (name == "both" || name == "BOTH") return ParamSubset::both;
  throw ConfigError("unknown parameter subset '" + name + "' (expected a, b or both)");
}

void ExperimentConfig::validate() const {
  require(n >= 2, "n must be at least 2");
  require(half_width > 0.0, "B must be positive");
  require(eps > 0.0, "eps must be positive");
  require(!beta || *beta > 0.0, "beta must be positive");
  try {
    flow.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  require(flow.dt > 0.0, "dt must be positive");
  if (experiment == Experiment::fpk_quadratic) {
    require(mu0.has_value(), "FPK_QUADRATIC needs mu0");
    require(sigma0.has_value(), "FPK_QUADRATIC needs sigma0");
    require(*sigma0 > 0.0, "sigma0 must be positive");
  }
  require(gamma0 > 0.0, "gamma0 must be positive");
  require(diffusion > 0.0, "diffusion must be positive");
  require(chi > 0.0, "chi must be positive");
  require(t0 > 0.0, "t0 must be positive");
  require(m == 2, "only m = 2 is supported for the porous medium run");
  require(eval.mesh_points >= 1, "mesh_points must be positive");
  require(eval.mesh_max > eval.mesh_min, "mesh_max must exceed mesh_min");
  require(eval.bins >= 1, "bins must be positive");
  require(eval.mapping_points >= 2 && eval.density_points >= 2, "mapping/density points must be at least 2");
  require(fd_grid.n_points >= 3 && fd_grid.x_max > fd_grid.x_min, "invalid finite-difference grid");
  require(fd_theta >= 0.0 && fd_theta <= 1.0, "fd_theta must lie in [0, 1]");
  require(!output_dir.empty(), "output directory must be set");
  if (experiment == Experiment::sweep_n) {
    require(sweep_base != Experiment::sweep_n && sweep_base != Experiment::keller_segel,
            "sweep_base must be an experiment with a map oracle");
    require(!sweep_ns.empty() && !sweep_subsets.empty(), "sweep lists must be nonempty");
    for (int k : sweep_ns) require(k >= 2, "sweep neuron counts must be at least 2");
    ExperimentConfig member = sweep_member(*this, sweep_ns.front(), sweep_subsets.front());
    member.validate();
  }
}

ExperimentConfig default_config(Experiment e, bool desk_scale) {
  ExperimentConfig c;
  c.experiment = e;
  c.flow.steps = 1000;
  c.flow.seed = 20240 + static_cast<std::uint64_t>(e);
  c.flow.snapshot_steps = snapshot_steps(c.flow.steps);
  std::size_t particles = 1000000;
  switch (e) {
    case Experiment::linear_quadratic:
      c.flow.dt = 1e-3;
      particles = 500000;
      break;
    case Experiment::linear_quartic:
      c.flow.dt = 2e-4;
      particles = 500000;
      break;
    case Experiment::linear_sextic:
      c.flow.dt = 1e-6;
      particles = 500000;
      c.eval.mesh_points = 4000000;
      break;
    case Experiment::fpk_quadratic:
      c.flow.dt = 1e-3;
      c.fd_grid = {-10.0, 50.0, 6001};
      break;
    case Experiment::fpk_quartic:
      c.flow.dt = 2e-4;
      c.fd_grid = {-9.0, 9.0, (1u << 14) + 1};
      break;
    case Experiment::fpk_sextic:
      c.flow.dt = 1e-6;
      c.fd_grid = {-9.0, 9.0, (1u << 14) + 1};
      c.eval.mesh_points = 4000000;
      break;
    case Experiment::porous: {
      c.flow.dt = 1e-3;
      c.half_width = std::cbrt(9.0) * std::cbrt(c.t0);
      c.eval.mesh_min = -c.half_width;
      c.eval.mesh_max = c.half_width;
      break;
    }
    case Experiment::keller_segel:
      c.flow.dt = 3e-4;
      particles = 2000;
      break;
    case Experiment::sweep_n:
      return c;
  }
  if (is_fpk(e) || e == Experiment::porous || e == Experiment::keller_segel) c.flow.pinv_rel_tol = 1e-6;
  c.flow.sample_count = desk_scale ? std::max<std::size_t>(1, particles / 100) : particles;
  return c;
}

void apply_config(ExperimentConfig& c, const KeyValueConfig& kv) {
  auto d = [&](const char* k, double& dst) {
    if (auto v = kv.get_double(k)) dst = *v;
  };
  auto positive_int = [&](const char* k) -> std::optional<std::size_t> {
    auto v = kv.get_int(k);
    if (!v) return std::nullopt;
    if (*v < 0) throw ConfigError(std::string("key '") + k + "' must be nonnegative");
    return static_cast<std::size_t>(*v);
  };
  kv.get_string("experiment");
  if (auto v = kv.get_int("n")) c.n = static_cast<int>(*v);
  d("B", c.half_width);
  d("eps", c.eps);
  if (auto v = kv.get_double("beta")) c.beta = *v;
  d("dt", c.flow.dt);
  if (auto v = positive_int("steps")) {
    c.flow.steps = *v;
    c.flow.snapshot_steps = snapshot_steps(*v);
  }
  if (auto v = kv.get_string("subset")) c.flow.param_subset = parse_subset(*v);
  if (auto v = kv.get_string("metric")) {
    if (*v == "empirical") c.flow.metric_mode = MetricMode::empirical;
    else if (*v == "analytic") c.flow.metric_mode = MetricMode::analytic_gaussian;
    else throw ConfigError("metric must be empirical or analytic");
  }
  d("pinv_rel_tol", c.flow.pinv_rel_tol);
  if (auto v = positive_int("particles")) c.flow.sample_count = *v;
  if (auto v = kv.get_int("seed")) c.flow.seed = static_cast<std::uint64_t>(*v);
  if (auto v = kv.get_bool("resample")) c.flow.resample = *v;
  if (auto v = kv.get_double("mu0")) c.mu0 = *v;
  d("gamma0", c.gamma0);
  if (auto v = kv.get_double("sigma0")) c.sigma0 = *v;
  d("diffusion", c.diffusion);
  d("chi", c.chi);
  if (auto v = kv.get_double("t0")) {
    c.t0 = *v;
    if (c.experiment == Experiment::porous && !kv.has("B")) c.half_width = std::cbrt(9.0) * std::cbrt(c.t0);
  }
  if (auto v = kv.get_int("m")) c.m = static_cast<int>(*v);
  if (auto v = positive_int("mesh_points")) c.eval.mesh_points = *v;
  d("mesh_min", c.eval.mesh_min);
  d("mesh_max", c.eval.mesh_max);
  if (auto v = positive_int("bins")) c.eval.bins = *v;
  if (auto v = positive_int("mapping_points")) c.eval.mapping_points = *v;
  if (auto v = positive_int("density_points")) c.eval.density_points = *v;
  d("fd_min", c.fd_grid.x_min);
  d("fd_max", c.fd_grid.x_max);
  if (auto v = positive_int("fd_points")) c.fd_grid.n_points = *v;
  d("fd_theta", c.fd_theta);
  if (auto v = kv.get_string("sweep_base")) c.sweep_base = parse_experiment(*v);
  if (auto v = kv.get_int_list("sweep_ns")) {
    c.sweep_ns.clear();
    for (auto k : *v) c.sweep_ns.push_back(static_cast<int>(k));
  }
  if (auto v = kv.get_string("sweep_subsets")) {
    c.sweep_subsets.clear();
    std::size_t start = 0;
    while (start <= v->size()) {
      const auto comma = v->find(',', start);
      std::string item = v->substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      item.erase(0, item.find_first_not_of(' '));
      item.erase(item.find_last_not_of(' ') + 1);
      c.sweep_subsets.push_back(parse_subset(item));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  if (auto v = kv.get_string("out")) c.output_dir = *v;
  const auto unused = kv.unused_keys();
  if (!unused.empty()) throw ConfigError("unknown config key '" + unused.front() + "'");
}

ExperimentConfig make_config(const KeyValueConfig& kv, std::optional<Experiment> experiment, bool desk_scale) {
  Experiment e;
  if (experiment) {
    e = *experiment;
  } else {
    const auto name = kv.get_string("experiment");
    if (!name) throw ConfigError("no experiment given");
    e = parse_experiment(*name);
  }
  ExperimentConfig c;
  if (e == Experiment::sweep_n) {
    const Experiment base = kv.has("sweep_base") ? parse_experiment(*kv.get_string("sweep_base"))
                                                 : Experiment::linear_quartic;
    if (base == Experiment::sweep_n) throw ConfigError("sweep_base cannot be SWEEP_N");
    c = default_config(base, desk_scale);
    c.experiment = Experiment::sweep_n;
    c.sweep_base = base;
  } else {
    c = default_config(e, desk_scale);
  }
  apply_config(c, kv);
  c.validate();
  return c;
}

double weighted_l1_error(const NetworkParams& f_map, const std::function<double(double)>& T_oracle,
                         std::span<const double> mesh, const std::function<double(double)>& p0) {
  if (mesh.empty()) throw std::invalid_argument("weighted_l1_error: empty mesh");
  std::vector<double> f(mesh.size());
  if (std::is_sorted(mesh.begin(), mesh.end())) {
    evaluate_sorted(f_map, mesh, f, {});
  } else {
    for (std::size_t j = 0; j < mesh.size(); ++j) f[j] = forward(f_map, mesh[j]);
  }
  long double s = 0.0L;
  for (std::size_t j = 0; j < mesh.size(); ++j) s += std::abs(f[j] - T_oracle(mesh[j])) * p0(mesh[j]);
  return static_cast<double>(s / static_cast<long double>(mesh.size()));
}

std::vector<double> uniform_mesh(double lo, double hi, std::size_t count) {
  if (count == 0) throw std::invalid_argument("uniform_mesh: empty mesh");
  if (count == 1) return {0.5 * (lo + hi)};
  std::vector<double> z(count);
  for (std::size_t j = 0; j < count; ++j)
    z[j] = j + 1 == count ? hi : lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(count - 1);
  return z;
}

std::vector<double> sample_gaussian(std::size_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("sample_gaussian: count must be positive");
  return ReferenceDensity::gaussian().sample(count, seed);
}

std::vector<double> sample_barenblatt(std::size_t count, std::uint64_t seed, double t0) {
  if (count == 0) throw std::invalid_argument("sample_barenblatt: count must be positive");
  return ReferenceDensity::barenblatt(t0).sample(count, seed);
}

std::vector<std::size_t> histogram(std::span<const double> particles, std::size_t bins, double lo, double hi) {
  if (bins == 0 || !(hi > lo)) throw std::invalid_argument("histogram: need bins >= 1 and hi > lo");
  std::vector<std::size_t> counts(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double x : particles) {
    if (!(x >= lo && x <= hi)) continue;
    auto k = static_cast<std::size_t>((x - lo) / width);
    counts[std::min(k, bins - 1)]++;
  }
  return counts;
}

Oracle make_oracle(const ExperimentConfig& cfg) {
  Oracle o;
  switch (cfg.experiment) {
    case Experiment::linear_quadratic: {
      const double mu = cfg.mu0.value_or(0.0);
      o.map = [mu](double t, double z) { return map_quadratic(t, z, mu); };
      o.density = [mu](double t, double x) {
        return normal_pdf((x - mu) * std::exp(t) + mu) * std::exp(t);
      };
      break;
    }
    case Experiment::linear_quartic:
      o.map = [](double t, double z) { return map_quartic(t, z); };
      break;
    case Experiment::linear_sextic:
      o.map = [](double t, double z) { return map_sextic(t, z); };
      break;
    case Experiment::fpk_quadratic: {
      const double g = cfg.gamma0, mu = *cfg.mu0, D = 0.5 * *cfg.sigma0 * *cfg.sigma0;
      o.map = [=](double t, double z) { return map_ou(t, z, g, mu, D); };
      o.density = [=](double t, double x) { return density_ou(t, x, g, mu, D); };
      break;
    }
    case Experiment::fpk_quartic:
    case Experiment::fpk_sextic: {
      const DensityGrid grid = run_fd_oracle(cfg, false);
      auto cdfs = std::make_shared<std::vector<CDFGrid>>();
      auto dens = std::make_shared<std::vector<std::vector<double>>>(grid.values);
      for (const auto& p : grid.values) cdfs->push_back(CDFGrid::from_density(grid.grid, p));
      auto times = std::make_shared<std::vector<double>>(grid.times);
      const GridSpec gs = grid.grid;
      auto index_of = [times](double t) {
        for (std::size_t k = 0; k < times->size(); ++k)
          if (std::abs((*times)[k] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return k;
        throw std::invalid_argument("finite-difference oracle has no snapshot at t = " + std::to_string(t));
      };
      o.map = [=](double t, double z) { return quantile_transport(normal_cdf, (*cdfs)[index_of(t)], z); };
      o.density = [=](double t, double x) {
        const auto& p = (*dens)[index_of(t)];
        if (x <= gs.x_min || x >= gs.x_max) return 0.0;
        const double u = (x - gs.x_min) / gs.dx();
        const auto k = std::min(static_cast<std::size_t>(u), gs.n_points - 2);
        const double w = u - static_cast<double>(k);
        return (1.0 - w) * p[k] + w * p[k + 1];
      };
      o.times = grid.times;
      break;
    }
    case Experiment::porous: {
      const double t0 = cfg.t0;
      o.map = [t0](double t, double z) { return barenblatt_map(t, z, t0); };
      o.density = [t0](double t, double x) { return barenblatt(t, x, t0); };
      break;
    }
    case Experiment::keller_segel:
      break;
    case Experiment::sweep_n:
      return make_oracle(sweep_member(cfg, cfg.sweep_ns.front(), cfg.sweep_subsets.front()));
  }
  return o;
}

DensityGrid run_fd_oracle(const ExperimentConfig& cfg, bool write_files) {
  if (!is_fpk(cfg.experiment)) throw ConfigError("the finite-difference oracle needs an FPK experiment");
  cfg.validate();
  const PotentialTerm pot = potential_for(cfg);
  FokkerPlanckOptions opts;
  opts.gamma = cfg.experiment == Experiment::fpk_quadratic ? 0.5 * *cfg.sigma0 * *cfg.sigma0 : cfg.diffusion;
  opts.dt = cfg.flow.dt;
  opts.steps = cfg.flow.steps;
  opts.record_every = cfg.flow.steps % 4 == 0 ? cfg.flow.steps / 4 : 0;
  opts.theta = cfg.fd_theta;
  std::vector<double> p0(cfg.fd_grid.n_points);
  for (std::size_t i = 0; i < p0.size(); ++i) p0[i] = normal_pdf(cfg.fd_grid.x(i));
  DensityGrid grid = fd_fokker_planck(pot.dV, cfg.fd_grid, p0, opts);
  if (write_files) {
    CsvTable t{schema::density, {}};
    for (std::size_t k = 0; k < grid.times.size(); ++k)
      for (std::size_t i = 0; i < grid.grid.n_points; ++i)
        t.rows.push_back({format_number(grid.times[k]), format_number(grid.grid.x(i)),
                          format_number(grid.values[k][i])});
    std::filesystem::create_directories(cfg.output_dir);
    write_csv((std::filesystem::path(cfg.output_dir) / "density.csv").string(), t);
  }
  return grid;
}

ExperimentResult simulate(const ExperimentConfig& cfg, const Oracle& oracle) {
  if (cfg.experiment == Experiment::sweep_n) throw std::invalid_argument("simulate: expand the sweep first");
  const ReferenceDensity ref = reference_for(cfg);
  const NetworkParams init = init_identity(cfg.n, cfg.half_width, cfg.eps, cfg.scale());
  const EnergySpec spec = energy_for(cfg);

  FlowConfig flow = cfg.flow;
  if (cfg.experiment == Experiment::keller_segel) {
    flow.snapshot_steps.resize(flow.steps + 1);
    for (std::size_t k = 0; k <= flow.steps; ++k) flow.snapshot_steps[k] = k;
  }
  ExperimentResult res;
  res.trajectory = run_flow(init, spec, ref, flow);

  if (oracle.map) {
    const std::vector<double> mesh = uniform_mesh(cfg.eval.mesh_min, cfg.eval.mesh_max, cfg.eval.mesh_points);
    auto p0 = [&ref](double z) { return ref.pdf(z); };
    for (std::size_t s = 0; s < res.trajectory.snapshot_steps.size(); ++s) {
      const double t = static_cast<double>(res.trajectory.snapshot_steps[s]) * flow.dt;
      if (!oracle.times.empty() &&
          std::none_of(oracle.times.begin(), oracle.times.end(),
                        [t](double u) { return std::abs(u - t) <= 1e-9 * std::max(1.0, std::abs(t)); }))
        continue;
      const double err = weighted_l1_error(
          res.trajectory.theta_history[s], [&](double z) { return oracle.map(t, z); }, mesh, p0);
      res.errors.push_back({experiment_name(cfg.experiment), cfg.n, flow.param_subset, t, err});
    }
  }
  if (cfg.experiment == Experiment::keller_segel) {
    const SampleSet particles(ref.sample(flow.sample_count, flow.seed));
    for (const auto& theta : res.trajectory.theta_history) {
      const std::vector<double> f = pushed(theta, particles);
      long double m2 = 0.0L;
      for (double x : f) m2 += static_cast<long double>(x) * x;
      res.second_moment.push_back(static_cast<double>(m2 / static_cast<long double>(f.size())));
    }
  }
  return res;
}

namespace {

void write_outputs(const ExperimentConfig& cfg, const Oracle& oracle, ExperimentResult& res, double seconds) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  auto emit = [&](const char* name, const CsvTable& t) {
    const std::string path = (dir / name).string();
    write_csv(path, t);
    res.files.push_back(path);
  };

  if (!res.errors.empty()) {
    CsvTable t{schema::errors, {}};
    for (const auto& r : res.errors)
      t.rows.push_back({r.experiment, std::to_string(r.n), subset_name(r.subset), format_number(r.t),
                        format_number(r.error)});
    emit("errors.csv", t);
  }

  if (cfg.experiment != Experiment::sweep_n) {
    const auto& tr = res.trajectory;
    CsvTable traj{schema::trajectory, {}};
    for (std::size_t k = 0; k < tr.times.size(); ++k)
      traj.rows.push_back({std::to_string(k), format_number(tr.times[k]), format_number(tr.energy[k]),
                           format_number(tr.diagnostics[k].min_bias_gap)});
    emit("trajectory.csv", traj);

    const ReferenceDensity ref = reference_for(cfg);
    const SampleSet particles(ref.sample(cfg.flow.sample_count, cfg.flow.seed));
    const std::vector<std::size_t> snaps = snapshot_steps(cfg.flow.steps);
    CsvTable hist{schema::histogram, {}};
    CsvTable dens{schema::density, {}};
    for (std::size_t s = 0; s < tr.snapshot_steps.size(); ++s) {
      if (!std::binary_search(snaps.begin(), snaps.end(), tr.snapshot_steps[s])) continue;
      const double t = static_cast<double>(tr.snapshot_steps[s]) * cfg.flow.dt;
      const std::vector<double> f = pushed(tr.theta_history[s], particles);
      double lo = *std::min_element(f.begin(), f.end()), hi = *std::max_element(f.begin(), f.end());
      if (!(hi > lo)) lo -= 0.5, hi += 0.5;
      const auto counts = histogram(f, cfg.eval.bins, lo, hi);
      const double w = (hi - lo) / static_cast<double>(cfg.eval.bins);
      for (std::size_t b = 0; b < counts.size(); ++b)
        hist.rows.push_back({format_number(t), format_number(lo + w * static_cast<double>(b)),
                             format_number(b + 1 == counts.size() ? hi : lo + w * static_cast<double>(b + 1)),
                             std::to_string(counts[b])});
      const bool available = oracle.density &&
                             (oracle.times.empty() ||
                              std::any_of(oracle.times.begin(), oracle.times.end(), [t](double u) {
                                return std::abs(u - t) <= 1e-9 * std::max(1.0, std::abs(t));
                              }));
      if (available)
        for (double x : uniform_mesh(lo, hi, cfg.eval.density_points))
          dens.rows.push_back({format_number(t), format_number(x), format_number(oracle.density(t, x))});
    }
    emit("histogram.csv", hist);
    if (!dens.rows.empty()) emit("density.csv", dens);

    const NetworkParams& last = tr.theta_history.back();
    const double t_end = static_cast<double>(tr.snapshot_steps.back()) * cfg.flow.dt;
    CsvTable map{schema::mapping, {}};
    for (double z : uniform_mesh(cfg.eval.mesh_min, cfg.eval.mesh_max, cfg.eval.mapping_points)) {
      const double T = oracle.map ? oracle.map(t_end, z) : std::numeric_limits<double>::quiet_NaN();
      map.rows.push_back({format_number(z), format_number(forward(last, z)), format_number(T)});
    }
    emit("mapping.csv", map);

    if (!res.second_moment.empty()) {
      CsvTable mom{schema::moments, {}};
      for (std::size_t k = 0; k < res.second_moment.size(); ++k)
        mom.rows.push_back({std::to_string(tr.snapshot_steps[k]),
                            format_number(static_cast<double>(tr.snapshot_steps[k]) * cfg.flow.dt),
                            format_number(res.second_moment[k])});
      emit("moments.csv", mom);
    }
  }

  nlohmann::ordered_json meta;
  meta["experiment"] = experiment_name(cfg.experiment);
  if (cfg.experiment == Experiment::sweep_n) meta["sweep_base"] = experiment_name(cfg.sweep_base);
  meta["N"] = cfg.n;
  meta["subset"] = subset_name(cfg.flow.param_subset);
  meta["B"] = cfg.half_width;
  meta["eps"] = cfg.eps;
  meta["beta"] = cfg.scale();
  meta["dt"] = cfg.flow.dt;
  meta["steps"] = cfg.flow.steps;
  meta["particles"] = cfg.flow.sample_count;
  meta["seed"] = cfg.flow.seed;
  meta["mesh_points"] = cfg.eval.mesh_points;
  meta["mesh_range"] = {cfg.eval.mesh_min, cfg.eval.mesh_max};
  meta["bins"] = cfg.eval.bins;
  std::size_t skipped = 0;
  for (const auto& d : res.trajectory.diagnostics) skipped += d.skipped_pairs;
  meta["skipped_pairs"] = skipped;
  meta["quantile_clamps"] = quantile_clamp_count();
  meta["runtime_seconds"] = seconds;
  const std::string path = (dir / "metadata.json").string();
  std::ofstream(path) << meta.dump(2) << '\n';
  res.files.push_back(path);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const Oracle oracle = make_oracle(cfg);
  ExperimentResult res;
  if (cfg.experiment == Experiment::sweep_n) {
    for (ParamSubset subset : cfg.sweep_subsets) {
      for (int n : cfg.sweep_ns) {
        const ExperimentConfig member = sweep_member(cfg, n, subset);
        ExperimentResult r = simulate(member, oracle);
        if (!r.errors.empty()) {
          ErrorRow row = r.errors.back();
          row.experiment = experiment_name(cfg.sweep_base);
          res.errors.push_back(row);
        }
      }
    }
  } else {
    res = simulate(cfg, oracle);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_outputs(cfg, oracle, res, seconds);
  return res;
}

}  // namespace wgf
