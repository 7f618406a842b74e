#pragma once

// Experiment drivers: build the initial network, run the projected flow,
// compare against the matching transport-map oracle and write CSV output.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wgf/config.hpp"
#include "wgf/dynamics.hpp"
#include "wgf/oracles.hpp"

namespace wgf {

enum class Experiment {
  linear_quadratic,
  linear_quartic,
  linear_sextic,
  fpk_quadratic,
  fpk_quartic,
  fpk_sextic,
  porous,
  keller_segel,
  sweep_n
};

std::string experiment_name(Experiment e);
/// Accepts LINEAR_QUARTIC, linear_quartic or linear-quartic.
Experiment parse_experiment(const std::string& name);

std::string subset_name(ParamSubset s);  // "a", "b", "both"
ParamSubset parse_subset(const std::string& name);

struct EvalConfig {
  std::size_t mesh_points = 100000;
  double mesh_min = -6.0;
  double mesh_max = 6.0;
  std::size_t bins = 100;
  std::size_t mapping_points = 401;
  std::size_t density_points = 401;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::linear_quadratic;
  int n = 32;
  double half_width = 4.0;   // B
  double eps = 5e-6;
  std::optional<double> beta;  // defaults to N
  FlowConfig flow;

  std::optional<double> mu0;
  double gamma0 = 1.0;
  std::optional<double> sigma0;
  double diffusion = 1.0;  // entropy weight for the quartic/sextic Fokker-Planck runs
  double chi = 0.5;
  double t0 = 1.0;
  int m = 2;

  EvalConfig eval;
  GridSpec fd_grid;
  double fd_theta = 0.5;  // 1 backward Euler, 0.5 Crank-Nicolson

  Experiment sweep_base = Experiment::linear_quartic;
  std::vector<int> sweep_ns{4, 8, 16, 32, 64};
  std::vector<ParamSubset> sweep_subsets{ParamSubset::a_only, ParamSubset::both};

  std::string output_dir = "out";

  double scale() const { return beta ? *beta : static_cast<double>(n); }
  /// Throws ConfigError.
  void validate() const;
};

/// Paper settings for an experiment (step size, steps, particle counts, seed,
/// mesh, grid).  desk_scale divides particle counts by 100.
ExperimentConfig default_config(Experiment e, bool desk_scale = false);

/// Applies file/flag entries on top of cfg.  Unknown keys raise ConfigError.
void apply_config(ExperimentConfig& cfg, const KeyValueConfig& kv);

/// Builds a validated configuration: defaults for the experiment named in kv
/// (or `experiment` when given), then kv entries.
ExperimentConfig make_config(const KeyValueConfig& kv, std::optional<Experiment> experiment, bool desk_scale);

double weighted_l1_error(const NetworkParams& f_map, const std::function<double(double)>& T_oracle,
                         std::span<const double> mesh, const std::function<double(double)>& p0);

std::vector<double> uniform_mesh(double lo, double hi, std::size_t count);

std::vector<double> sample_gaussian(std::size_t count, std::uint64_t seed);
std::vector<double> sample_barenblatt(std::size_t count, std::uint64_t seed, double t0);

/// Counts per bin over [lo, hi]; the right edge belongs to the last bin and
/// particles outside the range are dropped.
std::vector<std::size_t> histogram(std::span<const double> particles, std::size_t bins, double lo, double hi);

struct ErrorRow {
  std::string experiment;
  int n = 0;
  ParamSubset subset = ParamSubset::both;
  double t = 0.0;
  double error = 0.0;
};

struct ExperimentResult {
  std::vector<ErrorRow> errors;
  TrajectoryRecord trajectory;
  std::vector<double> second_moment;  // Keller-Segel only, one entry per step
  std::vector<std::string> files;     // written paths
};

/// Transport-map and density oracle of one experiment.
struct Oracle {
  std::function<double(double, double)> map;      // T(t, z); empty when unavailable
  std::function<double(double, double)> density;  // p(t, x); empty when unavailable
  std::vector<double> times;                      // times the oracle is available at (empty: all)
};

Oracle make_oracle(const ExperimentConfig& cfg);

/// Runs the flow and evaluates errors without touching the file system.
ExperimentResult simulate(const ExperimentConfig& cfg, const Oracle& oracle);

/// Validates cfg, runs it and writes CSVs plus metadata.json to cfg.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Standalone finite-difference run for a Fokker-Planck experiment; writes
/// density.csv and returns the grid.
DensityGrid run_fd_oracle(const ExperimentConfig& cfg, bool write_files = true);

}  // namespace wgf
