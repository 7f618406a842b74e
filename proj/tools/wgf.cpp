#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wgf/config.hpp"
#include "wgf/csv.hpp"
#include "wgf/errors.hpp"
#include "wgf/harness.hpp"

namespace {

struct CommonOptions {
  std::string config_file;
  std::optional<int> n;
  std::optional<std::string> subset;
  std::optional<double> dt;
  std::optional<long long> steps;
  std::optional<long long> seed;
  bool desk_scale = false;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_file, "key = value configuration file");
  cmd->add_option("--n", o.n, "neurons per facing direction");
  cmd->add_option("--subset", o.subset, "trained parameters: a, b or both");
  cmd->add_option("--dt", o.dt, "step size");
  cmd->add_option("--steps", o.steps, "number of steps");
  cmd->add_option("--seed", o.seed, "sampling seed");
  cmd->add_flag("--desk-scale", o.desk_scale, "divide particle counts by 100");
  cmd->add_option("--out", o.out, "output directory");
}

wgf::KeyValueConfig collect(const CommonOptions& o) {
  wgf::KeyValueConfig kv = o.config_file.empty() ? wgf::KeyValueConfig{} : wgf::KeyValueConfig::load(o.config_file);
  auto put = [&](const char* key, const std::string& value) { kv.set(key, value); };
  if (o.n) put("n", std::to_string(*o.n));
  if (o.subset) put("subset", *o.subset);
  if (o.dt) put("dt", wgf::format_number(*o.dt));
  if (o.steps) put("steps", std::to_string(*o.steps));
  if (o.seed) put("seed", std::to_string(*o.seed));
  if (o.out) put("out", *o.out);
  return kv;
}

void report(const wgf::ExperimentResult& res) {
  for (const auto& r : res.errors)
    std::printf("%s N=%d subset=%s t=%.6g error=%.6e\n", r.experiment.c_str(), r.n,
                wgf::subset_name(r.subset).c_str(), r.t, r.error);
  for (const auto& f : res.files) std::printf("wrote %s\n", f.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projected Wasserstein gradient flows with two-layer ReLU transport maps"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  std::string experiment;
  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("experiment", experiment, "LINEAR_QUADRATIC, LINEAR_QUARTIC, LINEAR_SEXTIC, FPK_QUADRATIC, "
                                            "FPK_QUARTIC, FPK_SEXTIC, POROUS, KELLER_SEGEL or SWEEP_N")
      ->required();
  add_common(run, run_opts);

  CommonOptions sweep_opts;
  std::optional<std::string> base, ns, subsets;
  auto* sweep = app.add_subcommand("sweep-n", "error against neuron count");
  add_common(sweep, sweep_opts);
  sweep->add_option("--base", base, "experiment to sweep (default LINEAR_QUARTIC)");
  sweep->add_option("--ns", ns, "comma-separated neuron counts (default 4,8,16,32,64)");
  sweep->add_option("--subsets", subsets, "comma-separated subsets (default a,both)");

  CommonOptions fd_opts;
  std::string fd_experiment = "FPK_QUARTIC";
  auto* oracle = app.add_subcommand("oracle", "reference solvers");
  oracle->require_subcommand(1);
  auto* fpk = oracle->add_subcommand("fpk", "finite-difference Fokker-Planck solve, writes density.csv");
  add_common(fpk, fd_opts);
  fpk->add_option("--experiment", fd_experiment, "FPK_QUADRATIC, FPK_QUARTIC or FPK_SEXTIC");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      const wgf::KeyValueConfig kv = collect(run_opts);
      const auto cfg = wgf::make_config(kv, wgf::parse_experiment(experiment), run_opts.desk_scale);
      report(wgf::run_experiment(cfg));
    } else if (sweep->parsed()) {
      wgf::KeyValueConfig kv = collect(sweep_opts);
      if (base) kv.set("sweep_base", *base);
      if (ns) kv.set("sweep_ns", *ns);
      if (subsets) kv.set("sweep_subsets", *subsets);
      const auto cfg = wgf::make_config(kv, wgf::Experiment::sweep_n, sweep_opts.desk_scale);
      report(wgf::run_experiment(cfg));
    } else if (fpk->parsed()) {
      const wgf::KeyValueConfig kv = collect(fd_opts);
      const auto cfg = wgf::make_config(kv, wgf::parse_experiment(fd_experiment), fd_opts.desk_scale);
      const auto grid = wgf::run_fd_oracle(cfg);
      std::printf("t=%.6g mass=%.15g\n", grid.times.back(), grid.mass(grid.times.size() - 1));
      std::printf("wrote %s/density.csv\n", cfg.output_dir.c_str());
    }
  } catch (const wgf::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const wgf::NumericError& e) {
    std::fprintf(stderr, "numeric abort: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
