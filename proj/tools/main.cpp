#include <CLI11.hpp>
#include <iostream>

#include "shrinkreg/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Partial-shrinkage regression estimators and a Monte Carlo risk harness"};
  app.require_subcommand(1);

  shrinkreg::EstimateArgs estimate_args;
  double p_value = 0.0, sigma2_value = 0.0, tau2_value = 0.0;
  auto* estimate = app.add_subcommand("estimate", "Estimate from a CSV dataset");
  estimate->add_option("--input", estimate_args.input, "CSV file with header y,x1..xm,w1..wk")
      ->required();
  estimate->add_option("--estimator", estimate_args.estimator,
                       "ols-long|ols-short|shrink|shrink-pp|eb|gbayes");
  auto* p_opt = estimate->add_option("--p", p_value, "shrinkage exponent");
  auto* s2_opt = estimate->add_option("--sigma2", sigma2_value, "noise variance (gbayes)");
  auto* t2_opt = estimate->add_option("--tau2", tau2_value, "prior scale (gbayes)");

  shrinkreg::SimulateArgs simulate_args;
  std::int64_t reps_value = 0;
  std::uint64_t seed_value = 0;
  std::int64_t dump_value = 0;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment from a config");
  simulate->add_option("--config", simulate_args.config_path, "experiment config JSON")
      ->required();
  simulate->add_option("--out", simulate_args.out_dir, "output directory");
  auto* sim_reps = simulate->add_option("--reps", reps_value, "override replication count");
  auto* sim_seed = simulate->add_option("--seed", seed_value, "override seed");
  auto* sim_dump =
      simulate->add_option("--dump-data", dump_value, "dump this replication's dataset as CSV");

  shrinkreg::SweepArgs sweep_args;
  std::int64_t sweep_reps_value = 0;
  std::uint64_t sweep_seed_value = 0;
  auto* sweep = app.add_subcommand("sweep", "Sweep one axis of a base config");
  sweep->add_option("--config", sweep_args.config_path, "experiment config JSON")->required();
  sweep->add_option("--axis", sweep_args.axis, "gamma_scale|k|p")->required();
  sweep->add_option("--values", sweep_args.values, "comma-separated axis values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--out", sweep_args.out_dir, "output directory");
  auto* sweep_reps = sweep->add_option("--reps", sweep_reps_value, "override replication count");
  auto* sweep_seed = sweep->add_option("--seed", sweep_seed_value, "override seed");

  CLI11_PARSE(app, argc, argv);

  if (estimate->parsed()) {
    if (p_opt->count() > 0) estimate_args.p = p_value;
    if (s2_opt->count() > 0) estimate_args.sigma2 = sigma2_value;
    if (t2_opt->count() > 0) estimate_args.tau2 = tau2_value;
    return shrinkreg::cmd_estimate(estimate_args, std::cout, std::cerr);
  }
  if (simulate->parsed()) {
    if (sim_reps->count() > 0) simulate_args.reps = reps_value;
    if (sim_seed->count() > 0) simulate_args.seed = seed_value;
    if (sim_dump->count() > 0) simulate_args.dump_data = dump_value;
    return shrinkreg::cmd_simulate(simulate_args, std::cout, std::cerr);
  }
  if (sweep->parsed()) {
    if (sweep_reps->count() > 0) sweep_args.reps = sweep_reps_value;
    if (sweep_seed->count() > 0) sweep_args.seed = sweep_seed_value;
    return shrinkreg::cmd_sweep(sweep_args, std::cout, std::cerr);
  }
  return 0;
}
