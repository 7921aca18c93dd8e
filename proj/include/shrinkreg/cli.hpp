#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "shrinkreg/io.hpp"
#include "shrinkreg/risk.hpp"

namespace shrinkreg {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRank = 3;

struct ExperimentConfig {
  DgpConfig dgp;
  std::vector<NamedSpec> estimators;
  std::int64_t reps = 0;
  std::string output;
  std::vector<std::string> checks;
  double dominance_min_z = 5.0;

  void validate() const;
};

ExperimentConfig experiment_config_from_json(const Json& j);
ExperimentConfig read_experiment_config(const std::string& path);

struct EstimateArgs {
  std::string input;
  std::string estimator = "ols-long";
  std::optional<double> p;
  std::optional<double> sigma2;
  std::optional<double> tau2;
};

struct SimulateArgs {
  std::string config_path;
  std::string out_dir;  // overrides config.output when set
  std::optional<std::int64_t> reps;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> dump_data;  // replication index to dump as CSV
};

struct SweepArgs {
  std::string config_path;
  std::string out_dir;
  std::string axis;  // gamma_scale | k | p
  std::vector<double> values;
  std::optional<std::int64_t> reps;
  std::optional<std::uint64_t> seed;
};

int cmd_estimate(const EstimateArgs& args, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);

}  // namespace shrinkreg
