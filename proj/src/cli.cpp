#include "shrinkreg/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace shrinkreg {

namespace {

const std::set<std::string> kKnownChecks = {
    "dominance",    "unbiasedness", "lemma1",
    "corollary_equivalence", "decomposition", "invariance"};

Json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config parse error in '" + path + "': " + e.what());
  }
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << contents;
}

bool is_shrink_family(EstimatorKind kind) {
  return kind == EstimatorKind::kShrink || kind == EstimatorKind::kShrinkPositivePart ||
         kind == EstimatorKind::kEmpiricalBayes;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const RankError*>(&e)) return kExitRank;
  if (dynamic_cast<const DataFormatError*>(&e)) return kExitConfig;
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  return 1;
}

}  // namespace

void ExperimentConfig::validate() const {
  dgp.validate();
  if (estimators.empty()) throw ConfigError("estimators: at least one estimator required");
  std::set<std::string> names;
  for (const auto& spec : estimators) {
    if (spec.name.empty()) throw ConfigError("estimators: names must be non-empty");
    if (!names.insert(spec.name).second)
      throw ConfigError("estimators: duplicate name '" + spec.name + "'");
  }
  for (const auto& check : checks) {
    if (!kKnownChecks.count(check)) throw ConfigError("checks: unknown check '" + check + "'");
  }
  const bool needs_se = std::any_of(checks.begin(), checks.end(),
                                    [](const std::string& c) { return c != "invariance"; });
  if (reps < 2) throw ConfigError("reps: must be >= 2");
  if (needs_se && reps < 100)
    throw ConfigError("reps: must be >= 100 for standard-error-based checks");
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config: expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    static const std::set<std::string> known = {"dgp",    "estimators",      "reps",
                                                "output", "checks",          "dominance_min_z"};
    if (!known.count(it.key())) throw ConfigError(it.key() + ": unknown field");
  }
  ExperimentConfig config;
  if (!j.contains("dgp")) throw ConfigError("dgp: missing field");
  config.dgp = dgp_config_from_json(j.at("dgp"));

  if (!j.contains("estimators") || !j.at("estimators").is_array())
    throw ConfigError("estimators: expected an array");
  std::size_t idx = 0;
  for (const auto& entry : j.at("estimators")) {
    const std::string path = "estimators[" + std::to_string(idx) + "]";
    NamedSpec named;
    named.spec = estimator_spec_from_json(entry, path);
    if (entry.contains("name")) {
      if (!entry.at("name").is_string()) throw ConfigError(path + ".name: expected a string");
      named.name = entry.at("name").get<std::string>();
    } else {
      named.name = estimator_kind_name(named.spec.kind);
    }
    config.estimators.push_back(std::move(named));
    ++idx;
  }

  if (!j.contains("reps") || !j.at("reps").is_number_integer())
    throw ConfigError("reps: expected an integer");
  config.reps = j.at("reps").get<std::int64_t>();

  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw ConfigError("output: expected a string");
    config.output = j.at("output").get<std::string>();
  }
  if (j.contains("checks")) {
    if (!j.at("checks").is_array()) throw ConfigError("checks: expected an array");
    for (const auto& c : j.at("checks")) {
      if (!c.is_string()) throw ConfigError("checks: expected strings");
      config.checks.push_back(c.get<std::string>());
    }
  }
  if (j.contains("dominance_min_z")) {
    if (!j.at("dominance_min_z").is_number())
      throw ConfigError("dominance_min_z: expected a number");
    config.dominance_min_z = j.at("dominance_min_z").get<double>();
  }
  config.validate();
  return config;
}

ExperimentConfig read_experiment_config(const std::string& path) {
  return experiment_config_from_json(parse_json_file(path));
}

int cmd_estimate(const EstimateArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const RegressionData data = read_dataset_csv(args.input);
    const auto kind = estimator_kind_from_name(args.estimator);
    if (!kind) throw ConfigError("unknown estimator '" + args.estimator + "'");
    EstimatorSpec spec;
    spec.kind = *kind;
    spec.p = args.p;
    if (args.sigma2) spec.sigma2 = *args.sigma2;
    if (args.tau2) spec.tau2 = *args.tau2;

    const EstimateResult result = estimate(data, spec);
    for (const auto& warning : result.warnings) err << "warning: " << warning << "\n";
    out << estimate_result_to_json(result, args.estimator).dump(2) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

namespace {

std::vector<CheckReport> run_checks(const ExperimentConfig& config,
                                    const RiskReport& report) {
  std::vector<CheckReport> results;
  for (const auto& check : config.checks) {
    if (check == "dominance") {
      const NamedSpec* baseline = nullptr;
      for (const auto& spec : config.estimators)
        if (spec.spec.kind == EstimatorKind::kOlsLong) {
          baseline = &spec;
          break;
        }
      if (!baseline)
        throw ConfigError("dominance check requires an ols-long estimator in the config");
      bool any = false;
      for (const auto& spec : config.estimators) {
        if (!is_shrink_family(spec.spec.kind)) continue;
        any = true;
        results.push_back(
            dominance_check(report, spec.name, baseline->name, config.dominance_min_z));
      }
      if (!any)
        throw ConfigError("dominance check requires a shrink-family estimator in the config");
    } else if (check == "unbiasedness") {
      results.push_back(unbiasedness_check(report));
    } else if (check == "lemma1") {
      results.push_back(lemma1_bias_check(config.dgp, config.reps));
    } else if (check == "corollary_equivalence") {
      for (const auto& spec : config.estimators)
        results.push_back(corollary_prediction_equivalence(config.dgp, spec, config.reps));
    } else if (check == "decomposition") {
      const Dgp dgp(config.dgp);
      const Matrix w = dgp.simulate(0).w;
      for (const auto& spec : config.estimators)
        results.push_back(loss_decomposition_check(dgp.x(), w, config.dgp.params, spec,
                                                   config.reps, config.dgp.seed));
    } else if (check == "invariance") {
      results.push_back(invariance_check(config.dgp, config.estimators, 100));
    }
  }
  return results;
}

}  // namespace

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig config = read_experiment_config(args.config_path);
    if (args.reps) config.reps = *args.reps;
    if (args.seed) config.dgp.seed = *args.seed;
    if (!args.out_dir.empty()) config.output = args.out_dir;
    if (config.output.empty()) config.output = ".";
    config.validate();

    const RiskReport report = mc_risk(config.dgp, config.estimators, config.reps);

    const std::filesystem::path dir(config.output);
    std::filesystem::create_directories(dir);
    write_file(dir / "risk.csv", risk_report_csv(report));
    write_file(dir / "risk_pairs.csv", risk_pairs_csv(report));
    Json report_json;
    report_json["config"] = dgp_config_to_json(config.dgp);
    report_json["report"] = risk_report_to_json(report);
    write_file(dir / "risk.json", report_json.dump(2) + "\n");

    for (const auto& rec : report.estimators)
      for (const auto& warning : rec.warnings)
        err << "warning: " << rec.estimator << ": " << warning << "\n";

    if (args.dump_data) {
      const Dgp dgp(config.dgp);
      const RegressionData data =
          dgp.simulate(static_cast<std::uint64_t>(*args.dump_data));
      write_file(dir / ("dataset_rep" + std::to_string(*args.dump_data) + ".csv"),
                 dataset_to_csv(data));
    }

    const std::vector<CheckReport> checks = run_checks(config, report);
    bool all_passed = true;
    Json checks_json = Json::array();
    for (const auto& check : checks) {
      out << (check.passed ? "PASS " : "FAIL ") << check.name << ": " << check.summary
          << "\n";
      all_passed = all_passed && check.passed;
      Json c;
      c["name"] = check.name;
      c["passed"] = check.passed;
      c["summary"] = check.summary;
      checks_json.push_back(std::move(c));
    }
    if (!checks.empty()) write_file(dir / "checks.json", checks_json.dump(2) + "\n");
    return all_passed ? kExitOk : kExitCheckFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

namespace {

DgpConfig with_k(const DgpConfig& base, Index k_new) {
  DgpConfig config = base;
  config.k = k_new;
  const Index k_old = base.k;
  const Index copy = std::min(k_old, k_new);

  config.params.gamma = Vector::Zero(k_new);
  config.params.gamma.head(copy) = base.params.gamma.head(copy);
  config.covariates.alpha_w = RowVector::Zero(k_new);
  config.covariates.alpha_w.head(copy) = base.covariates.alpha_w.head(copy);
  config.covariates.beta_w = Matrix::Zero(base.m, k_new);
  config.covariates.beta_w.leftCols(copy) = base.covariates.beta_w.leftCols(copy);
  // Leading principal block of an SPD matrix stays SPD; new axes are unit.
  config.covariates.sigma_w = Matrix::Identity(k_new, k_new);
  config.covariates.sigma_w.topLeftCorner(copy, copy) =
      base.covariates.sigma_w.topLeftCorner(copy, copy);
  return config;
}

}  // namespace

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig config = read_experiment_config(args.config_path);
    if (args.reps) config.reps = *args.reps;
    if (args.seed) config.dgp.seed = *args.seed;
    if (!args.out_dir.empty()) config.output = args.out_dir;
    if (config.output.empty()) config.output = ".";
    if (args.values.empty()) throw ConfigError("sweep: at least one value is required");
    if (args.axis != "gamma_scale" && args.axis != "k" && args.axis != "p")
      throw ConfigError("sweep: axis must be one of gamma_scale, k, p");

    std::ostringstream csv;
    csv << "axis,axis_value,estimator,mean_loss,loss_se,reps\n";
    for (const double value : args.values) {
      ExperimentConfig run = config;
      if (args.axis == "gamma_scale") {
        run.dgp.params.gamma *= value;
      } else if (args.axis == "k") {
        const auto k_new = static_cast<Index>(std::llround(value));
        if (k_new < 1 || static_cast<double>(k_new) != value)
          throw ConfigError("sweep: k values must be positive integers");
        run.dgp = with_k(config.dgp, k_new);
      } else {
        bool any = false;
        for (auto& spec : run.estimators) {
          if (spec.spec.kind == EstimatorKind::kShrink ||
              spec.spec.kind == EstimatorKind::kShrinkPositivePart) {
            spec.spec.p = value;
            any = true;
          }
        }
        if (!any)
          throw ConfigError("sweep: p axis requires a shrink or shrink-pp estimator");
      }
      const RiskReport report = mc_risk(run.dgp, run.estimators, run.reps);
      for (const auto& rec : report.estimators) {
        csv << args.axis << ',' << format_double(value) << ',' << rec.estimator << ','
            << format_double(rec.mean_loss) << ',' << format_double(rec.loss_se) << ','
            << rec.replications << '\n';
      }
    }

    const std::filesystem::path dir(config.output);
    std::filesystem::create_directories(dir);
    write_file(dir / "sweep.csv", csv.str());
    out << "wrote " << (dir / "sweep.csv").string() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace shrinkreg
