#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include <json.hpp>

#include "shrinkreg/estimators.hpp"
#include "shrinkreg/model.hpp"
#include "shrinkreg/risk.hpp"

namespace shrinkreg {

using Json = nlohmann::json;

// Shortest decimal representation of a binary64 that parses back to the
// same bits; the numeric format for every CSV this project writes.
std::string format_double(double value);
double parse_double(std::string_view text);  // throws DataFormatError

Json dgp_config_to_json(const DgpConfig& config);
DgpConfig dgp_config_from_json(const Json& j);

Json estimator_spec_to_json(const EstimatorSpec& spec);
EstimatorSpec estimator_spec_from_json(const Json& j, const std::string& path);

Json estimate_result_to_json(const EstimateResult& result, const std::string& estimator);

Json risk_report_to_json(const RiskReport& report);

// Estimator rows: estimator, mean_loss, loss_se, bias_1..bias_m,
// bias_se_1..bias_se_m, reps.
std::string risk_report_csv(const RiskReport& report);

// Pair rows: estimator_a, estimator_b, loss_diff_mean, loss_diff_se.
std::string risk_pairs_csv(const RiskReport& report);

// Dataset CSV with header y,x1..xm,w1..wk.
std::string dataset_to_csv(const RegressionData& data);
RegressionData dataset_from_csv(std::istream& in);
RegressionData read_dataset_csv(const std::string& path);

}  // namespace shrinkreg
