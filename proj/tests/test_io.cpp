#include <doctest.h>

#include <cstring>
#include <sstream>

#include "shrinkreg/io.hpp"
#include "test_support.hpp"

using namespace shrinkreg;

TEST_CASE("format_double round-trips random bit patterns") {
  rng::NormalStream stream(101, rng::StreamDomain::kDesign, 0);
  for (int t = 0; t < 10000; ++t) {
    const double v = stream.normal() * std::exp(20.0 * (stream.uniform() - 0.5));
    const double back = parse_double(format_double(v));
    CHECK(std::memcmp(&v, &back, sizeof(double)) == 0);
  }
  CHECK(parse_double(format_double(0.0)) == 0.0);
  CHECK(parse_double(format_double(-1.0)) == -1.0);
  CHECK(parse_double("  2.5 ") == 2.5);
  CHECK_THROWS_AS(parse_double("1.2.3"), DataFormatError);
  CHECK_THROWS_AS(parse_double(""), DataFormatError);
  CHECK_THROWS_AS(parse_double("abc"), DataFormatError);
}

namespace {

DgpConfig sample_config() {
  DgpConfig config;
  config.n = 8;
  config.m = 1;
  config.k = 3;
  config.params.alpha = 0.25;
  config.params.beta = Vector::Constant(1, 1.5);
  config.params.gamma = (Vector(3) << 0.1, -0.2, 0.3).finished();
  config.params.sigma2 = 2.0;
  config.covariates.alpha_w = (RowVector(3) << 0.0, 1.0, -1.0).finished();
  config.covariates.beta_w = Matrix::Zero(1, 3);
  config.covariates.sigma_w = Matrix::Identity(3, 3);
  config.seed = 12345;
  return config;
}

}  // namespace

TEST_CASE("DgpConfig serializes with the exact field names and round-trips") {
  const DgpConfig config = sample_config();
  const Json j = dgp_config_to_json(config);
  for (const char* key : {"n", "m", "k", "alpha", "beta", "gamma", "sigma2", "alpha_w",
                          "beta_w", "sigma_w", "x_design", "seed"})
    CHECK(j.contains(key));
  CHECK(j.at("x_design") == "gaussian");

  const DgpConfig back = dgp_config_from_json(j);
  CHECK(back.n == config.n);
  CHECK(back.seed == config.seed);
  CHECK(back.params.beta == config.params.beta);
  CHECK(back.covariates.alpha_w == config.covariates.alpha_w);
  CHECK_FALSE(back.x_fixed.has_value());

  // Fixed design round-trips through the flat row-major encoding.
  DgpConfig fixed = config;
  rng::NormalStream stream(7, rng::StreamDomain::kDesign, 0);
  fixed.x_fixed = testing::random_matrix(config.n, config.m, stream);
  const DgpConfig fixed_back = dgp_config_from_json(dgp_config_to_json(fixed));
  REQUIRE(fixed_back.x_fixed.has_value());
  CHECK(*fixed_back.x_fixed == *fixed.x_fixed);
}

TEST_CASE("bad configs are rejected with a field path") {
  Json j = dgp_config_to_json(sample_config());
  j["beta"] = Json::array({1.0, 2.0});  // wrong length
  CHECK_THROWS_WITH_AS(static_cast<void>(dgp_config_from_json(j)),
                       doctest::Contains("dgp.beta"), ConfigError);

  Json j2 = dgp_config_to_json(sample_config());
  j2["extra"] = 1;
  CHECK_THROWS_WITH_AS(static_cast<void>(dgp_config_from_json(j2)),
                       doctest::Contains("dgp.extra"), ConfigError);

  Json j3 = dgp_config_to_json(sample_config());
  j3.erase("sigma2");
  CHECK_THROWS_WITH_AS(static_cast<void>(dgp_config_from_json(j3)),
                       doctest::Contains("dgp.sigma2"), ConfigError);
}

TEST_CASE("estimator specs round-trip through JSON") {
  EstimatorSpec spec;
  spec.kind = EstimatorKind::kShrink;
  spec.p = 0.125;
  const EstimatorSpec back =
      estimator_spec_from_json(estimator_spec_to_json(spec), "estimators[0]");
  CHECK(back.kind == EstimatorKind::kShrink);
  CHECK(back.p == 0.125);

  Json bad;
  bad["kind"] = "nonsense";
  CHECK_THROWS_WITH_AS(static_cast<void>(estimator_spec_from_json(bad, "estimators[1]")),
                       doctest::Contains("estimators[1].kind"), ConfigError);
}

TEST_CASE("estimate results serialize with the documented keys") {
  EstimateResult result;
  result.beta_hat = Vector::Constant(1, 2.0);
  result.gamma_hat = Vector::Zero(2);
  result.alpha_hat = 0.5;
  result.shrink_factor = 0.75;
  result.ssr = 1.25;
  result.diagnostics.p_used = 0.1;
  result.diagnostics.p_upper_bound = 0.4;
  result.warnings.push_back("sample warning");

  const Json j = estimate_result_to_json(result, "shrink");
  for (const char* key : {"estimator", "beta_hat", "gamma_hat", "alpha_hat",
                          "shrink_factor", "ssr", "p_used", "p_upper_bound", "warnings"})
    CHECK(j.contains(key));
  CHECK(j.at("estimator") == "shrink");
  CHECK(j.at("warnings").size() == 1);
}

TEST_CASE("risk CSV headers are fixed") {
  RiskReport report;
  EstimatorRiskRecord rec;
  rec.estimator = "ols-long";
  rec.mean_loss = 1.0;
  rec.loss_se = 0.1;
  rec.bias = Vector::Constant(2, 0.01);
  rec.bias_se = Vector::Constant(2, 0.001);
  rec.replications = 100;
  report.estimators.push_back(rec);
  report.pairs.push_back(PairedRiskRecord{"a", "b", -0.5, 0.05});

  const std::string csv = risk_report_csv(report);
  CHECK(csv.rfind("estimator,mean_loss,loss_se,bias_1,bias_2,bias_se_1,bias_se_2,reps\n",
                  0) == 0);
  const std::string pairs = risk_pairs_csv(report);
  CHECK(pairs.rfind("estimator_a,estimator_b,loss_diff_mean,loss_diff_se\n", 0) == 0);
}

TEST_CASE("datasets round-trip bit-exactly through CSV") {
  rng::NormalStream stream(55, rng::StreamDomain::kDesign, 0);
  const RegressionData data = testing::random_dataset(9, 2, 3, stream);
  const std::string csv = dataset_to_csv(data);
  std::istringstream in(csv);
  const RegressionData back = dataset_from_csv(in);
  CHECK(back.y == data.y);
  CHECK(back.x == data.x);
  CHECK(back.w == data.w);
  // A second pass through text is byte-stable.
  CHECK(dataset_to_csv(back) == csv);
}

TEST_CASE("malformed CSV errors carry the line number") {
  {
    std::istringstream in("y,x1,w1\n1.0,2.0,3.0\n4.0,oops,6.0\n");
    try {
      dataset_from_csv(in);
      FAIL("expected DataFormatError");
    } catch (const DataFormatError& e) {
      CHECK(e.line() == 3);
    }
  }
  {
    std::istringstream in("y,x1,w1\n1.0,2.0\n");
    try {
      dataset_from_csv(in);
      FAIL("expected DataFormatError");
    } catch (const DataFormatError& e) {
      CHECK(e.line() == 2);
    }
  }
  {
    std::istringstream in("z,x1,w1\n1,2,3\n");
    CHECK_THROWS_AS(static_cast<void>(dataset_from_csv(in)), DataFormatError);
  }
  {
    std::istringstream in("y,x1,w1\n1.0,inf,3.0\n");
    CHECK_THROWS_AS(static_cast<void>(dataset_from_csv(in)), DataFormatError);
  }
}
