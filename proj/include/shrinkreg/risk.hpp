#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shrinkreg/estimators.hpp"
#include "shrinkreg/model.hpp"

namespace shrinkreg {

struct NamedSpec {
  std::string name;
  EstimatorSpec spec;
};

struct EstimatorRiskRecord {
  std::string estimator;
  double mean_loss = 0.0;
  double loss_se = 0.0;
  Vector bias;     // m
  Vector bias_se;  // m
  std::int64_t replications = 0;
  // Estimator warnings observed on the first replication (they are a
  // function of the configuration, not of the draw).
  std::vector<std::string> warnings;
};

// Loss difference a - b on common random numbers.
struct PairedRiskRecord {
  std::string estimator_a;
  std::string estimator_b;
  double loss_diff_mean = 0.0;
  double loss_diff_se = 0.0;
};

struct RiskReport {
  std::vector<EstimatorRiskRecord> estimators;
  std::vector<PairedRiskRecord> pairs;
  std::int64_t replications_requested = 0;
  std::int64_t replications_used = 0;
  std::int64_t failures = 0;
  std::uint64_t seed = 0;
};

// (beta_hat - beta)' X'hX (beta_hat - beta), the prediction-norm loss.
double prediction_loss(const Vector& beta_hat, const Vector& beta, const Matrix& x);

// Worker count: `requested` when positive, otherwise the OpenMP default,
// both capped by the SHRINKREG_THREADS environment variable. Results are
// invariant to the outcome; only wall time changes.
int resolve_threads(int requested);

// Monte Carlo risk and bias for every estimator on common random numbers.
// One dataset per replication feeds every estimator; aggregation runs in
// fixed replication order with compensated summation, so the report is
// bit-identical for any worker count. A replication on which any estimator
// fails is excluded for all arms; more than 1% failures aborts.
RiskReport mc_risk(const DgpConfig& config, const std::vector<NamedSpec>& specs,
                   std::int64_t reps, int threads = 0);

// Serial reference kernel; mc_risk must match it bit-exactly.
RiskReport mc_risk_serial(const DgpConfig& config, const std::vector<NamedSpec>& specs,
                          std::int64_t reps);

// phi = beta_w' X'hX beta_w + m Sigma_W, plus the closed-form risk values it
// implies for the edge-case rules.
struct RiskOracle {
  Matrix phi;  // k x k
  std::map<std::string, double> closed_form_values;
};

RiskOracle make_risk_oracle(const DgpConfig& config);

// m sigma2 (1 + k/(n-m-k-2)); requires n-m-k-2 > 0.
double ols_long_risk_closed_form(Index n, Index m, Index k, double sigma2);

// m sigma2 + m gamma' Sigma_W gamma.
double ols_short_risk_closed_form(Index m, double sigma2, const Vector& gamma,
                                  const Matrix& sigma_w);

struct CheckReport {
  std::string name;
  bool passed = false;
  std::string summary;
};

// MC bias of the gamma == 0 rule against the closed form beta_w gamma,
// componentwise within 4 standard errors.
CheckReport lemma1_bias_check(const DgpConfig& config, std::int64_t reps,
                              int threads = 0);

// Regression risk versus m times the out-of-sample prediction error of the
// first-stage rule trained on n-1-m synthetic draws; requires beta_w == 0.
CheckReport corollary_prediction_equivalence(const DgpConfig& config,
                                             const NamedSpec& spec, std::int64_t reps,
                                             int threads = 0);

// Conditional on fixed (x, w): mean of ||mu_x_hat - mu_x||^2 against
// m sigma2 + ||mu_w_hat - mu_w||^2_{a'a}, both sides on shared draws.
CheckReport loss_decomposition_check(const Matrix& x, const Matrix& w,
                                     const ModelParams& params, const NamedSpec& spec,
                                     std::int64_t reps, std::uint64_t seed,
                                     int threads = 0);

// Deterministic data-level invariance: control rotations, translation
// equivariance, scale equivariance (1e-9), plus group-action homomorphism,
// model-mean commutation, and loss invariance (1e-10).
CheckReport invariance_check(const DgpConfig& config, const std::vector<NamedSpec>& specs,
                             int instances);

// Paired dominance: mean loss difference (shrink arm - baseline arm) must be
// negative with |diff|/se >= min_z.
CheckReport dominance_check(const RiskReport& report, const std::string& shrink_name,
                            const std::string& baseline_name, double min_z);

// Every arm's MC bias within 4 standard errors of zero, componentwise.
CheckReport unbiasedness_check(const RiskReport& report);

}  // namespace shrinkreg
