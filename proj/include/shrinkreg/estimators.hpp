#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "shrinkreg/model.hpp"

namespace shrinkreg {

enum class EstimatorKind {
  kOlsLong,
  kOlsShort,
  kShrink,
  kShrinkPositivePart,
  kEmpiricalBayes,
  kGeneralizedBayes,
};

// Which rule to apply and its hyperparameters. Only GeneralizedBayes consumes
// model quantities (sigma2, tau2, sigma_w) as known constants; every other
// rule is a function of the data alone.
struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::kOlsLong;
  std::optional<double> p;        // Shrink*: empirical-Bayes default when omitted
  double sigma2 = 1.0;            // GeneralizedBayes
  double tau2 = 1.0;              // GeneralizedBayes
  std::optional<Matrix> sigma_w;  // GeneralizedBayes; identity when omitted
};

struct EstimateDiagnostics {
  double seminorm_value = std::numeric_limits<double>::quiet_NaN();
  double p_used = std::numeric_limits<double>::quiet_NaN();
  double p_upper_bound = std::numeric_limits<double>::quiet_NaN();
};

struct EstimateResult {
  Vector beta_hat;   // m
  Vector gamma_hat;  // k
  double alpha_hat = 0.0;
  // 1 for OLS-long, 0 for OLS-short, the computed factor for the shrinkage
  // rules, NaN for rules with no scalar factor (generalized Bayes).
  double shrink_factor = std::numeric_limits<double>::quiet_NaN();
  double ssr = 0.0;
  EstimateDiagnostics diagnostics;
  std::vector<std::string> warnings;
};

// Shrinkage exponent defaults and the Theorem-style dominance bound.
double default_shrink_p(Index n, Index m, Index k);   // (k-2)/(n-m-k-1)
double james_stein_p(Index n, Index m, Index k);      // (k-2)/(n-m-k+1)
double dominance_p_bound(Index n, Index m, Index k);  // 2(k-2)/(n-m-k+2)

// Least squares of y on (1, x, w).
EstimateResult ols_long(const RegressionData& data);

// Least squares of y on (1, x); controls dropped.
EstimateResult ols_short(const RegressionData& data);

// gamma' M gamma with M = W'h (I - X(X'hX)^{-1}X') h W, h = I - 11'/n,
// computed through projections.
double seminorm_gamma(const RegressionData& data, const Vector& gamma);

// Partial-shrinkage rule: the long-regression gamma scaled by
// 1 - p SSR / ||gamma_ols||_M^2, then beta refit on the adjusted outcome.
EstimateResult shrink_gamma(const RegressionData& data, std::optional<double> p,
                            bool positive_part);

// Data-driven shrink factor from the perp-block sample moments; equals
// shrink_gamma at p = (k-2)/(n-m-k-1), and the two routes are cross-checked.
EstimateResult empirical_bayes(const RegressionData& data);

// Posterior mean of beta under the invariant prior with scale tau2, for
// known sigma2 and sigma_w.
EstimateResult generalized_bayes(const RegressionData& data, double sigma2, double tau2,
                                 const Matrix& sigma_w);

EstimateResult estimate(const RegressionData& data, const EstimatorSpec& spec);

// First-stage rule of the two-step decomposition, applied to a sample whose
// rows are already orthogonal to (1, x): y_perp in R^s, w_perp s x k.
// Every estimator kind reduces to one of these on the perp block.
Vector first_stage_gamma(const EstimatorSpec& spec, const Vector& y_perp,
                         const Matrix& w_perp);

const char* estimator_kind_name(EstimatorKind kind);
std::optional<EstimatorKind> estimator_kind_from_name(const std::string& name);

}  // namespace shrinkreg
