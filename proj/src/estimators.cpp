#include "shrinkreg/estimators.hpp"

#include <Eigen/QR>
#include <cmath>

#include "shrinkreg/canon.hpp"

namespace shrinkreg {

namespace {

constexpr double kConditionWarnLevel = 1e12;

Matrix design_long(const RegressionData& data) {
  Matrix a(data.n(), 1 + data.m() + data.k());
  a.col(0).setOnes();
  a.middleCols(1, data.m()) = data.x;
  a.rightCols(data.k()) = data.w;
  return a;
}

void append_condition_warning(const Eigen::ColPivHouseholderQR<Matrix>& qr,
                              EstimateResult& result) {
  const Index p = qr.matrixQR().cols();
  if (p == 0) return;
  const double max_pivot = std::abs(qr.maxPivot());
  const double min_pivot = std::abs(qr.matrixQR()(p - 1, p - 1));
  if (min_pivot == 0.0 || max_pivot / min_pivot >= kConditionWarnLevel)
    result.warnings.push_back("design condition estimate exceeds 1e12");
}

// Identify which block breaks full rank of (1, x, w).
[[noreturn]] void throw_rank_error(const RegressionData& data, const char* where) {
  Matrix one_x(data.n(), 1 + data.m());
  one_x.col(0).setOnes();
  one_x.rightCols(data.m()) = data.x;
  Eigen::ColPivHouseholderQR<Matrix> qr(one_x);
  qr.setThreshold(kRankTolerance);
  const bool x_bad = qr.rank() < 1 + data.m();
  throw RankError(std::string(where) + ": design is numerically rank deficient (" +
                      (x_bad ? "x" : "w") + " block)",
                  x_bad ? "x" : "w");
}

struct CenteredFit {
  Vector beta;
  double intercept;
};

// Regression of v on (1, x): beta = (X'hX)^{-1} X'h v.
CenteredFit fit_on_x(const Matrix& x, const Vector& v) {
  const RowVector x_mean = x.colwise().mean();
  const Matrix xc = x.rowwise() - x_mean;
  const double v_mean = v.mean();
  Eigen::ColPivHouseholderQR<Matrix> qr(xc);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < x.cols())
    throw RankError("fit_on_x: (1, x) is numerically rank deficient", "x");
  Vector beta = qr.solve((v.array() - v_mean).matrix());
  return CenteredFit{std::move(beta), v_mean - x_mean.dot(beta)};
}

double shrink_p_or_default(const RegressionData& data, std::optional<double> p) {
  if (p) return *p;
  const Index denom = data.n() - data.m() - data.k() - 1;
  if (denom <= 0)
    throw ConfigError(
        "shrink: default p is undefined when n - m - k - 1 <= 0; supply p explicitly");
  return default_shrink_p(data.n(), data.m(), data.k());
}

}  // namespace

double default_shrink_p(Index n, Index m, Index k) {
  return static_cast<double>(k - 2) / static_cast<double>(n - m - k - 1);
}

double james_stein_p(Index n, Index m, Index k) {
  return static_cast<double>(k - 2) / static_cast<double>(n - m - k + 1);
}

double dominance_p_bound(Index n, Index m, Index k) {
  return 2.0 * static_cast<double>(k - 2) / static_cast<double>(n - m - k + 2);
}

EstimateResult ols_long(const RegressionData& data) {
  const Index n = data.n(), m = data.m(), k = data.k();
  if (n < 1 + m + k)
    throw RankError("ols_long: need n >= 1 + m + k observations");

  const Matrix a = design_long(data);
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < a.cols()) throw_rank_error(data, "ols_long");

  const Vector coef = qr.solve(data.y);
  EstimateResult result;
  result.alpha_hat = coef(0);
  result.beta_hat = coef.segment(1, m);
  result.gamma_hat = coef.tail(k);
  result.ssr = (data.y - a * coef).squaredNorm();
  result.shrink_factor = 1.0;
  append_condition_warning(qr, result);
  return result;
}

EstimateResult ols_short(const RegressionData& data) {
  const Index n = data.n(), m = data.m(), k = data.k();
  if (n < 1 + m) throw RankError("ols_short: need n >= 1 + m observations");

  Matrix a(n, 1 + m);
  a.col(0).setOnes();
  a.rightCols(m) = data.x;
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < a.cols())
    throw RankError("ols_short: (1, x) is numerically rank deficient", "x");

  const Vector coef = qr.solve(data.y);
  EstimateResult result;
  result.alpha_hat = coef(0);
  result.beta_hat = coef.tail(m);
  result.gamma_hat = Vector::Zero(k);
  result.ssr = (data.y - a * coef).squaredNorm();
  result.shrink_factor = 0.0;
  append_condition_warning(qr, result);
  return result;
}

double seminorm_gamma(const RegressionData& data, const Vector& gamma) {
  if (gamma.size() != data.k()) throw ConfigError("seminorm_gamma: gamma must have length k");
  const RowVector x_mean = data.x.colwise().mean();
  const Matrix xc = data.x.rowwise() - x_mean;
  Eigen::ColPivHouseholderQR<Matrix> rank_qr(xc);
  rank_qr.setThreshold(kRankTolerance);
  if (rank_qr.rank() < data.m())
    throw RankError("seminorm_gamma: (1, x) is numerically rank deficient", "x");

  Vector v = data.w * gamma;
  v.array() -= v.mean();
  // Residual of v against span(h x); the quadratic form is its squared norm.
  Eigen::HouseholderQR<Matrix> qr(xc);
  const Matrix q = qr.householderQ() * Matrix::Identity(data.n(), data.m());
  v.noalias() -= q * (q.transpose() * v);
  return v.squaredNorm();
}

EstimateResult shrink_gamma(const RegressionData& data, std::optional<double> p,
                            bool positive_part) {
  const Index n = data.n(), m = data.m(), k = data.k();
  EstimateResult base = ols_long(data);
  const double sem = seminorm_gamma(data, base.gamma_hat);
  const double p_used = shrink_p_or_default(data, p);
  const double bound = dominance_p_bound(n, m, k);

  EstimateResult result;
  result.warnings = base.warnings;
  result.ssr = base.ssr;
  result.diagnostics.seminorm_value = sem;
  result.diagnostics.p_used = p_used;
  result.diagnostics.p_upper_bound = bound;

  double factor;
  if (sem <= 1e-14 * base.ssr) {
    factor = 0.0;
    result.warnings.push_back("degenerate seminorm denominator; applying full shrinkage");
  } else {
    factor = 1.0 - p_used * base.ssr / sem;
  }
  if (positive_part) factor = std::max(0.0, factor);
  result.shrink_factor = factor;

  if (k < 3) result.warnings.push_back("k < 3: dominance requires at least three controls");
  if (n < m + k + 2)
    result.warnings.push_back("n < m + k + 2: outside the dominance regime");
  if (!(p_used > 0.0) || !(p_used < bound))
    result.warnings.push_back("p outside dominance interval (0, 2(k-2)/(n-m-k+2))");

  result.gamma_hat = factor * base.gamma_hat;
  const Vector adjusted = data.y - data.w * result.gamma_hat;
  CenteredFit fit = fit_on_x(data.x, adjusted);
  result.beta_hat = std::move(fit.beta);
  result.alpha_hat = fit.intercept;
  return result;
}

EstimateResult empirical_bayes(const RegressionData& data) {
  const Index n = data.n(), m = data.m(), k = data.k();
  const Index s = n - m - 1;
  if (k < 3) throw ConfigError("empirical_bayes: requires k >= 3");
  if (s <= k) throw ConfigError("empirical_bayes: requires n - m - 1 > k");

  const double p_eb = static_cast<double>(k - 2) / static_cast<double>(s - k);
  EstimateResult result = shrink_gamma(data, p_eb, false);

  // Independent route through the perp-block sample moments; must agree with
  // the shrink rule at p = (k-2)/(s-k).
  const CanonicalBasis basis = build_basis(data.x, Matrix(n, 0));
  const Matrix q_perp = basis.qperp();
  const Matrix w_perp = q_perp.transpose() * data.w;  // s x k
  const Vector y_perp = q_perp.transpose() * data.y;

  Eigen::HouseholderQR<Matrix> qr(w_perp);
  const Matrix q = qr.householderQ() * Matrix::Identity(s, k);
  const Vector fitted = q * (q.transpose() * y_perp);
  const double resid_ms = (y_perp - fitted).squaredNorm() / static_cast<double>(s - k);
  const double fit_ms = fitted.squaredNorm() / static_cast<double>(k - 2);

  if (fit_ms > 0.0) {
    const double c = 1.0 - resid_ms / fit_ms;
    if (std::abs(c - result.shrink_factor) > 1e-10 * std::max(1.0, std::abs(c)))
      throw std::runtime_error("empirical_bayes: internal factor cross-check failed");
  }

  if (n - m - k <= 4) result.warnings.push_back("default p outside dominance interval");
  return result;
}

EstimateResult generalized_bayes(const RegressionData& data, double sigma2, double tau2,
                                 const Matrix& sigma_w) {
  const Index n = data.n(), k = data.k();
  if (!(sigma2 > 0.0) || !(tau2 > 0.0))
    throw ConfigError("generalized_bayes: sigma2 and tau2 must be positive");
  if (sigma_w.rows() != k || sigma_w.cols() != k)
    throw ConfigError("generalized_bayes: sigma_w must be k x k");
  cholesky_sqrt(sigma_w);  // SPD guard

  const CanonicalBasis basis = build_basis(data.x, Matrix(n, 0));
  const Matrix q_perp = basis.qperp();
  const Matrix w_perp = q_perp.transpose() * data.w;
  const Vector y_perp = q_perp.transpose() * data.y;
  const Matrix w_x = basis.qx.transpose() * data.w;
  const Vector y_x = basis.qx.transpose() * data.y;

  Matrix ridge = w_perp.transpose() * w_perp;
  ridge.noalias() += (sigma2 / tau2) * sigma_w;
  Eigen::LLT<Matrix> llt(ridge);
  if (llt.info() != Eigen::Success)
    throw ConfigError("generalized_bayes: ridge system is not positive definite");

  EstimateResult result;
  result.gamma_hat = llt.solve(w_perp.transpose() * y_perp);
  const Vector mu_x = y_x - w_x * result.gamma_hat;
  const Matrix qx_x = basis.qx.transpose() * data.x;
  result.beta_hat = qx_x.partialPivLu().solve(mu_x);

  const Vector fitted_part = data.y - data.x * result.beta_hat - data.w * result.gamma_hat;
  result.alpha_hat = fitted_part.mean();
  result.ssr = (fitted_part.array() - result.alpha_hat).matrix().squaredNorm();
  // No scalar factor applies to this rule.
  result.shrink_factor = std::numeric_limits<double>::quiet_NaN();
  return result;
}

EstimateResult estimate(const RegressionData& data, const EstimatorSpec& spec) {
  switch (spec.kind) {
    case EstimatorKind::kOlsLong:
      return ols_long(data);
    case EstimatorKind::kOlsShort:
      return ols_short(data);
    case EstimatorKind::kShrink:
      return shrink_gamma(data, spec.p, false);
    case EstimatorKind::kShrinkPositivePart:
      return shrink_gamma(data, spec.p, true);
    case EstimatorKind::kEmpiricalBayes:
      return empirical_bayes(data);
    case EstimatorKind::kGeneralizedBayes: {
      const Matrix sigma_w =
          spec.sigma_w ? *spec.sigma_w : Matrix(Matrix::Identity(data.k(), data.k()));
      return generalized_bayes(data, spec.sigma2, spec.tau2, sigma_w);
    }
  }
  throw ConfigError("estimate: unknown estimator kind");
}

Vector first_stage_gamma(const EstimatorSpec& spec, const Vector& y_perp,
                         const Matrix& w_perp) {
  const Index s = y_perp.size();
  const Index k = w_perp.cols();
  if (w_perp.rows() != s) throw ConfigError("first_stage_gamma: dimension mismatch");

  if (spec.kind == EstimatorKind::kOlsShort) return Vector::Zero(k);

  if (spec.kind == EstimatorKind::kGeneralizedBayes) {
    const Matrix sigma_w = spec.sigma_w ? *spec.sigma_w : Matrix(Matrix::Identity(k, k));
    Matrix ridge = w_perp.transpose() * w_perp;
    ridge.noalias() += (spec.sigma2 / spec.tau2) * sigma_w;
    return ridge.llt().solve(w_perp.transpose() * y_perp);
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(w_perp);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < k)
    throw RankError("first_stage_gamma: w block is numerically rank deficient", "w");
  Vector gamma_ols = qr.solve(y_perp);
  if (spec.kind == EstimatorKind::kOlsLong) return gamma_ols;

  const double fit_norm2 = (w_perp * gamma_ols).squaredNorm();
  const double resid_norm2 = (y_perp - w_perp * gamma_ols).squaredNorm();
  double p_used;
  if (spec.p) {
    p_used = *spec.p;
  } else {
    if (s - k <= 0)
      throw ConfigError("first_stage_gamma: default p undefined when s <= k");
    p_used = static_cast<double>(k - 2) / static_cast<double>(s - k);
  }
  double factor =
      fit_norm2 <= 1e-14 * resid_norm2 ? 0.0 : 1.0 - p_used * resid_norm2 / fit_norm2;
  if (spec.kind == EstimatorKind::kShrinkPositivePart) factor = std::max(0.0, factor);
  return factor * gamma_ols;
}

const char* estimator_kind_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kOlsLong:
      return "ols-long";
    case EstimatorKind::kOlsShort:
      return "ols-short";
    case EstimatorKind::kShrink:
      return "shrink";
    case EstimatorKind::kShrinkPositivePart:
      return "shrink-pp";
    case EstimatorKind::kEmpiricalBayes:
      return "eb";
    case EstimatorKind::kGeneralizedBayes:
      return "gbayes";
  }
  return "unknown";
}

std::optional<EstimatorKind> estimator_kind_from_name(const std::string& name) {
  if (name == "ols-long") return EstimatorKind::kOlsLong;
  if (name == "ols-short") return EstimatorKind::kOlsShort;
  if (name == "shrink") return EstimatorKind::kShrink;
  if (name == "shrink-pp") return EstimatorKind::kShrinkPositivePart;
  if (name == "eb") return EstimatorKind::kEmpiricalBayes;
  if (name == "gbayes") return EstimatorKind::kGeneralizedBayes;
  return std::nullopt;
}

}  // namespace shrinkreg
