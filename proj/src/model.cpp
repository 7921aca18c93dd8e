#include "shrinkreg/model.hpp"

#include <cmath>
#include <utility>

namespace shrinkreg {

namespace {

bool symmetric_to_tolerance(const Matrix& s, double rel_tol) {
  const double scale = s.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  return (s - s.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

}  // namespace

void DgpConfig::validate() const {
  if (n < 1 || m < 1 || k < 1) throw ConfigError("n, m, k must be positive");
  if (params.beta.size() != m) throw ConfigError("beta must have length m");
  if (params.gamma.size() != k) throw ConfigError("gamma must have length k");
  if (params.sigma2 < 0.0) throw ConfigError("sigma2 must be nonnegative");
  if (covariates.alpha_w.size() != k) throw ConfigError("alpha_w must have length k");
  if (covariates.beta_w.rows() != m || covariates.beta_w.cols() != k)
    throw ConfigError("beta_w must be m x k");
  if (covariates.sigma_w.rows() != k || covariates.sigma_w.cols() != k)
    throw ConfigError("sigma_w must be k x k");
  if (!symmetric_to_tolerance(covariates.sigma_w, 1e-12))
    throw ConfigError("sigma_w must be symmetric");
  if (x_fixed && (x_fixed->rows() != n || x_fixed->cols() != m))
    throw ConfigError("x_design matrix must be n x m");
}

Matrix cholesky_sqrt(const Matrix& sigma_w) {
  const Index k = sigma_w.rows();
  if (sigma_w.cols() != k) throw ConfigError("cholesky_sqrt: matrix must be square");
  if (!symmetric_to_tolerance(sigma_w, 1e-12))
    throw ConfigError("cholesky_sqrt: matrix must be symmetric");

  Matrix l = Matrix::Zero(k, k);
  for (Index j = 0; j < k; ++j) {
    double d = sigma_w(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0))
      throw ConfigError("cholesky_sqrt: leading minor of order " + std::to_string(j + 1) +
                        " is not positive definite");
    l(j, j) = std::sqrt(d);
    for (Index i = j + 1; i < k; ++i) {
      double s = sigma_w(i, j) - l.row(i).head(j).dot(l.row(j).head(j));
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

Dgp::Dgp(DgpConfig config) : config_(std::move(config)) {
  config_.validate();
  chol_w_ = cholesky_sqrt(config_.covariates.sigma_w);
  if (config_.x_fixed) {
    x_ = *config_.x_fixed;
  } else {
    rng::NormalStream stream(config_.seed, rng::StreamDomain::kDesign, 0);
    x_.resize(config_.n, config_.m);
    for (Index i = 0; i < config_.n; ++i)
      for (Index j = 0; j < config_.m; ++j) x_(i, j) = stream.normal();
  }
}

RegressionData Dgp::simulate(std::uint64_t replication) const {
  const Index n = config_.n, k = config_.k;
  rng::NormalStream stream(config_.seed, rng::StreamDomain::kReplication, replication);

  // Control innovations first, row-major, then the noise vector: the draw
  // order is part of the reproducibility contract.
  Matrix z(n, k);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < k; ++j) z(i, j) = stream.normal();

  RegressionData data;
  data.x = x_;
  data.w = z * chol_w_.transpose();
  data.w.rowwise() += config_.covariates.alpha_w;
  if (!config_.covariates.exogenous()) data.w.noalias() += x_ * config_.covariates.beta_w;

  const double sigma = std::sqrt(config_.params.sigma2);
  Vector noise(n);
  for (Index i = 0; i < n; ++i) noise(i) = sigma * stream.normal();

  data.y = Vector::Constant(n, config_.params.alpha);
  data.y.noalias() += data.x * config_.params.beta;
  data.y.noalias() += data.w * config_.params.gamma;
  data.y += noise;
  return data;
}

RegressionData simulate(const DgpConfig& config, std::uint64_t replication) {
  return Dgp(config).simulate(replication);
}

}  // namespace shrinkreg
