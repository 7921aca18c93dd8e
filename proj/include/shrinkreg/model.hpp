#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "shrinkreg/errors.hpp"
#include "shrinkreg/rng.hpp"

namespace shrinkreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

// Raw observations: outcome, treatment regressors, controls.
struct RegressionData {
  Vector y;  // n
  Matrix x;  // n x m
  Matrix w;  // n x k

  Index n() const { return y.size(); }
  Index m() const { return x.cols(); }
  Index k() const { return w.cols(); }
};

// Ground-truth regression parameters.
struct ModelParams {
  double alpha = 0.0;
  Vector beta;   // m
  Vector gamma;  // k
  double sigma2 = 1.0;
};

// Conditional Gaussian model for the control rows given the design.
struct CovariateModel {
  RowVector alpha_w;  // 1 x k
  Matrix beta_w;      // m x k
  Matrix sigma_w;     // k x k, symmetric positive-definite

  // Exogenous treatment means the controls are mean-independent of x.
  bool exogenous() const { return beta_w.size() == 0 || beta_w.isZero(0.0); }
};

// Everything a simulation experiment needs. When x_fixed is empty the design
// is drawn once from standard Gaussians (a pure function of the seed) and
// held fixed across replications.
struct DgpConfig {
  Index n = 0;
  Index m = 0;
  Index k = 0;
  ModelParams params;
  CovariateModel covariates;
  std::optional<Matrix> x_fixed;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

// Lower-triangular L with L L^T = sigma_w. Errors name the first
// non-positive-definite leading minor.
Matrix cholesky_sqrt(const Matrix& sigma_w);

// DGP with the design and the covariance factor materialized once, so that
// per-replication sampling stays cheap and the design is shared bit-exactly.
class Dgp {
 public:
  explicit Dgp(DgpConfig config);

  const DgpConfig& config() const { return config_; }
  const Matrix& x() const { return x_; }

  // Deterministic in (config.seed, replication): the replication substream
  // draws the control innovations row-major, then the noise vector.
  RegressionData simulate(std::uint64_t replication) const;

 private:
  DgpConfig config_;
  Matrix x_;       // n x m design, fixed across replications
  Matrix chol_w_;  // lower Cholesky factor of sigma_w
};

// One-shot form of Dgp::simulate.
RegressionData simulate(const DgpConfig& config, std::uint64_t replication);

}  // namespace shrinkreg
