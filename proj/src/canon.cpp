#include "shrinkreg/canon.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

namespace shrinkreg {

namespace {

// Thin Q of a full-column-rank matrix, each column flipped so the
// corresponding diagonal of R is non-negative.
Matrix thin_q_sign_fixed(const Matrix& a) {
  const Index cols = a.cols();
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), cols);
  for (Index j = 0; j < cols; ++j) {
    if (qr.matrixQR()(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Index numerical_rank(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double tol = kRankTolerance * sv(0);
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;
  return rank;
}

Matrix with_constant_column(const Matrix& x) {
  Matrix a(x.rows(), x.cols() + 1);
  a.col(0).setOnes();
  a.rightCols(x.cols()) = x;
  return a;
}

}  // namespace

Matrix CanonicalBasis::qperp() const {
  Matrix q(n(), qw.cols() + qr.cols());
  q.leftCols(qw.cols()) = qw;
  q.rightCols(qr.cols()) = qr;
  return q;
}

CanonicalBasis build_basis(const Matrix& x, const Matrix& w) {
  const Index n = x.rows();
  const Index m = x.cols();
  const Index k = w.cols();
  if (k > 0 && w.rows() != n) throw ConfigError("build_basis: x and w row counts differ");
  if (n < 1 + m + k)
    throw RankError("build_basis: need n >= 1 + m + k for a full-rank canonical form");

  const Matrix one_x = with_constant_column(x);
  if (numerical_rank(one_x) < 1 + m)
    throw RankError("build_basis: columns of (1, x) are numerically dependent", "x");
  Matrix full(n, 1 + m + k);
  full.leftCols(1 + m) = one_x;
  if (k > 0) {
    full.rightCols(k) = w;
    if (numerical_rank(full) < 1 + m + k)
      throw RankError("build_basis: columns of w are numerically dependent on (1, x, w)",
                      "w");
  }

  CanonicalBasis basis;
  basis.q1 = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));

  Matrix x_res = x - basis.q1 * (basis.q1.transpose() * x);
  basis.qx = thin_q_sign_fixed(x_res);

  if (k > 0) {
    Matrix w_res = w - basis.q1 * (basis.q1.transpose() * w);
    w_res.noalias() -= basis.qx * (basis.qx.transpose() * w_res);
    basis.qw = thin_q_sign_fixed(w_res);
  } else {
    basis.qw.resize(n, 0);
  }

  // Any orthonormal completion works; take the trailing columns of the full
  // Householder factor of (1, x, w).
  Eigen::HouseholderQR<Matrix> qr_full(full);
  Matrix q_all = qr_full.householderQ() * Matrix::Identity(n, n);
  basis.qr = q_all.rightCols(n - 1 - m - k);
  return basis;
}

CanonicalForm transform(const Vector& y, const CanonicalBasis& basis, const Matrix& x,
                        const Matrix& w) {
  if (y.size() != basis.n() || x.rows() != basis.n() || x.cols() != basis.m() ||
      w.rows() != basis.n() || w.cols() != basis.k())
    throw ConfigError("transform: dimensions inconsistent with basis");

  CanonicalForm form;
  form.y_star_1 = basis.q1.dot(y);
  form.y_star_x = basis.qx.transpose() * y;
  form.y_star_w = basis.qw.transpose() * y;
  form.y_star_r = basis.qr.transpose() * y;
  form.qx_x = basis.qx.transpose() * x;

  {
    Eigen::JacobiSVD<Matrix> svd(form.qx_x);
    const auto& sv = svd.singularValues();
    form.qx_x_cond = (sv.size() > 0 && sv(sv.size() - 1) > 0.0)
                         ? sv(0) / sv(sv.size() - 1)
                         : std::numeric_limits<double>::infinity();
  }

  const Index k = basis.k();
  if (k > 0) {
    const Matrix qw_w = basis.qw.transpose() * w;  // k x k
    // a = (qx'w)(qw'w)^{-1} via a solve on the transposed system.
    Eigen::FullPivLU<Matrix> lu(qw_w.transpose());
    lu.setThreshold(kRankTolerance);
    if (!lu.isInvertible())
      throw RankError("transform: qw'w is numerically singular", "w");
    const Matrix qx_w = basis.qx.transpose() * w;  // m x k
    form.a = lu.solve(qx_w.transpose()).transpose();
  } else {
    form.a.resize(basis.m(), 0);
  }
  return form;
}

GroupElement GroupElement::identity(Index m, Index k, Index s) {
  GroupElement g;
  g.g_mu = Vector::Zero(m);
  g.g_x = Matrix::Identity(m, m);
  g.g_w = Matrix::Identity(k, k);
  g.g_perp = Matrix::Identity(s, s);
  return g;
}

CanonicalSample to_canonical_sample(const CanonicalBasis& basis, const Vector& y,
                                    const Matrix& w) {
  const Matrix qperp = basis.qperp();
  CanonicalSample sample;
  sample.y_x = basis.qx.transpose() * y;
  sample.y_perp = qperp.transpose() * y;
  sample.w_x = basis.qx.transpose() * w;
  sample.w_perp = qperp.transpose() * w;
  return sample;
}

Matrix symmetric_sqrt(const Matrix& spd) {
  if (spd.rows() != spd.cols()) throw ConfigError("symmetric_sqrt: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(spd);
  if (eig.info() != Eigen::Success)
    throw ConfigError("symmetric_sqrt: eigendecomposition failed");
  Vector values = eig.eigenvalues();
  const double max_value = values.size() > 0 ? values.maxCoeff() : 0.0;
  if (!(max_value > 0.0))
    throw ConfigError("symmetric_sqrt: matrix is not positive definite");
  const double floor = 1e-14 * max_value;
  for (Index i = 0; i < values.size(); ++i) {
    if (values(i) < floor) values(i) = floor;
  }
  return eig.eigenvectors() * values.cwiseSqrt().asDiagonal() *
         eig.eigenvectors().transpose();
}

namespace {

// Column transform on the control blocks: sigma^{-1/2} g_w' sigma^{1/2}.
Matrix control_transform(const GroupElement& g, const Matrix& sigma_w) {
  const Matrix root = symmetric_sqrt(sigma_w);
  Eigen::LLT<Matrix> llt(root);  // root is SPD; solve instead of inverting
  return llt.solve(g.g_w.transpose() * root);
}

}  // namespace

CanonicalSample apply_group_data(const GroupElement& g, const CanonicalSample& sample,
                                 const Matrix& sigma_w) {
  if (g.g_mu.size() != sample.y_x.size() || g.g_perp.rows() != sample.y_perp.size() ||
      g.g_w.rows() != sample.w_x.cols())
    throw ConfigError("apply_group_data: dimension mismatch");
  const Matrix t = control_transform(g, sigma_w);
  CanonicalSample out;
  out.y_x = g.g_x * sample.y_x + g.g_mu;
  out.y_perp = g.g_perp * sample.y_perp;
  out.w_x = g.g_x * sample.w_x * t;
  out.w_perp = g.g_perp * sample.w_perp * t;
  return out;
}

CanonicalTheta apply_group_params(const GroupElement& g, const CanonicalTheta& theta,
                                  const Matrix& sigma_w) {
  if (g.g_mu.size() != theta.mu_x.size() || g.g_w.rows() != theta.gamma.size())
    throw ConfigError("apply_group_params: dimension mismatch");
  const Matrix root = symmetric_sqrt(sigma_w);
  Eigen::LLT<Matrix> llt(root);
  CanonicalTheta out;
  out.mu_x = g.g_x * theta.mu_x + g.g_mu;
  out.gamma = llt.solve(g.g_w * (root * theta.gamma));
  return out;
}

GroupElement compose(const GroupElement& outer, const GroupElement& inner) {
  GroupElement g;
  g.g_mu = outer.g_x * inner.g_mu + outer.g_mu;
  g.g_x = outer.g_x * inner.g_x;
  g.g_w = outer.g_w * inner.g_w;
  g.g_perp = outer.g_perp * inner.g_perp;
  return g;
}

CanonicalSample canonical_mean_sample(const CanonicalTheta& theta, Index k, Index s) {
  CanonicalSample mean;
  mean.y_x = theta.mu_x;
  mean.y_perp = Vector::Zero(s);
  mean.w_x = Matrix::Zero(theta.mu_x.size(), k);
  mean.w_perp = Matrix::Zero(s, k);
  return mean;
}

Matrix random_orthogonal(Index dim, rng::NormalStream& stream) {
  Matrix a(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) a(i, j) = stream.normal();
  return thin_q_sign_fixed(a);
}

}  // namespace shrinkreg
