#pragma once

#include "shrinkreg/model.hpp"

namespace shrinkreg {

// Orthonormal basis aligned with (1, x, w): q1 spans the constant column,
// (q1, qx) spans (1, x), (q1, qx, qw) spans (1, x, w), and qr completes the
// basis of R^n. Immutable after construction.
struct CanonicalBasis {
  Vector q1;  // n
  Matrix qx;  // n x m
  Matrix qw;  // n x k
  Matrix qr;  // n x (n-1-m-k)

  Index n() const { return q1.size(); }
  Index m() const { return qx.cols(); }
  Index k() const { return qw.cols(); }

  // Completion of (q1, qx): columns of qw followed by qr, n x (n-1-m).
  Matrix qperp() const;
};

// The regression rotated into a Normal-means problem.
struct CanonicalForm {
  double y_star_1 = 0.0;  // intercept coordinate, kept for norm checks
  Vector y_star_x;        // m
  Vector y_star_w;        // k
  Vector y_star_r;        // n-1-m-k
  Matrix a;               // m x k, qx'w (qw'w)^{-1}
  Matrix qx_x;            // m x m, qx'x, invertible
  double qx_x_cond = 0.0;
};

// Numerical-rank tolerance, relative to the largest singular value.
inline constexpr double kRankTolerance = 1e-10;

// Three-stage Householder QR: the constant column, then x projected off 1,
// then w projected off (1, x); each stage's factor is chosen with a
// non-negative diagonal so the basis is deterministic. w may have zero
// columns, in which case qw is empty and qr completes (q1, qx).
CanonicalBasis build_basis(const Matrix& x, const Matrix& w);

CanonicalForm transform(const Vector& y, const CanonicalBasis& basis,
                        const Matrix& x, const Matrix& w);

// Element of the invariance group: a translation of the treatment
// coordinates plus rotations of the treatment, control, and residual blocks.
struct GroupElement {
  Vector g_mu;    // m
  Matrix g_x;     // m x m orthogonal
  Matrix g_w;     // k x k orthogonal
  Matrix g_perp;  // s x s orthogonal, s = n-m-1

  static GroupElement identity(Index m, Index k, Index s);
};

// Canonical sample (q_x'y, q_perp'y, q_x'w, q_perp'w).
struct CanonicalSample {
  Vector y_x;     // m
  Vector y_perp;  // s
  Matrix w_x;     // m x k
  Matrix w_perp;  // s x k
};

struct CanonicalTheta {
  Vector mu_x;   // m
  Vector gamma;  // k
};

CanonicalSample to_canonical_sample(const CanonicalBasis& basis, const Vector& y,
                                    const Matrix& w);

// Unique symmetric positive-definite square root, by eigendecomposition with
// eigenvalues clamped at 1e-14 times the largest.
Matrix symmetric_sqrt(const Matrix& spd);

CanonicalSample apply_group_data(const GroupElement& g, const CanonicalSample& sample,
                                 const Matrix& sigma_w);

CanonicalTheta apply_group_params(const GroupElement& g, const CanonicalTheta& theta,
                                  const Matrix& sigma_w);

// Composition such that applying `inner` first and then `outer` equals
// applying the composed element. The translation part composes affinely
// through the outer rotation.
GroupElement compose(const GroupElement& outer, const GroupElement& inner);

// Mean of the canonical sample under exogenous treatment (the control blocks
// are centered, so only the treatment coordinates carry signal).
CanonicalSample canonical_mean_sample(const CanonicalTheta& theta, Index k, Index s);

// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
// sign-fixed factor).
Matrix random_orthogonal(Index dim, rng::NormalStream& stream);

}  // namespace shrinkreg
