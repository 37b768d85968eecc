#pragma once

#include "crda/dataset.hpp"

#include <memory>

namespace crda {

/// Relative singular-value cutoff used by thin_svd_via_gram. Directions with
/// d_i <= rank_tol * d_max are dropped. The Gram route squares the
/// condition number, so singular values much below sqrt(machine epsilon)
/// times d_max cannot be resolved and are treated as zero.
inline constexpr double kDefaultRankTol = 1e-6;

/// Thin SVD Xc = U diag(d) V^T of a centered p x n matrix, rank m.
struct SvdFactors {
  Matrix U;   // p x m, orthonormal columns
  Vector d;   // m singular values, positive, non-increasing
  Matrix V;   // n x m, orthonormal columns
  Index n = 0;
  Index p = 0;

  Index rank() const { return d.size(); }
};

/// Computes the thin SVD from the eigendecomposition of the n x n Gram
/// matrix Xc^T Xc, then recovers U = Xc V D^-1. Cost O(p n^2 + n^3).
/// Throws NumericError on rank zero or non-finite input.
SvdFactors thin_svd_via_gram(const Matrix& Xc, double rank_tol = kDefaultRankTol);
SvdFactors thin_svd_via_gram(const CenteredData& centered, double rank_tol = kDefaultRankTol);

/// tr(S) / p for the pooled SCM S = (1/n) Xc Xc^T.
double eta(const SvdFactors& factors);

/// Scale of the identity the sample covariance is shrunk toward.
enum class ShrinkageTarget {
  ScaledIdentity,  ///< eta * I with eta = tr(S) / p
  Identity,        ///< I (soft-thresholding baseline)
};

/// alpha * S + (1 - alpha) * tau * I held in factored form, where tau is
/// eta or 1 depending on the target. Its inverse is
///   U diag(inner) U^T + outer * I,
/// inner_i = (alpha d_i^2 / n + (1 - alpha) tau)^-1 - outer,
/// outer = ((1 - alpha) tau)^-1.
/// No p x p matrix is formed except by dense() and dense_inverse().
class RegularizedCovariance {
public:
  RegularizedCovariance(std::shared_ptr<const SvdFactors> factors, double alpha,
                        ShrinkageTarget target = ShrinkageTarget::ScaledIdentity);

  const SvdFactors& factors() const { return *factors_; }
  double alpha() const { return alpha_; }
  double eta() const { return eta_; }
  /// eta for ScaledIdentity, 1 for Identity.
  double target_scale() const { return target_scale_; }
  ShrinkageTarget target() const { return target_; }
  const Vector& inner() const { return inner_; }
  double outer() const { return outer_; }

  /// Sigma^-1 M for a p x k matrix M in O(p m k).
  Matrix inverse_apply(const Matrix& M) const;
  /// Same, reusing a precomputed U^T M (m x k).
  Matrix inverse_apply(const Matrix& M, const Matrix& UtM) const;
  /// Sigma M.
  Matrix apply(const Matrix& M) const;

  Matrix dense() const;
  Matrix dense_inverse() const;

private:
  std::shared_ptr<const SvdFactors> factors_;
  double alpha_;
  ShrinkageTarget target_;
  double eta_;
  double target_scale_;
  Vector inner_;
  double outer_;
};

/// Throws InvalidArgument unless alpha is in [0, 1).
RegularizedCovariance build_rscm(std::shared_ptr<const SvdFactors> factors, double alpha,
                                 ShrinkageTarget target = ShrinkageTarget::ScaledIdentity);
RegularizedCovariance build_rscm(const SvdFactors& factors, double alpha,
                                 ShrinkageTarget target = ShrinkageTarget::ScaledIdentity);

Matrix inverse_apply(const RegularizedCovariance& rc, const Matrix& M);

inline constexpr double kMaxShrinkageAlpha = 1.0 - 1e-6;

/// Ledoit-Wolf type closed-form weight for alpha * S + (1 - alpha) eta I:
///   alpha = 1 - min(1, b^2 / d^2),
///   d^2 = ||S - eta I||_F^2,
///   b^2 = min(d^2, n^-2 sum_i ||x_i x_i^T - S||_F^2),
/// clipped to [0, kMaxShrinkageAlpha]. All norms come from the n x n Gram
/// matrix, so the cost is O(n^2 p).
double estimate_alpha_lw(const Matrix& Xc);
double estimate_alpha_lw(const CenteredData& centered);
/// Same estimate computed from the thin SVD (Gram = V D^2 V^T).
double estimate_alpha_lw(const SvdFactors& factors);

} // namespace crda
