#include "crda/rscm.hpp"

#include "crda/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace crda {

SvdFactors thin_svd_via_gram(const Matrix& Xc, double rank_tol) {
  if (!(rank_tol > 0.0)) {
    throw InvalidArgument("rank_tol must be positive");
  }
  if (Xc.rows() < 1 || Xc.cols() < 1) {
    throw InvalidArgument("thin_svd_via_gram: empty matrix");
  }
  if (!Xc.allFinite()) {
    throw NumericError("thin_svd_via_gram: non-finite entries");
  }
  const Index n = Xc.cols();

  Matrix gram(n, n);
  gram.setZero();
  gram.selfadjointView<Eigen::Lower>().rankUpdate(Xc.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericError("thin_svd_via_gram: eigendecomposition failed");
  }
  const Vector& evals = solver.eigenvalues();  // ascending
  const double top = evals[n - 1];
  if (!(top > 0.0)) {
    throw NumericError("thin_svd_via_gram: centered data has rank zero");
  }
  const double cutoff = rank_tol * rank_tol * top;
  Index m = 0;
  while (m < n && evals[n - 1 - m] > cutoff) {
    ++m;
  }

  SvdFactors f;
  f.n = n;
  f.p = Xc.rows();
  f.d.resize(m);
  f.V.resize(n, m);
  for (Index k = 0; k < m; ++k) {
    f.d[k] = std::sqrt(evals[n - 1 - k]);
    f.V.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  f.U.noalias() = Xc * f.V;
  f.U *= f.d.cwiseInverse().asDiagonal();
  return f;
}

SvdFactors thin_svd_via_gram(const CenteredData& centered, double rank_tol) {
  return thin_svd_via_gram(centered.Xc, rank_tol);
}

double eta(const SvdFactors& factors) {
  if (factors.rank() == 0) {
    throw NumericError("eta: rank-zero factors");
  }
  return factors.d.squaredNorm() /
         (static_cast<double>(factors.n) * static_cast<double>(factors.p));
}

RegularizedCovariance::RegularizedCovariance(std::shared_ptr<const SvdFactors> factors,
                                             double alpha, ShrinkageTarget target)
    : factors_(std::move(factors)), alpha_(alpha), target_(target) {
  if (!factors_) {
    throw InvalidArgument("RegularizedCovariance: null factors");
  }
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw InvalidArgument("alpha must lie in [0, 1), got " + std::to_string(alpha));
  }
  eta_ = crda::eta(*factors_);
  target_scale_ = target == ShrinkageTarget::ScaledIdentity ? eta_ : 1.0;
  const double shrunk = (1.0 - alpha_) * target_scale_;
  outer_ = 1.0 / shrunk;
  const double n = static_cast<double>(factors_->n);
  inner_ = ((alpha_ / n) * factors_->d.array().square() + shrunk).inverse() - outer_;
}

Matrix RegularizedCovariance::inverse_apply(const Matrix& M) const {
  if (M.rows() != factors_->p) {
    throw DataError("inverse_apply: operand has " + std::to_string(M.rows()) +
                    " rows, expected p = " + std::to_string(factors_->p));
  }
  const Matrix UtM = factors_->U.transpose() * M;
  return inverse_apply(M, UtM);
}

Matrix RegularizedCovariance::inverse_apply(const Matrix& M, const Matrix& UtM) const {
  if (M.rows() != factors_->p || UtM.rows() != factors_->rank() || UtM.cols() != M.cols()) {
    throw DataError("inverse_apply: operand dimensions do not match the factors");
  }
  Matrix out = outer_ * M;
  out.noalias() += factors_->U * (inner_.asDiagonal() * UtM);
  return out;
}

Matrix RegularizedCovariance::apply(const Matrix& M) const {
  if (M.rows() != factors_->p) {
    throw DataError("apply: operand row count does not match p");
  }
  const double n = static_cast<double>(factors_->n);
  const Vector scaled = (alpha_ / n) * factors_->d.array().square();
  Matrix out = ((1.0 - alpha_) * target_scale_) * M;
  out.noalias() += factors_->U * (scaled.asDiagonal() * (factors_->U.transpose() * M));
  return out;
}

Matrix RegularizedCovariance::dense() const {
  const Index p = factors_->p;
  return apply(Matrix::Identity(p, p));
}

Matrix RegularizedCovariance::dense_inverse() const {
  const Index p = factors_->p;
  Matrix out = outer_ * Matrix::Identity(p, p);
  out.noalias() += factors_->U * inner_.asDiagonal() * factors_->U.transpose();
  return out;
}

RegularizedCovariance build_rscm(std::shared_ptr<const SvdFactors> factors, double alpha,
                                 ShrinkageTarget target) {
  return RegularizedCovariance(std::move(factors), alpha, target);
}

RegularizedCovariance build_rscm(const SvdFactors& factors, double alpha, ShrinkageTarget target) {
  return RegularizedCovariance(std::make_shared<const SvdFactors>(factors), alpha, target);
}

Matrix inverse_apply(const RegularizedCovariance& rc, const Matrix& M) {
  return rc.inverse_apply(M);
}

namespace {

// Ledoit-Wolf weight from Gram-matrix summaries of the p x n centered data:
// trace(G), ||G||_F^2 and sum_i G_ii^2.
double lw_from_gram(double trace, double frob2, double diag_sq, double n, double p) {
  if (!(trace > 0.0)) {
    throw NumericError("estimate_alpha_lw: centered data has rank zero");
  }
  const double tr_s = trace / n;
  const double s_frob2 = frob2 / (n * n);
  const double dist2 = s_frob2 - tr_s * tr_s / p;
  if (!(dist2 > 1e-14 * s_frob2)) {
    // S already equals eta * I; every alpha gives the same estimate.
    return 0.0;
  }
  const double spread = std::max(0.0, diag_sq - frob2 / n) / (n * n);
  const double b2 = std::min(dist2, spread);
  const double alpha = 1.0 - std::min(1.0, b2 / dist2);
  return std::clamp(alpha, 0.0, kMaxShrinkageAlpha);
}

} // namespace

double estimate_alpha_lw(const Matrix& Xc) {
  if (Xc.cols() < 2) {
    throw InvalidArgument("estimate_alpha_lw needs at least two samples");
  }
  Matrix gram(Xc.cols(), Xc.cols());
  gram.setZero();
  gram.selfadjointView<Eigen::Lower>().rankUpdate(Xc.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();
  return lw_from_gram(gram.trace(), gram.squaredNorm(), gram.diagonal().squaredNorm(),
                      static_cast<double>(Xc.cols()), static_cast<double>(Xc.rows()));
}

double estimate_alpha_lw(const CenteredData& centered) {
  return estimate_alpha_lw(centered.Xc);
}

double estimate_alpha_lw(const SvdFactors& factors) {
  if (factors.n < 2) {
    throw InvalidArgument("estimate_alpha_lw needs at least two samples");
  }
  if (factors.rank() == 0) {
    throw NumericError("estimate_alpha_lw: rank-zero factors");
  }
  const Vector d2 = factors.d.array().square();
  const Vector gram_diag = factors.V.array().square().matrix() * d2;
  return lw_from_gram(d2.sum(), d2.squaredNorm(), gram_diag.squaredNorm(),
                      static_cast<double>(factors.n), static_cast<double>(factors.p));
}

} // namespace crda
