#include "crda/classifier.hpp"

#include "crda/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crda {

std::string to_string(RowNorm q) {
  switch (q) {
  case RowNorm::L1:
    return "1";
  case RowNorm::L2:
    return "2";
  case RowNorm::Linf:
    return "inf";
  }
  return "?";
}

RowNorm parse_row_norm(std::string_view text) {
  if (text == "1" || text == "l1" || text == "L1") {
    return RowNorm::L1;
  }
  if (text == "2" || text == "l2" || text == "L2") {
    return RowNorm::L2;
  }
  if (text == "inf" || text == "linf" || text == "Linf" || text == "infinity") {
    return RowNorm::Linf;
  }
  throw InvalidArgument("row norm must be 1, 2 or inf, got '" + std::string(text) + "'");
}

Vector row_norms(const Matrix& B, RowNorm q) {
  switch (q) {
  case RowNorm::L1:
    return B.cwiseAbs().rowwise().sum();
  case RowNorm::L2:
    return B.rowwise().norm();
  case RowNorm::Linf:
    if (B.cols() == 0) {
      return Vector::Zero(B.rows());
    }
    return B.cwiseAbs().rowwise().maxCoeff();
  }
  return {};
}

std::vector<Index> rank_rows(const Vector& norms) {
  std::vector<Index> order(static_cast<std::size_t>(norms.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return norms[a] > norms[b]; });
  return order;
}

std::vector<Index> nonzero_rows(const Matrix& B) {
  std::vector<Index> rows;
  for (Index i = 0; i < B.rows(); ++i) {
    if ((B.row(i).array() != 0.0).any()) {
      rows.push_back(i);
    }
  }
  return rows;
}

CoefficientMatrix hard_threshold(const Matrix& T, Index K, RowNorm q) {
  if (K < 1 || K > T.rows()) {
    throw InvalidArgument("K must lie in [1, " + std::to_string(T.rows()) + "], got " +
                          std::to_string(K));
  }
  const auto order = rank_rows(row_norms(T, q));
  CoefficientMatrix out;
  out.kind = SparsityKind::Hard;
  out.q = q;
  out.k = K;
  out.B = Matrix::Zero(T.rows(), T.cols());
  for (Index r = 0; r < K; ++r) {
    const Index i = order[static_cast<std::size_t>(r)];
    out.B.row(i) = T.row(i);
  }
  out.support = nonzero_rows(out.B);
  return out;
}

CoefficientMatrix soft_threshold(const Matrix& T, double delta) {
  if (!(delta >= 0.0)) {
    throw InvalidArgument("soft threshold must be non-negative");
  }
  CoefficientMatrix out;
  out.kind = SparsityKind::Soft;
  out.delta = delta;
  out.B = T.unaryExpr([delta](double t) {
    const double mag = std::abs(t) - delta;
    return mag > 0.0 ? std::copysign(mag, t) : 0.0;
  });
  out.support = nonzero_rows(out.B);
  return out;
}

Matrix coefficient_matrix(const RegularizedCovariance& rc, const ClassMeans& means) {
  return rc.inverse_apply(means.means);
}

Vector equal_priors(int groups) {
  return Vector::Constant(groups, 1.0 / static_cast<double>(groups));
}

Vector resolve_log_priors(const std::optional<Vector>& priors, const ClassMeans& means) {
  if (!priors) {
    return means.proportions.array().log();
  }
  const Vector& pr = *priors;
  if (pr.size() != means.groups()) {
    throw InvalidArgument("expected " + std::to_string(means.groups()) + " priors, got " +
                          std::to_string(pr.size()));
  }
  if ((pr.array() <= 0.0).any() || !pr.allFinite()) {
    throw InvalidArgument("priors must be positive");
  }
  if (std::abs(pr.sum() - 1.0) > 1e-9) {
    throw InvalidArgument("priors must sum to 1");
  }
  return pr.array().log();
}

TrainedModel make_model(CoefficientMatrix coef, const ClassMeans& means, Vector log_priors,
                        Hyperparameters hyper, const LabeledDataset& ds) {
  TrainedModel model;
  model.p = ds.p();
  model.means = means.means;
  model.diag_term = 0.5 * (means.means.cwiseProduct(coef.B)).colwise().sum().transpose();
  model.coef = std::move(coef);
  model.log_priors = std::move(log_priors);
  model.hyper = hyper;
  model.group_names = ds.group_names();
  model.feature_names = ds.feature_names();
  return model;
}

namespace {

struct Fitted {
  ClassMeans means;
  std::shared_ptr<const SvdFactors> factors;
  Vector log_priors;
};

Fitted fit_covariance(const LabeledDataset& ds, const std::optional<Vector>& priors,
                      double rank_tol) {
  Fitted f;
  f.means = class_means(ds);
  f.log_priors = resolve_log_priors(priors, f.means);
  const auto centered = center_by_class(ds, f.means);
  f.factors = std::make_shared<const SvdFactors>(thin_svd_via_gram(centered, rank_tol));
  return f;
}

} // namespace

TrainedModel train(const LabeledDataset& ds, const TrainOptions& options) {
  if (options.k < 1 || options.k > ds.p()) {
    throw InvalidArgument("K must lie in [1, " + std::to_string(ds.p()) + "], got " +
                          std::to_string(options.k));
  }
  auto fitted = fit_covariance(ds, options.priors, options.rank_tol);
  const auto rc = build_rscm(fitted.factors, options.alpha);
  auto coef = hard_threshold(coefficient_matrix(rc, fitted.means), options.k, options.q);
  Hyperparameters hyper;
  hyper.alpha = options.alpha;
  hyper.target = ShrinkageTarget::ScaledIdentity;
  hyper.kind = SparsityKind::Hard;
  hyper.q = options.q;
  hyper.k = options.k;
  return make_model(std::move(coef), fitted.means, std::move(fitted.log_priors), hyper, ds);
}

TrainedModel train_soft(const LabeledDataset& ds, const SoftTrainOptions& options) {
  auto fitted = fit_covariance(ds, options.priors, options.rank_tol);
  const auto rc = build_rscm(fitted.factors, options.alpha, options.target);
  auto coef = soft_threshold(coefficient_matrix(rc, fitted.means), options.delta);
  Hyperparameters hyper;
  hyper.alpha = options.alpha;
  hyper.target = options.target;
  hyper.kind = SparsityKind::Soft;
  hyper.delta = options.delta;
  return make_model(std::move(coef), fitted.means, std::move(fitted.log_priors), hyper, ds);
}

namespace {

void check_columns(const TrainedModel& model, const Matrix& X) {
  if (X.cols() != model.p) {
    throw DataError("model expects p = " + std::to_string(model.p) + " features, data has " +
                    std::to_string(X.cols()));
  }
}

} // namespace

Matrix discriminants(const TrainedModel& model, const Matrix& X) {
  check_columns(model, X);
  const Eigen::RowVectorXd offset = (model.log_priors - model.diag_term).transpose();
  Matrix d = offset.replicate(X.rows(), 1);
  for (Index i : model.coef.support) {
    d.noalias() += X.col(i) * model.coef.B.row(i);
  }
  return d;
}

Matrix discriminants_dense(const TrainedModel& model, const Matrix& X) {
  check_columns(model, X);
  Matrix d = X * model.coef.B;
  d.rowwise() += (model.log_priors - model.diag_term).transpose();
  return d;
}

int argmax_group(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  int best = 0;
  for (Index g = 1; g < row.size(); ++g) {
    if (row[g] > row[best]) {
      best = static_cast<int>(g);
    }
  }
  return best;
}

std::vector<int> predict(const TrainedModel& model, const Matrix& X) {
  const Matrix d = discriminants(model, X);
  std::vector<int> out(static_cast<std::size_t>(d.rows()));
  for (Index i = 0; i < d.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = argmax_group(d.row(i));
  }
  return out;
}

std::vector<std::string> predict_labels(const TrainedModel& model, const Matrix& X) {
  const auto groups = predict(model, X);
  std::vector<std::string> out;
  out.reserve(groups.size());
  for (int g : groups) {
    out.push_back(model.group_names[static_cast<std::size_t>(g)]);
  }
  return out;
}

std::vector<Index> selected_features(const TrainedModel& model) {
  return model.coef.support;
}

std::vector<std::string> selected_feature_names(const TrainedModel& model) {
  std::vector<std::string> names;
  names.reserve(model.coef.support.size());
  for (Index i : model.coef.support) {
    names.push_back(model.feature_names.empty()
                        ? "f" + std::to_string(i + 1)
                        : model.feature_names[static_cast<std::size_t>(i)]);
  }
  return names;
}

} // namespace crda
