#pragma once

#include "crda/dataset.hpp"
#include "crda/rscm.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crda {

/// Row norm used to rank features for hard thresholding.
enum class RowNorm { L1, L2, Linf };

std::string to_string(RowNorm q);
/// Accepts "1", "2", "inf" (also "l1", "l2", "linf").
RowNorm parse_row_norm(std::string_view text);

/// ||B_[i]||_q for every row i.
Vector row_norms(const Matrix& B, RowNorm q);

/// Row indices sorted by decreasing norm; equal norms keep the smaller
/// index first.
std::vector<Index> rank_rows(const Vector& norms);

enum class SparsityKind { Hard, Soft };

/// Thresholded p x G coefficient matrix. `support` lists (ascending) the
/// rows with at least one nonzero entry.
struct CoefficientMatrix {
  Matrix B;
  std::vector<Index> support;
  SparsityKind kind = SparsityKind::Hard;
  std::optional<RowNorm> q;  // set for hard thresholding
  Index k = 0;               // hard: joint-sparsity level
  double delta = 0.0;        // soft: threshold
};

std::vector<Index> nonzero_rows(const Matrix& B);

/// Keeps the K rows with largest l_q norm verbatim, zeroes the rest.
/// Ties at rank K keep the smaller row index. Requires 1 <= K <= p.
CoefficientMatrix hard_threshold(const Matrix& T, Index K, RowNorm q);

/// Element-wise sign(t) * max(|t| - delta, 0). Requires delta >= 0.
CoefficientMatrix soft_threshold(const Matrix& T, double delta);

/// Pre-threshold coefficients Sigma^-1 M.
Matrix coefficient_matrix(const RegularizedCovariance& rc, const ClassMeans& means);

struct Hyperparameters {
  double alpha = 0.0;
  ShrinkageTarget target = ShrinkageTarget::ScaledIdentity;
  SparsityKind kind = SparsityKind::Hard;
  std::optional<RowNorm> q;
  Index k = 0;
  double delta = 0.0;
};

/// Discriminant d(x) = x^T B - diag_term + log_priors.
struct TrainedModel {
  Index p = 0;
  CoefficientMatrix coef;
  /// p x G class means. Rows outside the support may be zero on a model
  /// read back from disk; they never enter the discriminant.
  Matrix means;
  Vector log_priors;
  /// 0.5 * diag(M^T B) using the thresholded B.
  Vector diag_term;
  Hyperparameters hyper;
  std::vector<std::string> group_names;
  std::vector<std::string> feature_names;

  int groups() const { return static_cast<int>(log_priors.size()); }
};

struct TrainOptions {
  double alpha = 0.5;
  Index k = 1;
  RowNorm q = RowNorm::Linf;
  /// Positive, summing to one. Defaults to the sample proportions.
  std::optional<Vector> priors;
  double rank_tol = kDefaultRankTol;
};

struct SoftTrainOptions {
  double alpha = 0.5;
  double delta = 0.0;
  ShrinkageTarget target = ShrinkageTarget::Identity;
  std::optional<Vector> priors;
  double rank_tol = kDefaultRankTol;
};

/// Compressive RDA: means -> centering -> thin SVD -> RSCM -> Sigma^-1 M ->
/// hard threshold.
TrainedModel train(const LabeledDataset& ds, const TrainOptions& options);

/// Soft-thresholding baseline with element-wise shrinkage.
TrainedModel train_soft(const LabeledDataset& ds, const SoftTrainOptions& options);

/// Log priors after validating (size G, positive, sum within 1e-9 of 1);
/// sample proportions when `priors` is empty.
Vector resolve_log_priors(const std::optional<Vector>& priors, const ClassMeans& means);

/// Equal priors 1/G.
Vector equal_priors(int groups);

/// Assembles a model from a thresholded coefficient matrix.
TrainedModel make_model(CoefficientMatrix coef, const ClassMeans& means, Vector log_priors,
                        Hyperparameters hyper, const LabeledDataset& ds);

/// k x G discriminants for k samples (rows of X), touching only support rows.
Matrix discriminants(const TrainedModel& model, const Matrix& X);
/// Same, via the full dense p x G product.
Matrix discriminants_dense(const TrainedModel& model, const Matrix& X);

/// Argmax over a discriminant row; ties go to the smaller group index.
int argmax_group(const Eigen::Ref<const Eigen::RowVectorXd>& row);

/// Group index per sample.
std::vector<int> predict(const TrainedModel& model, const Matrix& X);
/// Original label names per sample.
std::vector<std::string> predict_labels(const TrainedModel& model, const Matrix& X);

std::vector<Index> selected_features(const TrainedModel& model);
std::vector<std::string> selected_feature_names(const TrainedModel& model);

} // namespace crda
