#pragma once

#include "crda/classifier.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

namespace crda {

using CountMatrix = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>;

/// Candidate (alpha, K) values. alphas in [0, 1), ks strictly increasing
/// in [1, p].
struct Grid {
  std::vector<double> alphas;
  std::vector<Index> ks;

  void validate(Index p) const;
};

/// 25 alphas i/25 (i = 0..24) and 100 K values spread uniformly over
/// [1, p], rounded and deduplicated.
Grid default_grids(Index p);
std::vector<double> default_alphas();
std::vector<Index> default_ks(Index p);

/// Fold index per sample, in [0, count). A value of -1 marks a sample that
/// is always used for training and never scored.
struct Folds {
  std::vector<int> fold_of;
  int count = 0;

  Index scored() const;
};

/// Stratified Q-fold assignment: each group is shuffled with `seed` and
/// dealt round-robin, continuing the fold counter across groups.
Folds make_folds(const std::vector<int>& labels, int groups, int Q, std::uint64_t seed);

/// One scored fold made of the last `n_validation` samples.
Folds holdout_folds(Index n_train, Index n_validation);

/// Floor of the CV-error admissibility threshold, as a fraction of the
/// number of scored samples.
inline constexpr double kDefaultThresholdFraction = 0.15;

struct SearchOptions {
  std::optional<Vector> priors;
  double rank_tol = kDefaultRankTol;
  double threshold_fraction = kDefaultThresholdFraction;
};

/// Held-out misclassifications summed over folds, training on each
/// complement with train()/predict(). Throws DataError naming the fold if
/// a complement misses a group.
Index cv_error(const LabeledDataset& ds, double alpha, Index K, RowNorm q, const Folds& folds,
               const SearchOptions& options = {});

/// max(fraction * n, eps_cv); fraction defaults to 0.15.
double error_threshold(Index n, Index eps_cv,
                       double fraction = kDefaultThresholdFraction);

struct Selection {
  Index row = 0;  // alpha index
  Index col = 0;  // K (or delta) index
  Index eps_cv = 0;
  double eps_thr = 0.0;
};

/// Among cells with error <= eps_thr, the one with minimal NFS. Ties go to
/// the smaller error, then the sparser column (smaller K, or larger delta
/// when `sparser_is_larger_col`), then the smaller alpha.
Selection select_pair(const CountMatrix& errors, const CountMatrix& nfs, Index n,
                      bool sparser_is_larger_col = false,
                      double threshold_fraction = kDefaultThresholdFraction);

struct CvReport {
  SparsityKind kind = SparsityKind::Hard;
  std::vector<double> alphas;
  std::vector<Index> ks;  // hard
  Matrix deltas;          // soft, one delta grid per alpha row
  CountMatrix errors;
  CountMatrix nfs;
  Index n = 0;            // scored samples
  Selection selection;
  std::optional<RowNorm> q;
  double threshold_fraction = kDefaultThresholdFraction;
  int folds = 0;
  std::uint64_t seed = 0;

  double alpha() const { return alphas[static_cast<std::size_t>(selection.row)]; }
  Index k() const { return ks[static_cast<std::size_t>(selection.col)]; }
  double delta() const { return deltas(selection.row, selection.col); }
  Index selected_error() const { return errors(selection.row, selection.col); }
  Index selected_nfs() const { return nfs(selection.row, selection.col); }
};

/// Per-split factorizations shared by every grid evaluation on the same
/// data: each split is factored once and reused across alphas, K, q and
/// the soft-threshold path.
class CvWorkspace {
public:
  CvWorkspace(const LabeledDataset& ds, const Folds& folds, const SearchOptions& options = {});

  /// Scores on `validation` while training on `train`; NFS is measured on
  /// the model fitted to `train`.
  static CvWorkspace holdout(const LabeledDataset& train, const LabeledDataset& validation,
                             const SearchOptions& options = {});

  ~CvWorkspace();
  CvWorkspace(CvWorkspace&&) noexcept;
  CvWorkspace& operator=(CvWorkspace&&) noexcept;

  Index scored() const;
  Index p() const;
  int folds() const;

  /// Closed-form alpha on the refit data (all training samples).
  double lw_alpha() const;

  CvReport search_hard(const Grid& grid, RowNorm q) const;

  /// Soft-threshold search with an identity target. For each alpha the
  /// delta grid is `n_deltas` points uniform on [0, max|T|], T computed on
  /// the refit data.
  CvReport search_soft(const std::vector<double>& alphas, int n_deltas) const;

private:
  struct Impl;
  explicit CvWorkspace(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

CvReport grid_search(const LabeledDataset& ds, const Grid& grid, int Q, RowNorm q,
                     std::uint64_t seed, const SearchOptions& options = {});

/// Fixes alpha at estimate_alpha_lw of the centered training data and
/// searches K only.
CvReport light_search(const LabeledDataset& ds, const std::vector<Index>& ks, int Q, RowNorm q,
                      std::uint64_t seed, const SearchOptions& options = {});

CvReport soft_grid_search(const LabeledDataset& ds, const std::vector<double>& alphas,
                          int n_deltas, int Q, std::uint64_t seed,
                          const SearchOptions& options = {});

/// Long format: alpha,K,error,nfs (delta instead of K for soft reports).
void write_cv_grid_csv(const CvReport& report, std::ostream& out);
/// key=value summary block.
void write_cv_summary(const CvReport& report, std::ostream& out);

} // namespace crda
