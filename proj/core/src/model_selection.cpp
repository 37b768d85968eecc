#include "crda/model_selection.hpp"

#include "crda/error.hpp"
#include "crda/random.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <tuple>

namespace crda {

void Grid::validate(Index p) const {
  if (alphas.empty() || ks.empty()) {
    throw InvalidArgument("grid axes must be non-empty");
  }
  for (double a : alphas) {
    if (!(a >= 0.0 && a < 1.0)) {
      throw InvalidArgument("grid alpha " + std::to_string(a) + " outside [0, 1)");
    }
  }
  if (std::set<double>(alphas.begin(), alphas.end()).size() != alphas.size()) {
    throw InvalidArgument("grid alphas must be distinct");
  }
  for (std::size_t j = 0; j < ks.size(); ++j) {
    if (ks[j] < 1 || ks[j] > p) {
      throw InvalidArgument("grid K " + std::to_string(ks[j]) + " outside [1, " +
                            std::to_string(p) + "]");
    }
    if (j > 0 && ks[j] <= ks[j - 1]) {
      throw InvalidArgument("grid K values must be strictly increasing");
    }
  }
}

std::vector<double> default_alphas() {
  std::vector<double> alphas;
  for (int i = 0; i < 25; ++i) {
    alphas.push_back(static_cast<double>(i) / 25.0);
  }
  return alphas;
}

std::vector<Index> default_ks(Index p) {
  if (p < 1) {
    throw InvalidArgument("p must be positive");
  }
  std::vector<Index> ks;
  constexpr int kPoints = 100;
  for (int j = 0; j < kPoints; ++j) {
    const double value =
        1.0 + static_cast<double>(j) * static_cast<double>(p - 1) / (kPoints - 1);
    const auto k = static_cast<Index>(std::llround(value));
    if (ks.empty() || ks.back() != k) {
      ks.push_back(k);
    }
  }
  return ks;
}

Grid default_grids(Index p) {
  return Grid{default_alphas(), default_ks(p)};
}

Index Folds::scored() const {
  return static_cast<Index>(std::count_if(fold_of.begin(), fold_of.end(),
                                          [](int f) { return f >= 0; }));
}

Folds make_folds(const std::vector<int>& labels, int groups, int Q, std::uint64_t seed) {
  const auto n = static_cast<Index>(labels.size());
  if (Q < 2) {
    throw InvalidArgument("need at least 2 folds, got " + std::to_string(Q));
  }
  if (Q > n) {
    throw InvalidArgument(std::to_string(Q) + " folds for " + std::to_string(n) + " samples");
  }
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(groups));
  for (Index i = 0; i < n; ++i) {
    const int g = labels[static_cast<std::size_t>(i)];
    if (g < 0 || g >= groups) {
      throw InvalidArgument("label outside [0, groups)");
    }
    members[static_cast<std::size_t>(g)].push_back(i);
  }
  Rng rng(seed);
  Folds folds;
  folds.count = Q;
  folds.fold_of.assign(static_cast<std::size_t>(n), 0);
  int next = 0;
  for (auto& group : members) {
    if (group.empty()) {
      throw InvalidArgument("every group needs at least one sample");
    }
    std::shuffle(group.begin(), group.end(), rng);
    for (Index i : group) {
      folds.fold_of[static_cast<std::size_t>(i)] = next;
      next = (next + 1) % Q;
    }
  }
  return folds;
}

Folds holdout_folds(Index n_train, Index n_validation) {
  if (n_train < 1 || n_validation < 1) {
    throw InvalidArgument("hold-out split needs training and validation samples");
  }
  Folds folds;
  folds.count = 1;
  folds.fold_of.assign(static_cast<std::size_t>(n_train), -1);
  folds.fold_of.resize(static_cast<std::size_t>(n_train + n_validation), 0);
  return folds;
}

namespace {

struct SplitRows {
  std::vector<Index> train;
  std::vector<Index> test;
};

std::vector<SplitRows> split_rows(const LabeledDataset& ds, const Folds& folds) {
  if (static_cast<Index>(folds.fold_of.size()) != ds.n()) {
    throw InvalidArgument("fold assignment length does not match the dataset");
  }
  std::vector<SplitRows> out;
  for (int f = 0; f < folds.count; ++f) {
    SplitRows rows;
    std::vector<bool> seen(static_cast<std::size_t>(ds.groups()), false);
    for (Index i = 0; i < ds.n(); ++i) {
      if (folds.fold_of[static_cast<std::size_t>(i)] == f) {
        rows.test.push_back(i);
      } else {
        rows.train.push_back(i);
        seen[static_cast<std::size_t>(ds.labels()[static_cast<std::size_t>(i)])] = true;
      }
    }
    if (rows.test.empty()) {
      continue;
    }
    for (int g = 0; g < ds.groups(); ++g) {
      if (!seen[static_cast<std::size_t>(g)]) {
        throw DataError("fold " + std::to_string(f + 1) +
                        ": training complement has no samples of group '" +
                        ds.group_names()[static_cast<std::size_t>(g)] + "'");
      }
    }
    out.push_back(std::move(rows));
  }
  return out;
}

} // namespace

Index cv_error(const LabeledDataset& ds, double alpha, Index K, RowNorm q, const Folds& folds,
               const SearchOptions& options) {
  Index errors = 0;
  for (const auto& rows : split_rows(ds, folds)) {
    const auto train_set = ds.subset(rows.train);
    TrainOptions to;
    to.alpha = alpha;
    to.k = K;
    to.q = q;
    to.priors = options.priors;
    to.rank_tol = options.rank_tol;
    const auto model = train(train_set, to);
    Matrix X(static_cast<Index>(rows.test.size()), ds.p());
    for (std::size_t r = 0; r < rows.test.size(); ++r) {
      X.row(static_cast<Index>(r)) = ds.X().row(rows.test[r]);
    }
    const auto predicted = predict(model, X);
    for (std::size_t r = 0; r < rows.test.size(); ++r) {
      if (predicted[r] != ds.labels()[static_cast<std::size_t>(rows.test[r])]) {
        ++errors;
      }
    }
  }
  return errors;
}

double error_threshold(Index n, Index eps_cv, double fraction) {
  if (!(fraction >= 0.0)) {
    throw InvalidArgument("threshold fraction must be non-negative");
  }
  return std::max(fraction * static_cast<double>(n), static_cast<double>(eps_cv));
}

Selection select_pair(const CountMatrix& errors, const CountMatrix& nfs, Index n,
                      bool sparser_is_larger_col, double threshold_fraction) {
  if (errors.size() == 0 || errors.rows() != nfs.rows() || errors.cols() != nfs.cols()) {
    throw InvalidArgument("select_pair: error and NFS tables must be non-empty and equal-sized");
  }
  Selection best;
  best.eps_cv = errors.minCoeff();
  best.eps_thr = error_threshold(n, best.eps_cv, threshold_fraction);
  bool found = false;
  auto key = [&](Index r, Index c) {
    return std::make_tuple(nfs(r, c), errors(r, c), sparser_is_larger_col ? -c : c, r);
  };
  for (Index r = 0; r < errors.rows(); ++r) {
    for (Index c = 0; c < errors.cols(); ++c) {
      if (static_cast<double>(errors(r, c)) > best.eps_thr) {
        continue;
      }
      if (!found || key(r, c) < key(best.row, best.col)) {
        best.row = r;
        best.col = c;
        found = true;
      }
    }
  }
  return best;
}

struct SplitState {
  Matrix means;
  std::shared_ptr<const SvdFactors> factors;
  Matrix UtM;
  Vector log_priors;
  Matrix heldout;  // p x h
  std::vector<int> heldout_labels;

  Matrix coefficients(double alpha, ShrinkageTarget target) const {
    return build_rscm(factors, alpha, target).inverse_apply(means, UtM);
  }
};

struct CvWorkspace::Impl {
  Index p = 0;
  int groups = 0;
  int folds = 0;
  Index scored = 0;
  double threshold_fraction = kDefaultThresholdFraction;
  std::vector<SplitState> splits;
  SplitState refit;
};

namespace {

SplitState make_state(const LabeledDataset& train_set, const SearchOptions& options) {
  SplitState s;
  const auto means = class_means(train_set);
  s.means = means.means;
  s.log_priors = resolve_log_priors(options.priors, means);
  s.factors = std::make_shared<const SvdFactors>(
      thin_svd_via_gram(center_by_class(train_set, means), options.rank_tol));
  s.UtM = s.factors->U.transpose() * s.means;
  return s;
}

void set_heldout(SplitState& s, const Matrix& X, const std::vector<int>& labels,
                 const std::vector<Index>& rows) {
  s.heldout.resize(X.cols(), static_cast<Index>(rows.size()));
  s.heldout_labels.clear();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    s.heldout.col(static_cast<Index>(r)) = X.row(rows[r]).transpose();
    s.heldout_labels.push_back(labels[static_cast<std::size_t>(rows[r])]);
  }
}

} // namespace

CvWorkspace::CvWorkspace(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}

CvWorkspace::CvWorkspace(const LabeledDataset& ds, const Folds& folds,
                         const SearchOptions& options)
    : impl_(std::make_unique<Impl>()) {
  impl_->p = ds.p();
  impl_->groups = ds.groups();
  impl_->folds = folds.count;
  impl_->scored = folds.scored();
  impl_->threshold_fraction = options.threshold_fraction;
  for (const auto& rows : split_rows(ds, folds)) {
    auto state = make_state(ds.subset(rows.train), options);
    set_heldout(state, ds.X(), ds.labels(), rows.test);
    impl_->splits.push_back(std::move(state));
  }
  impl_->refit = make_state(ds, options);
}

CvWorkspace CvWorkspace::holdout(const LabeledDataset& train, const LabeledDataset& validation,
                                 const SearchOptions& options) {
  if (train.p() != validation.p()) {
    throw DataError("validation set has p = " + std::to_string(validation.p()) +
                    ", training set has p = " + std::to_string(train.p()));
  }
  std::vector<int> labels;
  for (int g : validation.labels()) {
    const auto& name = validation.group_names()[static_cast<std::size_t>(g)];
    const int mapped = train.group_index(name);
    if (mapped < 0) {
      throw DataError("validation label '" + name + "' does not occur in the training set");
    }
    labels.push_back(mapped);
  }
  auto impl = std::make_unique<Impl>();
  impl->p = train.p();
  impl->groups = train.groups();
  impl->folds = 1;
  impl->scored = validation.n();
  impl->threshold_fraction = options.threshold_fraction;
  impl->refit = make_state(train, options);
  SplitState split = impl->refit;
  std::vector<Index> rows(static_cast<std::size_t>(validation.n()));
  for (Index i = 0; i < validation.n(); ++i) {
    rows[static_cast<std::size_t>(i)] = i;
  }
  set_heldout(split, validation.X(), labels, rows);
  impl->splits.push_back(std::move(split));
  return CvWorkspace(std::move(impl));
}

CvWorkspace::~CvWorkspace() = default;
CvWorkspace::CvWorkspace(CvWorkspace&&) noexcept = default;
CvWorkspace& CvWorkspace::operator=(CvWorkspace&&) noexcept = default;

Index CvWorkspace::scored() const { return impl_->scored; }
Index CvWorkspace::p() const { return impl_->p; }
int CvWorkspace::folds() const { return impl_->folds; }

double CvWorkspace::lw_alpha() const {
  return estimate_alpha_lw(*impl_->refit.factors);
}

CvReport CvWorkspace::search_hard(const Grid& grid, RowNorm q) const {
  grid.validate(impl_->p);
  const auto I = static_cast<Index>(grid.alphas.size());
  const auto J = static_cast<Index>(grid.ks.size());
  const Index p = impl_->p;
  const int G = impl_->groups;

  CvReport report;
  report.kind = SparsityKind::Hard;
  report.alphas = grid.alphas;
  report.ks = grid.ks;
  report.q = q;
  report.folds = impl_->folds;
  report.n = impl_->scored;
  report.errors = CountMatrix::Zero(I, J);
  report.nfs = CountMatrix::Zero(I, J);

  Eigen::RowVectorXd acc(G);
  for (const auto& split : impl_->splits) {
    // Discriminants for every K on the grid come from prefix sums of
    // per-row contributions taken in decreasing row-norm order.
    const Matrix half_means = 0.5 * split.means;
    for (Index a = 0; a < I; ++a) {
      const Matrix T = split.coefficients(grid.alphas[static_cast<std::size_t>(a)],
                                          ShrinkageTarget::ScaledIdentity);
      const auto order = rank_rows(row_norms(T, q));
      for (Index h = 0; h < split.heldout.cols(); ++h) {
        const auto x = split.heldout.col(h);
        const int label = split.heldout_labels[static_cast<std::size_t>(h)];
        acc = split.log_priors.transpose();
        Index j = 0;
        for (Index r = 0; r < p && j < J; ++r) {
          const Index i = order[static_cast<std::size_t>(r)];
          for (int g = 0; g < G; ++g) {
            acc[g] += T(i, g) * (x[i] - half_means(i, g));
          }
          while (j < J && grid.ks[static_cast<std::size_t>(j)] == r + 1) {
            if (argmax_group(acc) != label) {
              ++report.errors(a, j);
            }
            ++j;
          }
        }
      }
    }
  }

  for (Index a = 0; a < I; ++a) {
    const Matrix T = impl_->refit.coefficients(grid.alphas[static_cast<std::size_t>(a)],
                                               ShrinkageTarget::ScaledIdentity);
    const auto nonzero = static_cast<Index>(nonzero_rows(T).size());
    for (Index j = 0; j < J; ++j) {
      report.nfs(a, j) = std::min(grid.ks[static_cast<std::size_t>(j)], nonzero);
    }
  }
  report.threshold_fraction = impl_->threshold_fraction;
  report.selection =
      select_pair(report.errors, report.nfs, report.n, false, impl_->threshold_fraction);
  return report;
}

CvReport CvWorkspace::search_soft(const std::vector<double>& alphas, int n_deltas) const {
  if (alphas.empty() || n_deltas < 1) {
    throw InvalidArgument("soft search needs at least one alpha and one delta");
  }
  for (double a : alphas) {
    if (!(a >= 0.0 && a < 1.0)) {
      throw InvalidArgument("alpha " + std::to_string(a) + " outside [0, 1)");
    }
  }
  const auto I = static_cast<Index>(alphas.size());
  const Index J = n_deltas;

  CvReport report;
  report.kind = SparsityKind::Soft;
  report.alphas = alphas;
  report.folds = impl_->folds;
  report.n = impl_->scored;
  report.deltas = Matrix::Zero(I, J);
  report.errors = CountMatrix::Zero(I, J);
  report.nfs = CountMatrix::Zero(I, J);

  for (Index a = 0; a < I; ++a) {
    const Matrix T = impl_->refit.coefficients(alphas[static_cast<std::size_t>(a)],
                                               ShrinkageTarget::Identity);
    const double top = T.cwiseAbs().maxCoeff();
    const Vector row_max = T.cwiseAbs().rowwise().maxCoeff();
    for (Index j = 0; j < J; ++j) {
      const double delta = J == 1 ? 0.0 : top * static_cast<double>(j) / static_cast<double>(J - 1);
      report.deltas(a, j) = delta;
      report.nfs(a, j) = (row_max.array() > delta).count();
    }
  }

  for (const auto& split : impl_->splits) {
    const Matrix Xh = split.heldout.transpose();
    for (Index a = 0; a < I; ++a) {
      const Matrix T =
          split.coefficients(alphas[static_cast<std::size_t>(a)], ShrinkageTarget::Identity);
      for (Index j = 0; j < J; ++j) {
        const auto coef = soft_threshold(T, report.deltas(a, j));
        const Eigen::RowVectorXd offset =
            split.log_priors.transpose() -
            0.5 * split.means.cwiseProduct(coef.B).colwise().sum();
        Matrix d = offset.replicate(Xh.rows(), 1);
        for (Index i : coef.support) {
          d.noalias() += Xh.col(i) * coef.B.row(i);
        }
        for (Index h = 0; h < d.rows(); ++h) {
          if (argmax_group(d.row(h)) != split.heldout_labels[static_cast<std::size_t>(h)]) {
            ++report.errors(a, j);
          }
        }
      }
    }
  }
  report.threshold_fraction = impl_->threshold_fraction;
  report.selection =
      select_pair(report.errors, report.nfs, report.n, true, impl_->threshold_fraction);
  return report;
}

CvReport grid_search(const LabeledDataset& ds, const Grid& grid, int Q, RowNorm q,
                     std::uint64_t seed, const SearchOptions& options) {
  const CvWorkspace ws(ds, make_folds(ds.labels(), ds.groups(), Q, seed), options);
  auto report = ws.search_hard(grid, q);
  report.seed = seed;
  return report;
}

CvReport light_search(const LabeledDataset& ds, const std::vector<Index>& ks, int Q, RowNorm q,
                      std::uint64_t seed, const SearchOptions& options) {
  const CvWorkspace ws(ds, make_folds(ds.labels(), ds.groups(), Q, seed), options);
  auto report = ws.search_hard(Grid{{ws.lw_alpha()}, ks}, q);
  report.seed = seed;
  return report;
}

CvReport soft_grid_search(const LabeledDataset& ds, const std::vector<double>& alphas,
                          int n_deltas, int Q, std::uint64_t seed, const SearchOptions& options) {
  const CvWorkspace ws(ds, make_folds(ds.labels(), ds.groups(), Q, seed), options);
  auto report = ws.search_soft(alphas, n_deltas);
  report.seed = seed;
  return report;
}

void write_cv_grid_csv(const CvReport& report, std::ostream& out) {
  const bool hard = report.kind == SparsityKind::Hard;
  out << "alpha," << (hard ? "K" : "delta") << ",error,nfs\n";
  for (Index a = 0; a < report.errors.rows(); ++a) {
    for (Index j = 0; j < report.errors.cols(); ++j) {
      out << format_real(report.alphas[static_cast<std::size_t>(a)]) << ',';
      if (hard) {
        out << report.ks[static_cast<std::size_t>(j)];
      } else {
        out << format_real(report.deltas(a, j));
      }
      out << ',' << report.errors(a, j) << ',' << report.nfs(a, j) << '\n';
    }
  }
}

void write_cv_summary(const CvReport& report, std::ostream& out) {
  const bool hard = report.kind == SparsityKind::Hard;
  out << "kind=" << (hard ? "hard" : "soft") << '\n';
  if (report.q) {
    out << "q=" << to_string(*report.q) << '\n';
  }
  out << "folds=" << report.folds << '\n';
  out << "seed=" << report.seed << '\n';
  out << "n=" << report.n << '\n';
  out << "alpha_count=" << report.alphas.size() << '\n';
  out << "sparsity_count=" << report.errors.cols() << '\n';
  out << "threshold_fraction=" << format_real(report.threshold_fraction) << '\n';
  out << "eps_cv=" << report.selection.eps_cv << '\n';
  out << "eps_thr=" << format_real(report.selection.eps_thr) << '\n';
  out << "alpha=" << format_real(report.alpha()) << '\n';
  if (hard) {
    out << "K=" << report.k() << '\n';
  } else {
    out << "delta=" << format_real(report.delta()) << '\n';
  }
  out << "error=" << report.selected_error() << '\n';
  out << "nfs=" << report.selected_nfs() << '\n';
}

} // namespace crda
