#pragma once

#include "crda/dataset.hpp"
#include "crda/random.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crda {

enum class SetupId { I, II, III };

std::string to_string(SetupId id);
SetupId parse_setup(std::string_view text);

struct SetupSpec {
  SetupId id = SetupId::I;
  Index p = 0;
  int groups = 0;
  Index n_validation = 0;
  Index n_train = 0;
  Index n_test = 0;
  /// 0-based indices of the features whose means differ between groups.
  std::vector<Index> truth;
  /// Setup III: per-group AR(1) correlation.
  std::vector<double> rhos;
  Index block_size = 0;
  /// Draw labels i.i.d. uniform instead of exactly equal per-group counts.
  bool multinomial = false;

  Index blocks() const { return block_size > 0 ? p / block_size : 0; }
};

/// Full-sized setup, optionally shrunk: p is scaled (never below the
/// number of differential features); in setup III the block count follows
/// p with the block size held at 100.
SetupSpec setup_spec(SetupId id, double scale = 1.0);

/// Setup I: column g is 0.7 on features 25g..25g+24 (0-based), else 0.
Matrix means_setup1(Index p = 500);
/// Setup II: column g is g/3 on the first 100 features (0-based g).
Matrix means_setup2(Index p = 500);
/// Setup III: m_1 = 0, m_2 = 0.5 on the first 200 features, m_3 = -m_2.
Matrix means_setup3(Index p = 10000);

/// rho^|i-j|; throws InvalidArgument unless |rho| < 1.
Matrix ar1_block(double rho, Index size);

/// Block-diagonal (or scaled-identity) covariance held block-wise with a
/// lower Cholesky factor per block.
class CovarianceOperator {
public:
  static CovarianceOperator scaled_identity(Index dim, double scale = 1.0);
  /// Throws NumericError if a block is not positive definite.
  static CovarianceOperator block_diagonal(std::vector<Matrix> blocks);

  Index dim() const { return dim_; }
  Index block_count() const { return static_cast<Index>(blocks_.size()); }
  const Matrix& block(Index b) const { return blocks_[static_cast<std::size_t>(b)]; }
  const Matrix& factor(Index b) const { return factors_[static_cast<std::size_t>(b)]; }

  Vector apply(const Vector& v) const;
  Matrix dense() const;

  /// Writes L z into `out` for a standard normal vector z.
  void correlate(const Vector& z, Eigen::Ref<Vector> out) const;

private:
  Index dim_ = 0;
  bool identity_ = true;
  double scale_ = 1.0;
  std::vector<Matrix> blocks_;
  std::vector<Matrix> factors_;
  std::vector<Index> offsets_;
};

/// Direct sum of `blocks` AR(1) blocks alternating +rho, -rho, +rho, ...
CovarianceOperator cov_setup3(double rho, Index blocks = 100, Index block_size = 100);

/// count x p matrix of draws mean + L z.
Matrix sample_mvn(const Vector& mean, const CovarianceOperator& cov, Index count, Rng& rng);

struct SimulatedData {
  LabeledDataset train;
  std::optional<LabeledDataset> validation;
  LabeledDataset test;
  std::vector<Index> truth;
};

/// Draws one trial. Samples are ordered by group inside each split; counts
/// are exactly equal across groups (remainders to the lowest groups)
/// unless spec.multinomial is set.
SimulatedData generate(const SetupSpec& spec, std::uint64_t trial_seed);

} // namespace crda
