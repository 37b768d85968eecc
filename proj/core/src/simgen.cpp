#include "crda/simgen.hpp"

#include "crda/error.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace crda {

std::string to_string(SetupId id) {
  switch (id) {
  case SetupId::I:
    return "I";
  case SetupId::II:
    return "II";
  case SetupId::III:
    return "III";
  }
  return "?";
}

SetupId parse_setup(std::string_view text) {
  if (text == "I" || text == "1") {
    return SetupId::I;
  }
  if (text == "II" || text == "2") {
    return SetupId::II;
  }
  if (text == "III" || text == "3") {
    return SetupId::III;
  }
  throw InvalidArgument("setup must be I, II or III, got '" + std::string(text) + "'");
}

namespace {

constexpr Index kSetup12Features = 500;
constexpr Index kSetup12Differential = 100;
constexpr Index kSetup1Run = 25;
constexpr Index kSetup3Features = 10000;
constexpr Index kSetup3Differential = 200;
constexpr Index kSetup3BlockSize = 100;

std::vector<Index> leading(Index count) {
  std::vector<Index> out(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = i;
  }
  return out;
}

} // namespace

SetupSpec setup_spec(SetupId id, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw InvalidArgument("scale must be positive");
  }
  SetupSpec spec;
  spec.id = id;
  if (id == SetupId::III) {
    const Index blocks = std::max<Index>(
        kSetup3Differential / kSetup3BlockSize,
        static_cast<Index>(std::llround(scale * static_cast<double>(kSetup3Features) /
                                        static_cast<double>(kSetup3BlockSize))));
    spec.block_size = kSetup3BlockSize;
    spec.p = blocks * kSetup3BlockSize;
    spec.groups = 3;
    spec.n_validation = 0;
    spec.n_train = 200;
    spec.n_test = 1000;
    spec.truth = leading(kSetup3Differential);
    spec.rhos = {0.5, 0.7, 0.9};
    return spec;
  }
  spec.p = std::max<Index>(kSetup12Differential,
                           std::llround(scale * static_cast<double>(kSetup12Features)));
  spec.groups = 4;
  spec.n_validation = 100;
  spec.n_train = 100;
  spec.n_test = 1000;
  spec.truth = leading(kSetup12Differential);
  return spec;
}

Matrix means_setup1(Index p) {
  if (p < kSetup12Differential) {
    throw InvalidArgument("setup I needs p >= 100");
  }
  Matrix M = Matrix::Zero(p, 4);
  for (Index g = 0; g < 4; ++g) {
    M.col(g).segment(kSetup1Run * g, kSetup1Run).setConstant(0.7);
  }
  return M;
}

Matrix means_setup2(Index p) {
  if (p < kSetup12Differential) {
    throw InvalidArgument("setup II needs p >= 100");
  }
  Matrix M = Matrix::Zero(p, 4);
  for (Index g = 0; g < 4; ++g) {
    M.col(g).head(kSetup12Differential).setConstant(static_cast<double>(g) / 3.0);
  }
  return M;
}

Matrix means_setup3(Index p) {
  if (p < kSetup3Differential) {
    throw InvalidArgument("setup III needs p >= 200");
  }
  Matrix M = Matrix::Zero(p, 3);
  M.col(1).head(kSetup3Differential).setConstant(0.5);
  M.col(2) = -M.col(1);
  return M;
}

Matrix ar1_block(double rho, Index size) {
  if (!(std::abs(rho) < 1.0)) {
    throw InvalidArgument("AR(1) correlation must satisfy |rho| < 1");
  }
  if (size < 1) {
    throw InvalidArgument("AR(1) block size must be positive");
  }
  Matrix A(size, size);
  for (Index i = 0; i < size; ++i) {
    for (Index j = 0; j < size; ++j) {
      A(i, j) = std::pow(rho, static_cast<int>(std::abs(i - j)));
    }
  }
  return A;
}

CovarianceOperator CovarianceOperator::scaled_identity(Index dim, double scale) {
  if (dim < 1 || !(scale >= 0.0)) {
    throw InvalidArgument("scaled identity needs dim >= 1 and scale >= 0");
  }
  CovarianceOperator op;
  op.dim_ = dim;
  op.identity_ = true;
  op.scale_ = scale;
  return op;
}

CovarianceOperator CovarianceOperator::block_diagonal(std::vector<Matrix> blocks) {
  if (blocks.empty()) {
    throw InvalidArgument("block-diagonal covariance needs at least one block");
  }
  CovarianceOperator op;
  op.identity_ = false;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Matrix& block = blocks[b];
    if (block.rows() != block.cols() || block.rows() < 1) {
      throw InvalidArgument("covariance blocks must be square");
    }
    Eigen::LLT<Matrix> llt(block);
    if (llt.info() != Eigen::Success) {
      throw NumericError("covariance block " + std::to_string(b + 1) +
                         " is not positive definite");
    }
    op.offsets_.push_back(op.dim_);
    op.dim_ += block.rows();
    op.factors_.push_back(llt.matrixL());
  }
  op.blocks_ = std::move(blocks);
  return op;
}

Vector CovarianceOperator::apply(const Vector& v) const {
  if (v.size() != dim_) {
    throw DataError("covariance operator dimension mismatch");
  }
  if (identity_) {
    return scale_ * v;
  }
  Vector out(dim_);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const Index size = blocks_[b].rows();
    out.segment(offsets_[b], size).noalias() = blocks_[b] * v.segment(offsets_[b], size);
  }
  return out;
}

Matrix CovarianceOperator::dense() const {
  if (identity_) {
    return scale_ * Matrix::Identity(dim_, dim_);
  }
  Matrix out = Matrix::Zero(dim_, dim_);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const Index size = blocks_[b].rows();
    out.block(offsets_[b], offsets_[b], size, size) = blocks_[b];
  }
  return out;
}

void CovarianceOperator::correlate(const Vector& z, Eigen::Ref<Vector> out) const {
  if (identity_) {
    out = std::sqrt(scale_) * z;
    return;
  }
  for (std::size_t b = 0; b < factors_.size(); ++b) {
    const Index size = factors_[b].rows();
    out.segment(offsets_[b], size).noalias() =
        factors_[b].triangularView<Eigen::Lower>() * z.segment(offsets_[b], size);
  }
}

CovarianceOperator cov_setup3(double rho, Index blocks, Index block_size) {
  if (blocks < 1) {
    throw InvalidArgument("setup III covariance needs at least one block");
  }
  const Matrix plus = ar1_block(rho, block_size);
  const Matrix minus = ar1_block(-rho, block_size);
  std::vector<Matrix> parts;
  parts.reserve(static_cast<std::size_t>(blocks));
  for (Index b = 0; b < blocks; ++b) {
    parts.push_back(b % 2 == 0 ? plus : minus);
  }
  return CovarianceOperator::block_diagonal(std::move(parts));
}

Matrix sample_mvn(const Vector& mean, const CovarianceOperator& cov, Index count, Rng& rng) {
  if (mean.size() != cov.dim()) {
    throw DataError("mean length " + std::to_string(mean.size()) +
                    " does not match covariance dimension " + std::to_string(cov.dim()));
  }
  if (count < 0) {
    throw InvalidArgument("sample count must be non-negative");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(count, mean.size());
  Vector z(mean.size());
  Vector draw(mean.size());
  for (Index r = 0; r < count; ++r) {
    for (Index j = 0; j < z.size(); ++j) {
      z[j] = normal(rng);
    }
    cov.correlate(z, draw);
    out.row(r) = (mean + draw).transpose();
  }
  return out;
}

namespace {

std::vector<Index> split_counts(Index n, int groups, bool multinomial, Rng& rng) {
  std::vector<Index> counts(static_cast<std::size_t>(groups), 0);
  if (!multinomial) {
    for (int g = 0; g < groups; ++g) {
      counts[static_cast<std::size_t>(g)] = n / groups + (g < n % groups ? 1 : 0);
    }
    return counts;
  }
  std::uniform_int_distribution<int> pick(0, groups - 1);
  for (Index i = 0; i < n; ++i) {
    ++counts[static_cast<std::size_t>(pick(rng))];
  }
  return counts;
}

LabeledDataset draw_split(Index n, const Matrix& means, const std::vector<CovarianceOperator>& cov,
                          bool multinomial, Rng& rng) {
  const int G = static_cast<int>(means.cols());
  std::vector<Index> counts;
  do {
    counts = split_counts(n, G, multinomial, rng);
  } while (std::find(counts.begin(), counts.end(), Index{0}) != counts.end());

  Matrix X(n, means.rows());
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(n));
  Index row = 0;
  for (int g = 0; g < G; ++g) {
    const Index c = counts[static_cast<std::size_t>(g)];
    X.middleRows(row, c) = sample_mvn(means.col(g), cov[static_cast<std::size_t>(g)], c, rng);
    labels.insert(labels.end(), static_cast<std::size_t>(c), g);
    row += c;
  }
  std::vector<std::string> names;
  for (int g = 0; g < G; ++g) {
    names.push_back(std::to_string(g + 1));
  }
  return LabeledDataset(std::move(X), std::move(labels), std::move(names));
}

} // namespace

SimulatedData generate(const SetupSpec& spec, std::uint64_t trial_seed) {
  Matrix means;
  std::vector<CovarianceOperator> cov;
  switch (spec.id) {
  case SetupId::I:
    means = means_setup1(spec.p);
    break;
  case SetupId::II:
    means = means_setup2(spec.p);
    break;
  case SetupId::III:
    means = means_setup3(spec.p);
    break;
  }
  if (means.cols() != spec.groups) {
    throw InvalidArgument("setup group count does not match its mean structure");
  }
  for (int g = 0; g < spec.groups; ++g) {
    if (spec.id == SetupId::III) {
      cov.push_back(cov_setup3(spec.rhos.at(static_cast<std::size_t>(g)), spec.blocks(),
                               spec.block_size));
    } else {
      cov.push_back(CovarianceOperator::scaled_identity(spec.p));
    }
  }

  Rng rng(trial_seed);
  auto train = draw_split(spec.n_train, means, cov, spec.multinomial, rng);
  std::optional<LabeledDataset> validation;
  if (spec.n_validation > 0) {
    validation = draw_split(spec.n_validation, means, cov, spec.multinomial, rng);
  }
  auto test = draw_split(spec.n_test, means, cov, spec.multinomial, rng);
  return SimulatedData{std::move(train), std::move(validation), std::move(test), spec.truth};
}

} // namespace crda
