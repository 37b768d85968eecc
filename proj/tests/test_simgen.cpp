#include "support.hpp"

#include "crda/error.hpp"
#include "crda/simgen.hpp"

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include <cmath>

using namespace crda;

TEST_CASE("setup I means") {
  const Matrix M = means_setup1(500);
  REQUIRE(M.rows() == 500);
  REQUIRE(M.cols() == 4);
  // 1-based [m_2]_26 = 0.7, [m_2]_25 = 0, [m_2]_51 = 0
  CHECK(M(25, 1) == 0.7);
  CHECK(M(24, 1) == 0.0);
  CHECK(M(50, 1) == 0.0);
  for (Index g = 0; g < 4; ++g) {
    CHECK((M.col(g).array() != 0.0).count() == 25);
    for (Index i = 0; i < 500; ++i) {
      const bool inside = i >= 25 * g && i < 25 * (g + 1);
      CHECK(M(i, g) == (inside ? 0.7 : 0.0));
    }
  }
  CHECK((M.rowwise().sum().array() != 0.0).count() == 100);
  CHECK((M.topRows(100).array() != 0.0).rowwise().count().maxCoeff() == 1);
}

TEST_CASE("setup II means") {
  const Matrix M = means_setup2(500);
  CHECK(M(0, 3) == 1.0);
  CHECK(M(100, 3) == 0.0);
  CHECK(M.col(0).isZero());
  CHECK(M(49, 2) == 2.0 / 3.0);
  for (Index g = 0; g < 4; ++g) {
    for (Index i = 0; i < 500; ++i) {
      CHECK(M(i, g) == (i < 100 ? static_cast<double>(g) / 3.0 : 0.0));
    }
  }
}

TEST_CASE("setup III means") {
  const Matrix M = means_setup3(10000);
  CHECK(M(199, 1) == 0.5);
  CHECK(M(200, 1) == 0.0);
  CHECK(M.col(2) == -M.col(1));
  CHECK(M.col(0).isZero());
  CHECK((M.col(1).array() != 0.0).count() == 200);
}

TEST_CASE("AR(1) blocks") {
  Matrix expect(3, 3);
  expect << 1, .5, .25, .5, 1, .5, .25, .5, 1;
  CHECK(ar1_block(0.5, 3) == expect);
  CHECK(ar1_block(0.0, 4) == Matrix::Identity(4, 4));
  const Eigen::SelfAdjointEigenSolver<Matrix> es(ar1_block(0.9, 100));
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  CHECK_THROWS_AS(ar1_block(1.0, 3), InvalidArgument);
  CHECK_THROWS_AS(ar1_block(-1.2, 3), InvalidArgument);
}

TEST_CASE("setup III covariance operator") {
  const auto cov = cov_setup3(0.7);
  CHECK(cov.dim() == 10000);
  CHECK(cov.block_count() == 100);
  int plus = 0;
  int minus = 0;
  for (Index b = 0; b < cov.block_count(); ++b) {
    const double corr = cov.block(b)(0, 1);
    CHECK(std::abs(std::abs(corr) - 0.7) < 1e-15);
    (corr > 0 ? plus : minus) += 1;
  }
  CHECK(plus == 50);
  CHECK(minus == 50);
  CHECK(cov.block(0)(0, 1) == 0.7);
  CHECK(cov.block(1)(0, 1) == -0.7);
  // Entry (100, 101) in 1-based indexing straddles the first boundary.
  Vector e = Vector::Zero(10000);
  e(100) = 1.0;
  const Vector col = cov.apply(e);
  CHECK(col(99) == 0.0);
  CHECK(col(100) == 1.0);
  CHECK(col(101) == -0.7);
  CHECK_THROWS_AS(cov_setup3(1.0), InvalidArgument);
}

TEST_CASE("operator reproduces the dense block construction at reduced scale") {
  const auto cov = cov_setup3(0.5, 10, 10);
  Matrix dense = Matrix::Zero(100, 100);
  for (Index b = 0; b < 10; ++b) {
    const double rho = b % 2 == 0 ? 0.5 : -0.5;
    for (Index i = 0; i < 10; ++i) {
      for (Index j = 0; j < 10; ++j) {
        dense(10 * b + i, 10 * b + j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
      }
    }
  }
  for (Index i = 0; i < 100; ++i) {
    Vector e = Vector::Zero(100);
    e(i) = 1.0;
    CHECK((cov.apply(e) - dense.col(i)).cwiseAbs().maxCoeff() <= 1e-14);
  }
  CHECK((cov.dense() - dense).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("sampling") {
  SUBCASE("zero covariance returns the mean") {
    Rng rng(1);
    const Vector mean = Vector::LinSpaced(4, -1.0, 2.0);
    const Matrix draws = sample_mvn(mean, CovarianceOperator::scaled_identity(4, 0.0), 7, rng);
    for (Index r = 0; r < 7; ++r) {
      CHECK(draws.row(r) == mean.transpose());
    }
  }
  SUBCASE("identity covariance: sample covariance near I") {
    Rng rng(2);
    const Matrix draws =
        sample_mvn(Vector::Zero(5), CovarianceOperator::scaled_identity(5), 10000, rng);
    const Matrix centered = draws.rowwise() - draws.colwise().mean();
    const Matrix S = centered.transpose() * centered / 9999.0;
    CHECK((S - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 0.1);
  }
  SUBCASE("block covariance: sample covariance near the block matrix") {
    Rng rng(3);
    const auto cov = cov_setup3(0.9, 2, 5);
    const Matrix draws = sample_mvn(Vector::Zero(10), cov, 20000, rng);
    const Matrix S = draws.transpose() * draws / 20000.0;
    CHECK((S - cov.dense()).cwiseAbs().maxCoeff() < 0.1);
  }
  SUBCASE("fixed seed is reproducible") {
    Rng a(9);
    Rng b(9);
    const auto cov = cov_setup3(0.5, 3, 4);
    CHECK(sample_mvn(Vector::Ones(12), cov, 30, a) == sample_mvn(Vector::Ones(12), cov, 30, b));
  }
  SUBCASE("non-PD block is a numeric error") {
    Matrix bad(2, 2);
    bad << 1, 2, 2, 1;
    CHECK_THROWS_AS(CovarianceOperator::block_diagonal({bad}), NumericError);
  }
}

TEST_CASE("group means converge within Gaussian bounds") {
  auto spec = setup_spec(SetupId::II, 0.1);  // p = 100
  spec.n_train = 10000;
  spec.n_validation = 0;
  spec.n_test = 4;
  const auto data = generate(spec, 5);
  const auto means = class_means(data.train);
  const Matrix truth = means_setup2(spec.p);
  for (Index g = 0; g < 4; ++g) {
    const double se = 1.0 / std::sqrt(static_cast<double>(means.counts[static_cast<std::size_t>(g)]));
    // Bonferroni over p coordinates: 4.5 sigma keeps the false alarm rate tiny.
    CHECK((means.means.col(g) - truth.col(g)).cwiseAbs().maxCoeff() < 4.5 * se);
  }
}

TEST_CASE("setup sizes") {
  const auto s1 = setup_spec(SetupId::I);
  CHECK(s1.p == 500);
  CHECK(s1.groups == 4);
  CHECK(s1.n_train + s1.n_validation + s1.n_test == 1200);
  CHECK(s1.truth.size() == 100);
  const auto s3 = setup_spec(SetupId::III);
  CHECK(s3.p == 10000);
  CHECK(s3.groups == 3);
  CHECK(s3.n_train == 200);
  CHECK(s3.n_test == 1000);
  CHECK(s3.n_validation == 0);
  CHECK(s3.truth.size() == 200);
  const auto small = setup_spec(SetupId::III, 0.1);
  CHECK(small.p == 1000);
  CHECK(small.blocks() == 10);
  CHECK(setup_spec(SetupId::I, 0.01).p == 100);
  CHECK_THROWS_AS(setup_spec(SetupId::I, 0.0), InvalidArgument);
  CHECK(parse_setup("III") == SetupId::III);
  CHECK_THROWS_AS(parse_setup("IV"), InvalidArgument);
}

TEST_CASE("generated splits") {
  const auto data = generate(setup_spec(SetupId::I), 42);
  CHECK(data.train.n() == 100);
  REQUIRE(data.validation.has_value());
  CHECK(data.validation->n() == 100);
  CHECK(data.test.n() == 1000);
  CHECK(data.train.p() == 500);
  CHECK(data.train.group_counts() == std::vector<Index>{25, 25, 25, 25});
  CHECK(data.test.group_counts() == std::vector<Index>{250, 250, 250, 250});
  CHECK(data.truth.size() == 100);

  const auto again = generate(setup_spec(SetupId::I), 42);
  CHECK(again.train.X() == data.train.X());
  CHECK(again.test.X() == data.test.X());
  CHECK(generate(setup_spec(SetupId::I), 43).train.X() != data.train.X());

  const auto d3 = generate(setup_spec(SetupId::III, 0.05), 1);
  CHECK(d3.train.group_counts() == std::vector<Index>{67, 67, 66});
  CHECK(d3.test.group_counts() == std::vector<Index>{334, 333, 333});
  CHECK_FALSE(d3.validation.has_value());

  auto multi = setup_spec(SetupId::I, 0.2);
  multi.multinomial = true;
  const auto dm = generate(multi, 3);
  const auto counts = dm.test.group_counts();
  CHECK(counts[0] + counts[1] + counts[2] + counts[3] == 1000);
}
