#include "support.hpp"

#include "crda/classifier.hpp"
#include "crda/error.hpp"
#include "crda/metrics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace crda;
using crda::test::gaussian_matrix;

namespace {

Matrix small_b() {
  Matrix B(2, 2);
  B << 3, 4, 1, 0;
  return B;
}

} // namespace

TEST_CASE("row norms") {
  const Matrix B = small_b();
  CHECK(row_norms(B, RowNorm::L2) == Vector((Vector(2) << 5, 1).finished()));
  CHECK(row_norms(B, RowNorm::L1) == Vector((Vector(2) << 7, 1).finished()));
  CHECK(row_norms(B, RowNorm::Linf) == Vector((Vector(2) << 4, 1).finished()));
  for (RowNorm q : {RowNorm::L1, RowNorm::L2, RowNorm::Linf}) {
    CHECK(row_norms(Matrix::Zero(3, 2), q).isZero());
  }
}

TEST_CASE("row norm names") {
  CHECK(parse_row_norm("1") == RowNorm::L1);
  CHECK(parse_row_norm("2") == RowNorm::L2);
  CHECK(parse_row_norm("inf") == RowNorm::Linf);
  CHECK(to_string(RowNorm::Linf) == "inf");
  CHECK_THROWS_AS(parse_row_norm("3"), InvalidArgument);
}

TEST_CASE("hard threshold examples") {
  const Matrix B = small_b();
  const auto h = hard_threshold(B, 1, RowNorm::L2);
  Matrix expect(2, 2);
  expect << 3, 4, 0, 0;
  CHECK(h.B == expect);
  CHECK(h.support == std::vector<Index>{0});
  CHECK(hard_threshold(B, 2, RowNorm::L2).B == B);

  Matrix tie(3, 1);
  tie << 5, -5, 1;
  const auto t = hard_threshold(tie, 1, RowNorm::L1);
  CHECK(t.support == std::vector<Index>{0});
  CHECK(t.B(1, 0) == 0.0);

  CHECK_THROWS_AS(hard_threshold(B, 0, RowNorm::L2), InvalidArgument);
  CHECK_THROWS_AS(hard_threshold(B, 3, RowNorm::L2), InvalidArgument);
}

TEST_CASE("soft threshold examples") {
  Matrix T(1, 2);
  T << 1.5, -0.5;
  const auto s = soft_threshold(T, 1.0);
  CHECK(s.B(0, 0) == 0.5);
  CHECK(s.B(0, 1) == 0.0);
  CHECK(soft_threshold(T, 0.0).B == T);
  const auto z = soft_threshold(T, 2.0);
  CHECK(z.B.isZero());
  CHECK(z.support.empty());
  CHECK_THROWS_AS(soft_threshold(T, -1.0), InvalidArgument);
}

TEST_CASE("soft and hard thresholding select different supports") {
  // Row 0: one huge entry. Row 1: several moderate entries.
  Matrix T(2, 3);
  T << 10, 0, 0, 4, 4, 4;
  // l1 ranks row 1 first (12 > 10), so H_1 keeps row 1 only.
  const auto hard = hard_threshold(T, 1, RowNorm::L1);
  CHECK(hard.support == std::vector<Index>{1});
  // Any delta that removes row 0 removes row 1 too; no delta keeps row 1
  // alone.
  for (double delta = 0.0; delta <= 11.0; delta += 0.01) {
    CHECK(soft_threshold(T, delta).support != hard.support);
  }
}

TEST_CASE("property: hard threshold invariants over random matrices") {
  Rng rng(2024);
  std::uniform_int_distribution<Index> ppick(1, 30);
  std::uniform_int_distribution<Index> gpick(1, 5);
  std::uniform_int_distribution<int> coin(0, 3);
  std::uniform_int_distribution<int> small(-2, 2);
  for (int c = 0; c < 2000; ++c) {
    const Index p = ppick(rng);
    const Index G = gpick(rng);
    Matrix T = gaussian_matrix(p, G, rng);
    // Plant zero rows and integer-valued rows so that norm ties happen.
    for (Index i = 0; i < p; ++i) {
      const int kind = coin(rng);
      if (kind == 0) {
        T.row(i).setZero();
      } else if (kind == 1) {
        for (Index g = 0; g < G; ++g) {
          T(i, g) = small(rng);
        }
      }
    }
    const Index nonzero = static_cast<Index>(nonzero_rows(T).size());
    const RowNorm q = std::array{RowNorm::L1, RowNorm::L2, RowNorm::Linf}[c % 3];
    const Vector norms = row_norms(T, q);
    std::vector<Index> prev;
    for (Index K = 1; K <= p; ++K) {
      const auto h = hard_threshold(T, K, q);
      CHECK(static_cast<Index>(h.support.size()) == std::min(K, nonzero));
      CHECK(h.support == nonzero_rows(h.B));
      CHECK(std::includes(h.support.begin(), h.support.end(), prev.begin(), prev.end()));
      for (Index i : h.support) {
        CHECK(h.B.row(i) == T.row(i));
      }
      // No dropped row beats a kept row; equal norms keep the smaller index.
      for (Index i = 0; i < p; ++i) {
        const bool kept = std::binary_search(h.support.begin(), h.support.end(), i);
        if (kept || norms(i) == 0.0) {
          continue;
        }
        for (Index j : h.support) {
          CHECK(norms(j) >= norms(i));
          if (norms(j) == norms(i)) {
            CHECK(j < i);
          }
        }
      }
      prev = h.support;
    }
  }
}

TEST_CASE("coefficient matrix matches dense oracle") {
  Rng rng(16);
  const auto ds = test::shifted_groups(3, 6, 40, 4, 1.0, rng);  // n = 18
  const auto means = class_means(ds);
  const auto c = center_by_class(ds, means);
  const auto f = thin_svd_via_gram(c);
  for (double alpha : {0.0, 0.6}) {
    const auto rc = build_rscm(f, alpha);
    const Matrix T = coefficient_matrix(rc, means);
    const Matrix oracle = test::dense_rscm(c.Xc, alpha).inverse() * means.means;
    CHECK((T - oracle).cwiseAbs().maxCoeff() < 1e-8);
    if (alpha == 0.0) {
      CHECK((T - means.means / eta(f)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  ClassMeans zero = means;
  zero.means.setZero();
  CHECK(coefficient_matrix(build_rscm(f, 0.3), zero).isZero());
}

TEST_CASE("discriminant arithmetic by hand") {
  TrainedModel m;
  m.p = 2;
  m.coef.B = Matrix::Identity(2, 2);
  m.coef.support = {0, 1};
  m.means = Matrix::Identity(2, 2);
  m.diag_term = Vector::Constant(2, 0.5);
  m.log_priors = Vector::Constant(2, std::log(0.5));
  m.group_names = {"a", "b"};
  Matrix x(1, 2);
  x << 1, 0;
  const Matrix d = discriminants(m, x);
  CHECK(d(0, 0) == doctest::Approx(0.5 + std::log(0.5)));
  CHECK(d(0, 1) == doctest::Approx(-0.5 + std::log(0.5)));
  const Matrix d0 = discriminants(m, Matrix::Zero(1, 2));
  CHECK(d0(0, 0) == doctest::Approx(-0.5 + std::log(0.5)));
  CHECK_THROWS_AS(discriminants(m, Matrix::Zero(1, 3)), DataError);
}

TEST_CASE("argmax rule") {
  Eigen::RowVectorXd row(3);
  row << 0.2, 0.9, 0.1;
  CHECK(argmax_group(row) == 1);
  Eigen::RowVectorXd tie(2);
  tie << 1.0, 1.0;
  CHECK(argmax_group(tie) == 0);
}

TEST_CASE("trained model invariants and support-only discriminants") {
  Rng rng(17);
  const auto ds = test::shifted_groups(4, 10, 60, 5, 1.5, rng);
  TrainOptions o;
  o.alpha = 0.35;
  o.k = 12;
  o.q = RowNorm::L2;
  const auto model = train(ds, o);
  CHECK(model.coef.support.size() <= 12);
  CHECK(nfs(model) == static_cast<Index>(selected_features(model).size()));
  CHECK(model.log_priors.array().exp().sum() == doctest::Approx(1.0).epsilon(1e-12));
  for (int g = 0; g < model.groups(); ++g) {
    const double expect = 0.5 * model.means.col(g).dot(model.coef.B.col(g));
    CHECK(model.diag_term(g) == doctest::Approx(expect).epsilon(1e-10));
  }
  const Matrix Xt = gaussian_matrix(50, 60, rng);
  CHECK((discriminants(model, Xt) - discriminants_dense(model, Xt)).cwiseAbs().maxCoeff() <
        1e-12);

  o.k = 60;
  CHECK(selected_features(train(ds, o)).size() == 60);
  o.k = 3;
  CHECK(selected_features(train(ds, o)).size() <= 3);
  o.k = 61;
  CHECK_THROWS_AS(train(ds, o), InvalidArgument);
}

TEST_CASE("priors validation") {
  Rng rng(18);
  const auto ds = test::shifted_groups(2, 5, 8, 2, 1.0, rng);
  TrainOptions o;
  o.k = 8;
  o.priors = Vector::Constant(2, 0.4);
  CHECK_THROWS_AS(train(ds, o), InvalidArgument);
  o.priors = Vector::Constant(3, 1.0 / 3.0);
  CHECK_THROWS_AS(train(ds, o), InvalidArgument);
  o.priors = (Vector(2) << 1.0, 0.0).finished();
  CHECK_THROWS_AS(train(ds, o), InvalidArgument);
  o.priors = (Vector(2) << 0.3, 0.7).finished();
  const auto m = train(ds, o);
  CHECK(m.log_priors(1) == doctest::Approx(std::log(0.7)));
}

TEST_CASE("alpha = 0, K = p, equal priors reduces to nearest centroid") {
  Rng rng(19);
  const auto ds = test::shifted_groups(3, 15, 20, 4, 3.0, rng);
  TrainOptions o;
  o.alpha = 0.0;
  o.k = ds.p();
  o.priors = equal_priors(3);
  const auto model = train(ds, o);
  const Matrix Xt = 2.0 * gaussian_matrix(1000, 20, rng);
  const auto oracle = test::nearest_centroid(class_means(ds).means, Xt);
  CHECK(predict(model, Xt) == oracle);
}

TEST_CASE("property: scaling means and test points preserves predictions at alpha = 0") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const auto ds = test::shifted_groups(3, 8, 15, 3, 2.0, rng);
    const Matrix Xt = gaussian_matrix(200, 15, rng);
    TrainOptions o;
    o.alpha = 0.0;
    o.k = 15;
    o.priors = equal_priors(3);
    const auto base = predict(train(ds, o), Xt);
    const double c = 0.5 + trial;
    const LabeledDataset scaled(Matrix(c * ds.X()), ds.labels(), ds.group_names());
    CHECK(predict(train(scaled, o), Matrix(c * Xt)) == base);
  }
}

TEST_CASE("identical means predict the first group everywhere") {
  Rng rng(24);
  // Each group is a mirrored pair, so all class means are zero.
  Matrix X(6, 4);
  const Matrix half = gaussian_matrix(3, 4, rng);
  X.topRows(3) = half;
  X.bottomRows(3) = -half;
  const LabeledDataset ds(X, {0, 1, 2, 0, 1, 2}, {"x", "y", "z"});
  TrainOptions o;
  o.alpha = 0.5;
  o.k = 4;
  o.priors = equal_priors(3);
  const auto model = train(ds, o);
  const auto pred = predict_labels(model, gaussian_matrix(25, 4, rng));
  CHECK(std::all_of(pred.begin(), pred.end(), [](const std::string& s) { return s == "x"; }));
}

TEST_CASE("separable toy problem is learned exactly") {
  Rng rng(25);
  const auto ds = test::shifted_groups(2, 20, 30, 5, 8.0, rng);
  TrainOptions o;
  o.alpha = 0.5;
  o.k = 10;
  const auto model = train(ds, o);
  CHECK(predict(model, ds.X()) == ds.labels());
  CHECK(selected_feature_names(model).size() == model.coef.support.size());
}

TEST_CASE("soft-threshold training") {
  Rng rng(26);
  const auto ds = test::shifted_groups(2, 10, 12, 3, 2.0, rng);
  SoftTrainOptions o;
  o.alpha = 0.4;
  o.delta = 0.0;
  const auto dense = train_soft(ds, o);
  CHECK(dense.coef.support.size() == 12);
  CHECK(dense.hyper.target == ShrinkageTarget::Identity);
  o.delta = 1e6;
  CHECK(train_soft(ds, o).coef.support.empty());
}
