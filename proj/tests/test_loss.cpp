#include <cmath>

#include "doctest.h"
#include "tabl/loss.hpp"
#include "tabl/rng.hpp"

using namespace tabl;

TEST_CASE("softmax_head symmetry and hand value") {
  Matrix probs = softmax_head(Matrix(3, 1));
  for (int i = 0; i < 3; ++i) CHECK(probs(i, 0) == doctest::Approx(1.0 / 3));

  Matrix logits(3, 1, {std::log(2.0), 0, 0});
  Matrix p = softmax_head(logits);
  CHECK(p(0, 0) == doctest::Approx(0.5));
  CHECK(p(1, 0) == doctest::Approx(0.25));
  CHECK(p(2, 0) == doctest::Approx(0.25));
}

TEST_CASE("softmax_head argmax invariant under shift") {
  Matrix logits(3, 1, {0.3, 2.1, -1.0});
  Matrix a = softmax_head(logits);
  Matrix shifted(3, 1, {0.3 + 40, 2.1 + 40, -1.0 + 40});
  Matrix b = softmax_head(shifted);
  for (int i = 0; i < 3; ++i)
    CHECK(a(i, 0) == doctest::Approx(b(i, 0)).epsilon(1e-12));
}

TEST_CASE("weighted_ce perfect prediction and uniform value") {
  ClassWeights w;
  w.counts = {1, 1, 1};
  Matrix onehot(3, 1, {0, 1, 0});
  CHECK(weighted_ce(onehot, 1, w).loss == doctest::Approx(0.0).epsilon(1e-9));

  Matrix uniform = Matrix::constant(3, 1, Scalar(1.0 / 3));
  for (int label = 0; label < 3; ++label) {
    CHECK(double(weighted_ce(uniform, label, w).loss) ==
          doctest::Approx(1e6 * std::log(3.0)).epsilon(1e-9));
  }
  CHECK_THROWS(weighted_ce(uniform, 5, w));
}

TEST_CASE("weighted_ce gradient matches finite differences") {
  ClassWeights w;
  w.counts = {120, 45, 300};
  Rng rng(21);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 10; ++trial) {
    Matrix logits(3, 1);
    for (int i = 0; i < 3; ++i) logits(i, 0) = Scalar(dist(rng));
    const int label = trial % 3;
    const CeResult ce = weighted_ce(softmax_head(logits), label, w);
    for (int i = 0; i < 3; ++i) {
      const double h = 1e-6;
      auto loss_at = [&](double v) {
        Matrix l2 = logits;
        l2(i, 0) = Scalar(v);
        return double(weighted_ce(softmax_head(l2), label, w).loss);
      };
      const double num =
          (loss_at(logits(i, 0) + h) - loss_at(logits(i, 0) - h)) / (2 * h);
      const double denom = std::max({std::abs(num), std::abs(double(ce.d_logits(i, 0))), 1.0});
      CHECK(std::abs(double(ce.d_logits(i, 0)) - num) / denom < 1e-6);
    }
  }
}

TEST_CASE("weighted_ce equals scaled plain cross-entropy for equal counts") {
  ClassWeights w;
  w.counts = {50, 50, 50};
  Matrix probs(3, 1, {0.6, 0.3, 0.1});
  const double expected = (1e6 / 50) * -std::log(0.3);
  CHECK(double(weighted_ce(probs, 1, w).loss) ==
        doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("compute_metrics perfect classifier") {
  Confusion c{{{10, 0, 0}, {0, 7, 0}, {0, 0, 3}}};
  MetricsReport r = compute_metrics(c);
  CHECK(r.accuracy == doctest::Approx(1.0));
  CHECK(r.macro_precision == doctest::Approx(1.0));
  CHECK(r.macro_recall == doctest::Approx(1.0));
  CHECK(r.macro_f1 == doctest::Approx(1.0));
}

TEST_CASE("compute_metrics hand computation with a zero-prediction class") {
  Confusion c{{{5, 0, 0}, {0, 0, 5}, {0, 0, 5}}};
  MetricsReport r = compute_metrics(c);
  CHECK(r.accuracy == doctest::Approx(10.0 / 15));
  // precision: class0 1, class1 0 (never predicted), class2 0.5
  CHECK(r.macro_precision == doctest::Approx((1.0 + 0 + 0.5) / 3));
  // recall: 1, 0, 1
  CHECK(r.macro_recall == doctest::Approx(2.0 / 3));
}

TEST_CASE("compute_metrics permutation symmetry and f1 bounds") {
  Confusion c{{{8, 2, 1}, {3, 9, 2}, {0, 4, 7}}};
  MetricsReport r = compute_metrics(c);
  // Relabeling 0<->2 keeps the macro metrics.
  Confusion p{};
  const int map[3] = {2, 1, 0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) p[map[i]][map[j]] = c[i][j];
  MetricsReport rp = compute_metrics(p);
  CHECK(r.macro_f1 == doctest::Approx(rp.macro_f1).epsilon(1e-12));
  CHECK(r.accuracy == doctest::Approx(rp.accuracy).epsilon(1e-12));

  // macro f1 between the per-class min and max.
  double f1[3];
  for (int k = 0; k < 3; ++k) {
    long pred = 0, truth = 0;
    for (int i = 0; i < 3; ++i) {
      pred += c[i][k];
      truth += c[k][i];
    }
    const double prec = double(c[k][k]) / pred;
    const double rec = double(c[k][k]) / truth;
    f1[k] = 2 * prec * rec / (prec + rec);
  }
  CHECK(r.macro_f1 >= std::min({f1[0], f1[1], f1[2]}) - 1e-12);
  CHECK(r.macro_f1 <= std::max({f1[0], f1[1], f1[2]}) + 1e-12);

  CHECK_THROWS(compute_metrics(Confusion{}));
}

TEST_CASE("metrics serialization column order") {
  Confusion c{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  MetricsReport r = compute_metrics(c);
  CHECK(r.csv_row() == "1,1,1,1");
  CHECK(r.to_json().find("\"accuracy\":1") != std::string::npos);
}
