#include <cmath>

#include "doctest.h"
#include "gradcheck.hpp"
#include "tabl/layers.hpp"

using namespace tabl;
using namespace tabl::gradcheck;

namespace {

// Step-by-step scalar-loop re-implementation of the TABL forward pass,
// kept independent of the Matrix kernels it checks.
Matrix reference_tabl_forward(const Matrix& x, const TablParams& p) {
  const int D = x.rows(), T = x.cols();
  const int Dp = p.w1.rows(), Tp = p.w2.cols();
  std::vector<std::vector<double>> xbar(Dp, std::vector<double>(T, 0));
  for (int i = 0; i < Dp; ++i)
    for (int t = 0; t < T; ++t)
      for (int d = 0; d < D; ++d) xbar[i][t] += double(p.w1(i, d)) * x(d, t);

  std::vector<std::vector<double>> e(Dp, std::vector<double>(T, 0));
  for (int i = 0; i < Dp; ++i)
    for (int j = 0; j < T; ++j)
      for (int k = 0; k < T; ++k) e[i][j] += xbar[i][k] * double(p.w(k, j));

  std::vector<std::vector<double>> a(Dp, std::vector<double>(T, 0));
  for (int i = 0; i < Dp; ++i) {
    double denom = 0;
    for (int k = 0; k < T; ++k) denom += std::exp(e[i][k]);
    for (int j = 0; j < T; ++j) a[i][j] = std::exp(e[i][j]) / denom;
  }

  std::vector<std::vector<double>> xt(Dp, std::vector<double>(T, 0));
  for (int i = 0; i < Dp; ++i)
    for (int j = 0; j < T; ++j)
      xt[i][j] = double(p.lambda) * xbar[i][j] * a[i][j] +
                 (1.0 - double(p.lambda)) * xbar[i][j];

  Matrix y(Dp, Tp);
  for (int i = 0; i < Dp; ++i) {
    for (int j = 0; j < Tp; ++j) {
      double v = double(p.b(i, j));
      for (int t = 0; t < T; ++t) v += xt[i][t] * double(p.w2(t, j));
      if (p.activation == ActivationKind::Relu && v < 0) v = 0;
      y(i, j) = Scalar(v);
    }
  }
  return y;
}

}  // namespace

TEST_CASE("bl_forward identity configuration") {
  BlParams p;
  p.w1 = Matrix::identity(3);
  p.w2 = Matrix::identity(4);
  p.b = Matrix(3, 4);
  p.activation = ActivationKind::Identity;
  Rng rng(1);
  Matrix x = random_matrix(3, 4, rng);
  BlCache cache;
  Matrix y = bl_forward(x, p, cache);
  for (int i = 0; i < x.size(); ++i) CHECK(y.data()[i] == x.data()[i]);
}

TEST_CASE("bl_forward hand example") {
  BlParams p;
  p.w1 = Matrix(1, 2, {1, 1});
  p.w2 = Matrix(2, 1, {1, 1});
  p.b = Matrix(1, 1);
  Matrix x(2, 2, {1, 2, 3, 4});
  BlCache cache;
  Matrix y = bl_forward(x, p, cache);
  CHECK(y.rows() == 1);
  CHECK(y.cols() == 1);
  CHECK(y(0, 0) == doctest::Approx(10));
}

TEST_CASE("bl_forward regression-shaped output") {
  // The bilinear regression special case: 40x10 input to a 3x1 class score.
  Rng rng(3);
  BlParams p = random_bl({40, 10, 3, 1}, ActivationKind::Identity, rng);
  Matrix x = random_matrix(40, 10, rng);
  BlCache cache;
  Matrix y = bl_forward(x, p, cache);
  CHECK(y.rows() == 3);
  CHECK(y.cols() == 1);
  CHECK_THROWS_AS(bl_forward(random_matrix(40, 9, rng), p, cache), ShapeError);
}

TEST_CASE("bl_backward zero upstream gradient") {
  Rng rng(4);
  BlParams p = random_bl({4, 5, 3, 2}, ActivationKind::Relu, rng);
  Matrix x = random_matrix(4, 5, rng);
  BlCache cache;
  bl_forward(x, p, cache);
  BlGrads g = bl_backward(Matrix(3, 2), cache, p);
  CHECK(max_abs(g.d_w1) == 0);
  CHECK(max_abs(g.d_w2) == 0);
  CHECK(max_abs(g.d_b) == 0);
  CHECK(max_abs(g.d_x) == 0);
}

TEST_CASE("bl_backward identity reduction: d_w1 == d_y") {
  // With phi identity, x = I, W2 = I: Y = W1 + B so dL/dW1 = dL/dY.
  BlParams p;
  p.w1 = Matrix(3, 3, {1, 2, 0, -1, 0.5, 2, 0, 1, 1});
  p.w2 = Matrix::identity(3);
  p.b = Matrix(3, 3);
  BlCache cache;
  bl_forward(Matrix::identity(3), p, cache);
  Rng rng(5);
  Matrix d_y = random_matrix(3, 3, rng);
  BlGrads g = bl_backward(d_y, cache, p);
  for (int i = 0; i < d_y.size(); ++i)
    CHECK(g.d_w1.data()[i] == doctest::Approx(d_y.data()[i]).epsilon(1e-12));
}

TEST_CASE("bl_backward matches finite differences") {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const ActivationKind act =
        trial % 2 ? ActivationKind::Relu : ActivationKind::Identity;
    LayerDims dims{2 + trial % 4, 2 + (trial + 1) % 4, 1 + trial % 3,
                   1 + (trial + 2) % 3};
    BlParams p = random_bl(dims, act, rng);
    Matrix x = random_matrix(dims.in_features, dims.in_steps, rng);
    Matrix d_y = random_matrix(dims.out_features, dims.out_steps, rng);
    CheckResult r = check_bl(x, p, d_y);
    INFO("worst entry ", r.worst);
    CHECK(r.max_rel_err < 1e-5);
  }
}

TEST_CASE("tabl_forward lambda=0 collapses to bl_forward bit-for-bit") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    LayerDims dims{4, 5, 3, 2};
    TablParams tp = random_tabl(dims, ActivationKind::Relu, rng);
    tp.lambda = 0;
    BlParams bp{tp.w1, tp.w2, tp.b, tp.activation};
    Matrix x = random_matrix(4, 5, rng);
    TablCache tc;
    BlCache bc;
    Matrix yt = tabl_forward(x, tp, tc);
    Matrix yb = bl_forward(x, bp, bc);
    for (int i = 0; i < yt.size(); ++i) CHECK(yt.data()[i] == yb.data()[i]);
  }
}

TEST_CASE("tabl_forward uniform attention at initialization") {
  // W all 1/T makes every e-row constant, so A is uniform and the mix is a
  // plain rescale of xbar.
  Rng rng(8);
  LayerDims dims{4, 5, 3, 2};
  TablParams p = init_tabl(dims, ActivationKind::Identity, 99);
  p.lambda = Scalar(0.7);
  Matrix x = random_matrix(4, 5, rng);
  TablCache cache;
  tabl_forward(x, p, cache);
  const double t = dims.in_steps;
  for (int i = 0; i < cache.a.size(); ++i)
    CHECK(cache.a.data()[i] == doctest::Approx(1.0 / t).epsilon(1e-12));
  const double factor = 0.7 / t + 1 - 0.7;
  for (int i = 0; i < cache.xtilde.size(); ++i)
    CHECK(cache.xtilde.data()[i] ==
          doctest::Approx(factor * cache.xbar.data()[i]).epsilon(1e-12));
}

TEST_CASE("tabl_forward matches independent reference") {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    LayerDims dims{4, 5, 3, 2};
    TablParams p = random_tabl(
        dims, trial % 2 ? ActivationKind::Relu : ActivationKind::Identity, rng);
    p.lambda = Scalar(0.7);
    Matrix x = random_matrix(4, 5, rng);
    TablCache cache;
    Matrix y = tabl_forward(x, p, cache);
    Matrix ref = reference_tabl_forward(x, p);
    for (int i = 0; i < y.size(); ++i)
      CHECK(double(y.data()[i]) ==
            doctest::Approx(double(ref.data()[i])).epsilon(1e-10));
    for (int i = 0; i < cache.a.rows(); ++i) {
      double row = 0;
      for (int j = 0; j < cache.a.cols(); ++j) row += cache.a(i, j);
      CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("tabl_backward zero upstream gradient and zero input") {
  Rng rng(10);
  LayerDims dims{4, 5, 3, 2};
  TablParams p = random_tabl(dims, ActivationKind::Identity, rng);
  Matrix x = random_matrix(4, 5, rng);
  TablCache cache;
  tabl_forward(x, p, cache);
  TablGrads g = tabl_backward(Matrix(3, 2), cache, p);
  CHECK(max_abs(g.d_w1) == 0);
  CHECK(max_abs(g.d_w) == 0);
  CHECK(max_abs(g.d_w2) == 0);
  CHECK(max_abs(g.d_b) == 0);
  CHECK(g.d_lambda == 0);

  // x = 0 makes xbar = 0 and the mix insensitive to lambda.
  TablCache zc;
  tabl_forward(Matrix(4, 5), p, zc);
  TablGrads zg = tabl_backward(random_matrix(3, 2, rng), zc, p);
  CHECK(zg.d_lambda == doctest::Approx(0.0));
}

TEST_CASE("tabl_backward matches finite differences over random dims") {
  Rng rng(11);
  std::uniform_int_distribution<int> dim(1, 6);
  int done = 0;
  while (done < 20) {
    LayerDims dims{dim(rng), dim(rng), dim(rng), dim(rng)};
    const ActivationKind act =
        done % 3 == 2 ? ActivationKind::Relu : ActivationKind::Identity;
    TablParams p = random_tabl(dims, act, rng);
    Matrix x = random_matrix(dims.in_features, dims.in_steps, rng);
    TablCache cache;
    Matrix y = tabl_forward(x, p, cache);
    if (act == ActivationKind::Relu && max_abs(cache.ybar) > 0) {
      // Skip instances with a pre-activation near the ReLU kink, where
      // finite differences are meaningless.
      bool near_kink = false;
      for (int i = 0; i < cache.ybar.size(); ++i)
        if (std::abs(double(cache.ybar.data()[i])) < 1e-3) near_kink = true;
      if (near_kink) continue;
    }
    Matrix d_y = random_matrix(dims.out_features, dims.out_steps, rng);
    CheckResult r = check_tabl(x, p, d_y);
    INFO("dims ", dims.in_features, "x", dims.in_steps, "->",
         dims.out_features, "x", dims.out_steps, " worst ", r.worst);
    CHECK(r.max_rel_err < 1e-5);
    ++done;
  }
}

TEST_CASE("tabl_backward keeps the fixed diagonal gradient at zero") {
  Rng rng(12);
  LayerDims dims{3, 6, 2, 2};
  TablParams p = random_tabl(dims, ActivationKind::Identity, rng);
  Matrix x = random_matrix(3, 6, rng);
  TablCache cache;
  tabl_forward(x, p, cache);
  TablGrads g = tabl_backward(random_matrix(2, 2, rng), cache, p);
  for (int i = 0; i < g.d_w.rows(); ++i) CHECK(g.d_w(i, i) == 0);
}

TEST_CASE("column permutation equivariance at the xtilde stage") {
  // Permuting input columns, with W rows+cols and W2 rows permuted to
  // match, permutes xtilde's columns the same way.
  Rng rng(13);
  LayerDims dims{4, 5, 3, 2};
  TablParams p = random_tabl(dims, ActivationKind::Identity, rng);
  Matrix x = random_matrix(4, 5, rng);
  std::vector<int> perm{2, 0, 4, 1, 3};

  TablCache base;
  tabl_forward(x, p, base);

  Matrix xp(4, 5);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 5; ++j) xp(i, j) = x(i, perm[j]);
  TablParams pp = p;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) pp.w(i, j) = p.w(perm[i], perm[j]);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < p.w2.cols(); ++j) pp.w2(i, j) = p.w2(perm[i], j);
  TablCache permuted;
  tabl_forward(xp, pp, permuted);

  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(double(permuted.xtilde(i, j)) ==
            doctest::Approx(double(base.xtilde(i, perm[j]))).epsilon(1e-12));
}

TEST_CASE("init_tabl constants and determinism") {
  LayerDims dims{40, 10, 3, 1};
  TablParams p = init_tabl(dims, ActivationKind::Identity, 77);
  for (int i = 0; i < p.w.size(); ++i)
    CHECK(p.w.data()[i] == doctest::Approx(0.1));
  CHECK(p.lambda == doctest::Approx(0.5));
  CHECK(max_abs(p.b) == 0);

  TablParams q = init_tabl(dims, ActivationKind::Identity, 77);
  for (int i = 0; i < p.w1.size(); ++i)
    CHECK(p.w1.data()[i] == q.w1.data()[i]);
  TablParams r = init_tabl(dims, ActivationKind::Identity, 78);
  bool any_diff = false;
  for (int i = 0; i < p.w1.size(); ++i)
    if (p.w1.data()[i] != r.w1.data()[i]) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("init variance follows the 2/fan_in scheme") {
  // 10^5 draws of W1 entries with fan_in = 40.
  double sq = 0;
  long n = 0;
  for (int seed = 0; seed < 100; ++seed) {
    BlParams p = init_bl({40, 10, 25, 1}, ActivationKind::Identity, 1000 + seed);
    for (int i = 0; i < p.w1.size(); ++i) {
      sq += double(p.w1.data()[i]) * p.w1.data()[i];
      ++n;
    }
  }
  CHECK(n >= 100000);
  const double var = sq / n;
  CHECK(var == doctest::Approx(2.0 / 40).epsilon(0.1));
}

TEST_CASE("apply_constraints clips lambda and restores the diagonal") {
  TablParams p = init_tabl({4, 10, 3, 1}, ActivationKind::Identity, 5);
  p.lambda = Scalar(1.3);
  apply_constraints(p);
  CHECK(p.lambda == 1.0);
  p.lambda = Scalar(-0.2);
  apply_constraints(p);
  CHECK(p.lambda == 0.0);
  p.w(2, 2) = Scalar(0.4);
  apply_constraints(p);
  CHECK(p.w(2, 2) == Scalar(0.1));
}
