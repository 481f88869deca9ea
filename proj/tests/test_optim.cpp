#include <cmath>

#include "doctest.h"
#include "tabl/optim.hpp"

using namespace tabl;

TEST_CASE("nesterov step hand recurrence") {
  Optimizer opt(OptimizerKind::SgdNesterov, Scalar(0.1));
  Matrix theta(1, 1);
  Matrix g = Matrix::constant(1, 1, 1);
  opt.step(0, theta, g);
  CHECK(double(theta(0, 0)) == doctest::Approx(-0.19).epsilon(1e-12));
  opt.step(0, theta, g);
  CHECK(double(theta(0, 0)) == doctest::Approx(-0.461).epsilon(1e-12));
}

TEST_CASE("nesterov zero gradient leaves parameters unchanged") {
  Optimizer opt(OptimizerKind::SgdNesterov, Scalar(0.1));
  Matrix theta(2, 2, {1, 2, 3, 4});
  opt.step(0, theta, Matrix(2, 2));
  CHECK(theta(0, 0) == 1);
  CHECK(theta(1, 1) == 4);
}

TEST_CASE("adam zero gradient with zero buffers is a no-op") {
  Optimizer opt(OptimizerKind::Adam, Scalar(0.01));
  Matrix theta(2, 1, {5, -3});
  opt.step(0, theta, Matrix(2, 1));
  CHECK(theta(0, 0) == 5);
  CHECK(theta(1, 0) == -3);
}

TEST_CASE("adam first step is approximately -lr*sign(g)") {
  Optimizer opt(OptimizerKind::Adam, Scalar(0.01));
  Matrix theta(3, 1);
  Matrix g(3, 1, {2.5, -0.003, 40});
  opt.step(0, theta, g);
  CHECK(double(theta(0, 0)) == doctest::Approx(-0.01).epsilon(1e-4));
  CHECK(double(theta(1, 0)) == doctest::Approx(0.01).epsilon(1e-4));
  CHECK(double(theta(2, 0)) == doctest::Approx(-0.01).epsilon(1e-4));
}

TEST_CASE("adam replay determinism") {
  auto run = [] {
    Optimizer opt(OptimizerKind::Adam, Scalar(0.01));
    Rng rng(5);
    std::normal_distribution<double> dist;
    Matrix theta(4, 3);
    for (int step = 0; step < 50; ++step) {
      Matrix g(4, 3);
      for (int i = 0; i < g.size(); ++i) g.data()[i] = Scalar(dist(rng));
      opt.step(0, theta, g);
    }
    return theta;
  };
  Matrix a = run(), b = run();
  for (int i = 0; i < a.size(); ++i) CHECK(a.data()[i] == b.data()[i]);
}

TEST_CASE("optimizer rejects shape mismatch") {
  Optimizer opt(OptimizerKind::Adam, Scalar(0.01));
  Matrix theta(2, 2);
  CHECK_THROWS_AS(opt.step(0, theta, Matrix(2, 3)), ShapeError);
}

TEST_CASE("lr schedule walks the ladder on plateaus") {
  LrSchedule sched;
  CHECK(sched.lr() == Scalar(0.01));

  // Strictly decreasing losses never step the schedule.
  for (int i = 0; i < 30; ++i) CHECK(sched.update(100.0 - i) == Scalar(0.01));

  // One improving epoch, then a plateau of patience epochs advances the
  // cursor once.
  for (int i = 0; i <= sched.patience; ++i) sched.update(70.0);
  CHECK(sched.lr() == Scalar(0.005));

  // Exhaust the ladder; it saturates at the last entry.
  for (int i = 0; i < 100; ++i) sched.update(70.0);
  CHECK(sched.lr() == Scalar(0.0001));
}

TEST_CASE("lr schedule is non-increasing over arbitrary losses") {
  LrSchedule sched;
  Rng rng(17);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  Scalar prev = sched.lr();
  for (int i = 0; i < 200; ++i) {
    Scalar lr = sched.update(u(rng));
    CHECK(lr <= prev);
    prev = lr;
  }
}

TEST_CASE("dropout identities") {
  Rng rng(3);
  Matrix x(4, 4, {1, 2,  3,  4,  5,  6,  7,  8,
                  9, 10, 11, 12, 13, 14, 15, 16});
  Matrix same = dropout(x, 0, rng, true);
  for (int i = 0; i < x.size(); ++i) CHECK(same.data()[i] == x.data()[i]);
  Matrix inf = dropout(x, Scalar(0.5), rng, false);
  for (int i = 0; i < x.size(); ++i) CHECK(inf.data()[i] == x.data()[i]);
  CHECK_THROWS(dropout(x, Scalar(1.0), rng, true));
}

TEST_CASE("dropout preserves expectation") {
  Rng rng(4);
  const Scalar rate = Scalar(0.1);
  Matrix x = Matrix::constant(2, 2, 3);
  double acc[4] = {0, 0, 0, 0};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    Matrix d = dropout(x, rate, rng, true);
    for (int k = 0; k < 4; ++k) acc[k] += d.data()[k];
  }
  for (int k = 0; k < 4; ++k)
    CHECK(acc[k] / n == doctest::Approx(3.0).epsilon(0.01));
}

TEST_CASE("max_norm_project row and column axes") {
  // A row with norm 10 against bound 5 is halved; norms within bound stay.
  Matrix w(2, 2, {6, 8, 1, 1});
  max_norm_project(w, 5, NormAxis::Row);
  CHECK(double(w(0, 0)) == doctest::Approx(3.0));
  CHECK(double(w(0, 1)) == doctest::Approx(4.0));
  CHECK(double(w(1, 0)) == doctest::Approx(1.0));

  Matrix v(2, 1, {0, 0});
  max_norm_project(v, 3, NormAxis::Col);  // zero vector untouched
  CHECK(v(0, 0) == 0);

  Matrix c(2, 2, {6, 1, 8, 1});
  max_norm_project(c, 5, NormAxis::Col);
  CHECK(double(c(0, 0)) == doctest::Approx(3.0));
  CHECK(double(c(1, 0)) == doctest::Approx(4.0));
  CHECK(double(c(0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("max_norm_project property: norms bounded after projection") {
  Rng rng(9);
  std::normal_distribution<double> dist(0, 5);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix w(6, 4);
    for (int i = 0; i < w.size(); ++i) w.data()[i] = Scalar(dist(rng));
    max_norm_project(w, 3, NormAxis::Row);
    for (int r = 0; r < w.rows(); ++r) {
      double sq = 0;
      for (int c = 0; c < w.cols(); ++c) sq += double(w(r, c)) * w(r, c);
      CHECK(std::sqrt(sq) <= 3.0 + 1e-9);
    }
  }
}
