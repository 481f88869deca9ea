#include "tabl/optim.hpp"

#include <cmath>

namespace tabl {

Optimizer::Slot& Optimizer::slot_for(int id, int rows, int cols) {
  auto it = slots_.find(id);
  if (it == slots_.end()) {
    Slot s;
    if (kind_ == OptimizerKind::SgdNesterov) {
      s.velocity = Matrix(rows, cols);
    } else {
      s.m1 = Matrix(rows, cols);
      s.m2 = Matrix(rows, cols);
    }
    it = slots_.emplace(id, std::move(s)).first;
  }
  return it->second;
}

void Optimizer::step(int slot, Matrix& param, const Matrix& grad) {
  if (!param.same_shape(grad)) {
    throw ShapeError("optimizer step: param " + param.shape_str() +
                     " vs grad " + grad.shape_str());
  }
  Slot& s = slot_for(slot, param.rows(), param.cols());
  if (kind_ == OptimizerKind::SgdNesterov) {
    if (!s.velocity.same_shape(param)) {
      throw ShapeError("optimizer slot reused with different shape");
    }
    // v <- mu v - lr g;  theta <- theta + mu v - lr g
    for (int i = 0; i < param.size(); ++i) {
      const Scalar g = grad.data()[i];
      Scalar& v = s.velocity.data()[i];
      v = static_cast<Scalar>(kMomentum) * v - lr_ * g;
      param.data()[i] += static_cast<Scalar>(kMomentum) * v - lr_ * g;
    }
  } else {
    if (!s.m1.same_shape(param)) {
      throw ShapeError("optimizer slot reused with different shape");
    }
    ++s.t;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(s.t));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(s.t));
    for (int i = 0; i < param.size(); ++i) {
      const double g = grad.data()[i];
      Scalar& m1 = s.m1.data()[i];
      Scalar& m2 = s.m2.data()[i];
      m1 = static_cast<Scalar>(kBeta1 * m1 + (1.0 - kBeta1) * g);
      m2 = static_cast<Scalar>(kBeta2 * m2 + (1.0 - kBeta2) * g * g);
      const double mhat = m1 / bc1;
      const double vhat = m2 / bc2;
      param.data()[i] -= static_cast<Scalar>(lr_ * mhat / (std::sqrt(vhat) + kEps));
    }
  }
}

void Optimizer::step_scalar(int slot, Scalar& param, Scalar grad) {
  Matrix p(1, 1);
  p(0, 0) = param;
  Matrix g(1, 1);
  g(0, 0) = grad;
  step(slot, p, g);
  param = p(0, 0);
}

Scalar LrSchedule::update(double epoch_train_loss) {
  if (epoch_train_loss < best_loss - tolerance) {
    best_loss = epoch_train_loss;
    epochs_without_improvement = 0;
  } else {
    ++epochs_without_improvement;
    if (epochs_without_improvement >= patience) {
      if (cursor + 1 < static_cast<int>(ladder.size())) ++cursor;
      epochs_without_improvement = 0;
    }
  }
  return ladder[cursor];
}

Matrix dropout_mask(int rows, int cols, Scalar rate, Rng& rng) {
  const Scalar keep_scale = Scalar{1} / (Scalar{1} - rate);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix mask(rows, cols);
  for (int i = 0; i < mask.size(); ++i)
    mask.data()[i] = u(rng) < rate ? Scalar{0} : keep_scale;
  return mask;
}

Matrix dropout(const Matrix& x, Scalar rate, Rng& rng, bool training) {
  if (rate < Scalar{0} || rate >= Scalar{1}) {
    throw std::invalid_argument("dropout rate must be in [0,1)");
  }
  if (!training || rate == Scalar{0}) return x;
  return hadamard(x, dropout_mask(x.rows(), x.cols(), rate, rng));
}

void max_norm_project(Matrix& w, Scalar bound, NormAxis axis) {
  if (bound <= Scalar{0}) {
    throw std::invalid_argument("max_norm_project: bound must be positive");
  }
  const int vectors = axis == NormAxis::Row ? w.rows() : w.cols();
  const int length = axis == NormAxis::Row ? w.cols() : w.rows();
  for (int v = 0; v < vectors; ++v) {
    double sq = 0;
    for (int i = 0; i < length; ++i) {
      const Scalar x = axis == NormAxis::Row ? w(v, i) : w(i, v);
      sq += static_cast<double>(x) * x;
    }
    const double norm = std::sqrt(sq);
    if (norm <= bound) continue;
    const Scalar f = static_cast<Scalar>(bound / norm);
    for (int i = 0; i < length; ++i) {
      if (axis == NormAxis::Row)
        w(v, i) *= f;
      else
        w(i, v) *= f;
    }
  }
}

}  // namespace tabl
