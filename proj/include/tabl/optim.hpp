#pragma once

#include <limits>
#include <unordered_map>
#include <vector>

#include "tabl/matrix.hpp"
#include "tabl/rng.hpp"

namespace tabl {

enum class OptimizerKind { SgdNesterov, Adam };

/// Per-parameter-tensor optimizer state, keyed by a caller-chosen slot id.
/// Buffers are created lazily on the first step for a slot.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, Scalar lr) : kind_(kind), lr_(lr) {}

  OptimizerKind kind() const { return kind_; }
  Scalar lr() const { return lr_; }
  void set_lr(Scalar lr) { lr_ = lr; }

  void step(int slot, Matrix& param, const Matrix& grad);
  void step_scalar(int slot, Scalar& param, Scalar grad);

  // Hyperparameters fixed to the standard values.
  static constexpr double kMomentum = 0.9;
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

 private:
  struct Slot {
    Matrix velocity;  // SGD momentum buffer
    Matrix m1, m2;    // Adam moment buffers
    long t = 0;
  };
  Slot& slot_for(int id, int rows, int cols);

  OptimizerKind kind_;
  Scalar lr_;
  std::unordered_map<int, Slot> slots_;
};

/// Plateau schedule over the fixed ladder {0.01, 0.005, 0.001, 0.0005,
/// 0.0001}: steps down after `patience` epochs without train-loss
/// improvement, saturating at the last entry.
struct LrSchedule {
  std::vector<Scalar> ladder{0.01, 0.005, 0.001, 0.0005, 0.0001};
  int patience = 5;
  double tolerance = 1e-9;

  int cursor = 0;
  int epochs_without_improvement = 0;
  double best_loss = std::numeric_limits<double>::infinity();

  Scalar lr() const { return ladder[cursor]; }
  /// Feeds one epoch's training loss; returns the lr for the next epoch.
  Scalar update(double epoch_train_loss);
};

/// Inverted dropout: each entry zeroed with probability `rate`, survivors
/// scaled by 1/(1-rate). Identity when training is false or rate is 0.
Matrix dropout(const Matrix& x, Scalar rate, Rng& rng, bool training);

/// The mask used by dropout (entries 0 or 1/(1-rate)); the training loop
/// applies the same mask on the backward path.
Matrix dropout_mask(int rows, int cols, Scalar rate, Rng& rng);

enum class NormAxis { Row, Col };

/// Rescales each row (or column) with l2 norm above `bound` down to exactly
/// `bound`; vectors within the bound are untouched.
void max_norm_project(Matrix& w, Scalar bound, NormAxis axis);

}  // namespace tabl
