#pragma once

#include <array>
#include <string>

#include "tabl/matrix.hpp"

namespace tabl {

constexpr int kNumClasses = 3;

/// Per-class training-split sample counts feeding the weighted
/// cross-entropy loss L = -sum_i (c/N_i) y_i log(y~_i).
struct ClassWeights {
  std::array<long, kNumClasses> counts{};
  double c = 1e6;
};

using Confusion = std::array<std::array<long, kNumClasses>, kNumClasses>;

struct MetricsReport {
  double accuracy = 0;
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
  Confusion confusion{};  // confusion[true][pred]

  /// Column order: accuracy, precision, recall, f1.
  std::string csv_row() const;
  std::string to_json() const;
};

/// Column softmax over a 3x1 logit vector.
Matrix softmax_head(const Matrix& logits);

struct CeResult {
  Scalar loss;
  Matrix d_logits;  // fused softmax+CE gradient, 3x1
};

/// Probabilities are floored at 1e-12 before the log.
CeResult weighted_ce(const Matrix& probs, int label, const ClassWeights& w);

MetricsReport compute_metrics(const Confusion& confusion);

}  // namespace tabl
