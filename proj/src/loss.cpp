#include "tabl/loss.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tabl {

Matrix softmax_head(const Matrix& logits) {
  if (logits.cols() != 1 || logits.rows() != kNumClasses) {
    throw ShapeError("softmax_head expects 3x1 logits, got " +
                     logits.shape_str());
  }
  check_finite(logits, "softmax_head input");
  return transpose(softmax_rows(transpose(logits)));
}

CeResult weighted_ce(const Matrix& probs, int label, const ClassWeights& w) {
  if (label < 0 || label >= kNumClasses) {
    throw std::invalid_argument("weighted_ce: class index " +
                                std::to_string(label) + " outside [0,3)");
  }
  if (w.counts[label] <= 0) {
    throw std::invalid_argument("weighted_ce: non-positive count for class " +
                                std::to_string(label));
  }
  const double weight = w.c / static_cast<double>(w.counts[label]);
  const double p = std::max(static_cast<double>(probs(label, 0)), 1e-12);
  CeResult out;
  out.loss = static_cast<Scalar>(-weight * std::log(p));
  out.d_logits = Matrix(kNumClasses, 1);
  for (int i = 0; i < kNumClasses; ++i) {
    const double onehot = (i == label) ? 1.0 : 0.0;
    out.d_logits(i, 0) = static_cast<Scalar>(weight * (probs(i, 0) - onehot));
  }
  return out;
}

MetricsReport compute_metrics(const Confusion& confusion) {
  long total = 0, correct = 0;
  for (int i = 0; i < kNumClasses; ++i) {
    for (int j = 0; j < kNumClasses; ++j) {
      if (confusion[i][j] < 0)
        throw std::invalid_argument("compute_metrics: negative count");
      total += confusion[i][j];
    }
    correct += confusion[i][i];
  }
  if (total == 0) throw std::invalid_argument("compute_metrics: empty confusion matrix");

  MetricsReport r;
  r.confusion = confusion;
  r.accuracy = static_cast<double>(correct) / total;
  double f1_sum = 0;
  for (int k = 0; k < kNumClasses; ++k) {
    long pred_k = 0, true_k = 0;
    for (int i = 0; i < kNumClasses; ++i) {
      pred_k += confusion[i][k];
      true_k += confusion[k][i];
    }
    // Zero-division convention: a class with no predictions (or no true
    // samples) contributes 0 to the average.
    const double prec = pred_k > 0 ? static_cast<double>(confusion[k][k]) / pred_k : 0.0;
    const double rec = true_k > 0 ? static_cast<double>(confusion[k][k]) / true_k : 0.0;
    const double f1 = (prec + rec) > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    r.macro_precision += prec / kNumClasses;
    r.macro_recall += rec / kNumClasses;
    f1_sum += f1;
  }
  r.macro_f1 = f1_sum / kNumClasses;
  return r;
}

std::string MetricsReport::csv_row() const {
  std::ostringstream os;
  os.precision(10);
  os << accuracy << "," << macro_precision << "," << macro_recall << ","
     << macro_f1;
  return os.str();
}

std::string MetricsReport::to_json() const {
  std::ostringstream os;
  os.precision(10);
  os << "{\"accuracy\":" << accuracy << ",\"precision\":" << macro_precision
     << ",\"recall\":" << macro_recall << ",\"f1\":" << macro_f1
     << ",\"confusion\":[";
  for (int i = 0; i < kNumClasses; ++i) {
    os << (i ? ",[" : "[");
    for (int j = 0; j < kNumClasses; ++j) os << (j ? "," : "") << confusion[i][j];
    os << "]";
  }
  os << "]}";
  return os.str();
}

}  // namespace tabl
