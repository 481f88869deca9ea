#include "tabl/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tabl {

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows <= 0 || cols <= 0) {
    throw ShapeError("Matrix dims must be positive, got " + std::to_string(rows) +
                     "x" + std::to_string(cols));
  }
  data_.assign(static_cast<size_t>(rows) * cols, Scalar{0});
}

Matrix::Matrix(int rows, int cols, std::initializer_list<Scalar> values)
    : Matrix(rows, cols) {
  if (static_cast<int>(values.size()) != rows * cols) {
    throw ShapeError("Matrix init list has " + std::to_string(values.size()) +
                     " values for shape " + shape_str());
  }
  std::copy(values.begin(), values.end(), data_.begin());
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = Scalar{1};
  return m;
}

Matrix Matrix::constant(int rows, int cols, Scalar value) {
  Matrix m(rows, cols);
  std::fill(m.data_.begin(), m.data_.end(), value);
  return m;
}

std::string Matrix::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

namespace {
void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() +
                     " vs " + b.shape_str());
  }
}
}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dims differ, " + a.shape_str() + " x " +
                     b.shape_str());
  }
  Matrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const Scalar aik = a(i, k);
      const Scalar* brow = b.data() + static_cast<size_t>(k) * b.cols();
      Scalar* orow = out.data() + static_cast<size_t>(i) * out.cols();
      for (int j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out(a.rows(), a.cols());
  for (int i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out(a.rows(), a.cols());
  for (int i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
  return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "sub");
  Matrix out(a.rows(), a.cols());
  for (int i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
  return out;
}

Matrix scale(const Matrix& a, Scalar s) {
  Matrix out(a.rows(), a.cols());
  for (int i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * s;
  return out;
}

void add_in_place(Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add_in_place");
  for (int i = 0; i < a.size(); ++i) a.data()[i] += b.data()[i];
}

Matrix softmax_rows(const Matrix& e) {
  check_finite(e, "softmax_rows input");
  Matrix out(e.rows(), e.cols());
  for (int i = 0; i < e.rows(); ++i) {
    Scalar row_max = e(i, 0);
    for (int j = 1; j < e.cols(); ++j) row_max = std::max(row_max, e(i, j));
    Scalar denom = 0;
    for (int j = 0; j < e.cols(); ++j) {
      const Scalar v = std::exp(e(i, j) - row_max);
      out(i, j) = v;
      denom += v;
    }
    for (int j = 0; j < e.cols(); ++j) out(i, j) /= denom;
  }
  return out;
}

Scalar sum(const Matrix& a) {
  Scalar s = 0;
  for (int i = 0; i < a.size(); ++i) s += a.data()[i];
  return s;
}

Scalar max_abs(const Matrix& a) {
  Scalar m = 0;
  for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i]));
  return m;
}

bool all_finite(const Matrix& a) {
  for (int i = 0; i < a.size(); ++i)
    if (!std::isfinite(a.data()[i])) return false;
  return true;
}

void check_finite(const Matrix& a, const char* name) {
  if (!all_finite(a)) {
    throw NumericError(std::string(name) + " contains a non-finite value");
  }
}

}  // namespace tabl
