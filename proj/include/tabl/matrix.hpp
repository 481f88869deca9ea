#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace tabl {

#ifdef TABL_USE_FLOAT32
using Scalar = float;
#else
using Scalar = double;
#endif

/// Dense row-major real matrix. Shapes are validated at every operation
/// boundary; there is no broadcasting.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols);
  Matrix(int rows, int cols, std::initializer_list<Scalar> values);

  static Matrix identity(int n);
  static Matrix constant(int rows, int cols, Scalar value);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rows_ * cols_; }

  Scalar& operator()(int r, int c) { return data_[r * cols_ + c]; }
  Scalar operator()(int r, int c) const { return data_[r * cols_ + c]; }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string shape_str() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Scalar> data_;
};

/// Thrown on any dimension mismatch; message names both shapes.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a NaN/Inf is detected by check_finite.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, Scalar s);
void add_in_place(Matrix& a, const Matrix& b);

/// Row-wise softmax with per-row max subtraction.
Matrix softmax_rows(const Matrix& e);

Scalar sum(const Matrix& a);
Scalar max_abs(const Matrix& a);

bool all_finite(const Matrix& a);
void check_finite(const Matrix& a, const char* name);

}  // namespace tabl
