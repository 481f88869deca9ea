#include "tabl/layers.hpp"

#include <algorithm>
#include <cmath>

#include "tabl/rng.hpp"

namespace tabl {

Matrix activate(const Matrix& z, ActivationKind kind) {
  if (kind == ActivationKind::Identity) return z;
  Matrix out(z.rows(), z.cols());
  for (int i = 0; i < z.size(); ++i)
    out.data()[i] = z.data()[i] > Scalar{0} ? z.data()[i] : Scalar{0};
  return out;
}

Matrix activate_grad(const Matrix& z, ActivationKind kind) {
  if (kind == ActivationKind::Identity)
    return Matrix::constant(z.rows(), z.cols(), Scalar{1});
  Matrix out(z.rows(), z.cols());
  for (int i = 0; i < z.size(); ++i)
    out.data()[i] = z.data()[i] > Scalar{0} ? Scalar{1} : Scalar{0};
  return out;
}

void validate(const BlParams& p) {
  if (p.w1.rows() != p.b.rows() || p.w2.cols() != p.b.cols()) {
    throw ShapeError("BlParams inconsistent: w1 " + p.w1.shape_str() + ", w2 " +
                     p.w2.shape_str() + ", b " + p.b.shape_str());
  }
}

void validate(const TablParams& p) {
  if (p.w.rows() != p.w.cols() || p.w.rows() != p.w2.rows()) {
    throw ShapeError("TablParams: w must be TxT matching w2, got w " +
                     p.w.shape_str() + ", w2 " + p.w2.shape_str());
  }
  if (p.w1.rows() != p.b.rows() || p.w2.cols() != p.b.cols()) {
    throw ShapeError("TablParams inconsistent: w1 " + p.w1.shape_str() +
                     ", w2 " + p.w2.shape_str() + ", b " + p.b.shape_str());
  }
  const Scalar inv_t = Scalar{1} / static_cast<Scalar>(p.w.rows());
  for (int i = 0; i < p.w.rows(); ++i) {
    if (p.w(i, i) != inv_t) {
      throw NumericError("TablParams: w diagonal entry " + std::to_string(i) +
                         " is not 1/T");
    }
  }
  if (p.lambda < Scalar{0} || p.lambda > Scalar{1}) {
    throw NumericError("TablParams: lambda outside [0,1]");
  }
}

Matrix bl_forward(const Matrix& x, const BlParams& p, BlCache& cache) {
  if (x.rows() != p.w1.cols() || x.cols() != p.w2.rows()) {
    throw ShapeError("bl_forward: input " + x.shape_str() + " vs w1 " +
                     p.w1.shape_str() + ", w2 " + p.w2.shape_str());
  }
  cache.x = x;
  cache.xbar = matmul(p.w1, x);
  cache.ybar = add(matmul(cache.xbar, p.w2), p.b);
  return activate(cache.ybar, p.activation);
}

BlGrads bl_backward(const Matrix& d_y, const BlCache& cache, const BlParams& p) {
  if (!d_y.same_shape(p.b)) {
    throw ShapeError("bl_backward: d_y " + d_y.shape_str() + " vs output " +
                     p.b.shape_str());
  }
  // G = d_y . phi'(ybar)
  const Matrix g = hadamard(d_y, activate_grad(cache.ybar, p.activation));
  BlGrads out;
  out.d_b = g;
  out.d_w2 = matmul(transpose(cache.xbar), g);
  const Matrix d_xbar = matmul(g, transpose(p.w2));
  out.d_w1 = matmul(d_xbar, transpose(cache.x));
  out.d_x = matmul(transpose(p.w1), d_xbar);
  return out;
}

Matrix tabl_forward(const Matrix& x, const TablParams& p, TablCache& cache) {
  validate(p);
  if (x.rows() != p.w1.cols() || x.cols() != p.w.rows()) {
    throw ShapeError("tabl_forward: input " + x.shape_str() + " vs w1 " +
                     p.w1.shape_str() + ", w " + p.w.shape_str());
  }
  cache.x = x;
  cache.xbar = matmul(p.w1, x);
  cache.e = matmul(cache.xbar, p.w);
  cache.a = softmax_rows(cache.e);
  // xtilde = lambda (xbar . a) + (1 - lambda) xbar
  const Matrix mixed = hadamard(cache.xbar, cache.a);
  cache.xtilde = add(scale(mixed, p.lambda), scale(cache.xbar, Scalar{1} - p.lambda));
  cache.ybar = add(matmul(cache.xtilde, p.w2), p.b);
  return activate(cache.ybar, p.activation);
}

TablGrads tabl_backward(const Matrix& d_y, const TablCache& cache,
                        const TablParams& p) {
  if (!d_y.same_shape(p.b)) {
    throw ShapeError("tabl_backward: d_y " + d_y.shape_str() + " vs output " +
                     p.b.shape_str());
  }
  const Matrix g = hadamard(d_y, activate_grad(cache.ybar, p.activation));

  TablGrads out;
  out.d_b = g;
  out.d_w2 = matmul(transpose(cache.xtilde), g);

  const Matrix d_xtilde = matmul(g, transpose(p.w2));

  // d xtilde / d lambda = xbar . a - xbar
  const Matrix mixed = hadamard(cache.xbar, cache.a);
  out.d_lambda = sum(hadamard(d_xtilde, sub(mixed, cache.xbar)));

  // Through the soft mix into the attention mask and the raw xbar path.
  const Matrix d_a = scale(hadamard(d_xtilde, cache.xbar), p.lambda);
  Matrix d_xbar(cache.xbar.rows(), cache.xbar.cols());
  for (int i = 0; i < d_xbar.size(); ++i) {
    d_xbar.data()[i] = d_xtilde.data()[i] *
                       (p.lambda * cache.a.data()[i] + (Scalar{1} - p.lambda));
  }

  // Row-wise softmax Jacobian: d_e_ij = a_ij (d_a_ij - sum_k d_a_ik a_ik).
  Matrix d_e(cache.e.rows(), cache.e.cols());
  for (int i = 0; i < d_e.rows(); ++i) {
    Scalar dot = 0;
    for (int k = 0; k < d_e.cols(); ++k) dot += d_a(i, k) * cache.a(i, k);
    for (int j = 0; j < d_e.cols(); ++j)
      d_e(i, j) = cache.a(i, j) * (d_a(i, j) - dot);
  }

  out.d_w = matmul(transpose(cache.xbar), d_e);
  // Diagonal of W is fixed; its gradient is defined as zero.
  for (int i = 0; i < out.d_w.rows(); ++i) out.d_w(i, i) = 0;

  add_in_place(d_xbar, matmul(d_e, transpose(p.w)));
  out.d_w1 = matmul(d_xbar, transpose(cache.x));
  out.d_x = matmul(transpose(p.w1), d_xbar);
  return out;
}

namespace {
Matrix he_normal(int rows, int cols, int fan_in, Rng& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
  Matrix m(rows, cols);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(dist(rng));
  return m;
}
}  // namespace

BlParams init_bl(const LayerDims& dims, ActivationKind act, uint64_t seed) {
  Rng rng(seed);
  BlParams p;
  p.w1 = he_normal(dims.out_features, dims.in_features, dims.in_features, rng);
  p.w2 = he_normal(dims.in_steps, dims.out_steps, dims.in_steps, rng);
  p.b = Matrix(dims.out_features, dims.out_steps);
  p.activation = act;
  return p;
}

TablParams init_tabl(const LayerDims& dims, ActivationKind act, uint64_t seed) {
  Rng rng(seed);
  TablParams p;
  p.w1 = he_normal(dims.out_features, dims.in_features, dims.in_features, rng);
  p.w = Matrix::constant(dims.in_steps, dims.in_steps,
                         Scalar{1} / static_cast<Scalar>(dims.in_steps));
  p.w2 = he_normal(dims.in_steps, dims.out_steps, dims.in_steps, rng);
  p.b = Matrix(dims.out_features, dims.out_steps);
  p.lambda = Scalar{0.5};
  p.activation = act;
  return p;
}

void apply_constraints(TablParams& p) {
  const Scalar inv_t = Scalar{1} / static_cast<Scalar>(p.w.rows());
  for (int i = 0; i < p.w.rows(); ++i) p.w(i, i) = inv_t;
  p.lambda = std::clamp(p.lambda, Scalar{0}, Scalar{1});
}

}  // namespace tabl
