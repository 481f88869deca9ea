#pragma once

#include <cstdint>

#include "tabl/matrix.hpp"

namespace tabl {

enum class ActivationKind { Identity, Relu };

Matrix activate(const Matrix& z, ActivationKind kind);
/// Derivative of the activation evaluated at the pre-activation z.
/// ReLU derivative at exactly 0 is 0.
Matrix activate_grad(const Matrix& z, ActivationKind kind);

/// Layer geometry: maps a D x T input to a D' x T' output.
struct LayerDims {
  int in_features;   // D
  int in_steps;      // T
  int out_features;  // D'
  int out_steps;     // T'
};

// ---------------------------------------------------------------------------
// Bilinear layer: Y = phi(W1 X W2 + B)
// ---------------------------------------------------------------------------

struct BlParams {
  Matrix w1;  // D' x D
  Matrix w2;  // T  x T'
  Matrix b;   // D' x T'
  ActivationKind activation = ActivationKind::Identity;
};

struct BlCache {
  Matrix x;     // D  x T
  Matrix xbar;  // W1 X
  Matrix ybar;  // pre-activation
};

struct BlGrads {
  Matrix d_w1, d_w2, d_b;
  Matrix d_x;  // for chaining to the upstream layer
};

Matrix bl_forward(const Matrix& x, const BlParams& p, BlCache& cache);
BlGrads bl_backward(const Matrix& d_y, const BlCache& cache, const BlParams& p);

// ---------------------------------------------------------------------------
// Temporal-attention bilinear layer:
//   Xbar = W1 X;  E = Xbar W;  A = row_softmax(E)
//   Xtilde = lambda (Xbar . A) + (1 - lambda) Xbar
//   Y = phi(Xtilde W2 + B)
// W has its diagonal fixed to 1/T and lambda is constrained to [0,1].
// ---------------------------------------------------------------------------

struct TablParams {
  Matrix w1;  // D' x D
  Matrix w;   // T x T, diag fixed to 1/T
  Matrix w2;  // T x T'
  Matrix b;   // D' x T'
  Scalar lambda = 0.5;
  ActivationKind activation = ActivationKind::Identity;

  int time_steps() const { return w.rows(); }
};

struct TablCache {
  Matrix x;       // D x T
  Matrix xbar;    // W1 X
  Matrix e;       // Xbar W
  Matrix a;       // attention mask, rows sum to 1
  Matrix xtilde;  // soft mix
  Matrix ybar;    // pre-activation
};

struct TablGrads {
  Matrix d_w1, d_w, d_w2, d_b;
  Scalar d_lambda = 0;
  Matrix d_x;
};

Matrix tabl_forward(const Matrix& x, const TablParams& p, TablCache& cache);
TablGrads tabl_backward(const Matrix& d_y, const TablCache& cache,
                        const TablParams& p);

/// He-normal init for W1/W2 (variance 2/fan_in), zero bias.
BlParams init_bl(const LayerDims& dims, ActivationKind act, uint64_t seed);
/// Same, plus W filled with the constant 1/T and lambda = 0.5 so the layer
/// starts with uniform attention.
TablParams init_tabl(const LayerDims& dims, ActivationKind act, uint64_t seed);

/// Re-asserts the structural constraints after an optimizer step:
/// diag(W) = 1/T exactly, lambda clipped into [0,1].
void apply_constraints(TablParams& p);

/// Validates mutual shape consistency; throws ShapeError on violation.
void validate(const BlParams& p);
void validate(const TablParams& p);

}  // namespace tabl
