#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "tabl/data.hpp"
#include "tabl/layers.hpp"
#include "tabl/loss.hpp"
#include "tabl/optim.hpp"

namespace tabl {

enum class Topology { A, B, C };
enum class FinalLayerKind { Bl, Tabl };

/// Network geometry for the three baseline topologies:
///   A: 40x10 -> 3x1
///   B: 40x10 -> 120x5 -> 3x1
///   C: 40x10 -> 120x5 -> 120x5 -> 3x1
/// Hidden layers are ReLU BL; the final layer (BL or TABL) is identity and
/// feeds the external softmax head.
struct NetworkSpec {
  Topology topology = Topology::A;
  FinalLayerKind final_kind = FinalLayerKind::Tabl;
  int input_features = kLobDim;
  int input_steps = kHistorySteps;

  std::vector<LayerDims> layer_dims() const;
  int hidden_layers() const;
};

struct Layer {
  std::variant<BlParams, TablParams> params;
  bool is_tabl() const { return std::holds_alternative<TablParams>(params); }
};

struct Network {
  NetworkSpec spec;
  std::vector<Layer> layers;

  long param_count() const;
  bool final_is_tabl() const { return layers.back().is_tabl(); }
};

Network init_network(const NetworkSpec& spec, uint64_t seed);

struct ForwardTrace {
  struct PerLayer {
    std::variant<BlCache, TablCache> cache;
    Matrix dropout_mask;  // empty when no dropout applied after this layer
    bool has_mask = false;
  };
  std::vector<PerLayer> layers;
  Matrix logits;  // 3x1
  Matrix probs;   // 3x1
};

/// Full forward pass to class probabilities. With training=true, inverted
/// dropout (using rng) is applied after each hidden layer output.
Matrix net_forward(const Matrix& x, const Network& net, bool training,
                   Scalar dropout_rate, Rng* rng, ForwardTrace* trace);

struct NetGrads {
  std::vector<std::variant<BlGrads, TablGrads>> layers;

  void accumulate(const NetGrads& other);
  void scale_all(Scalar s);
};

/// Backpropagates d_logits through the trace; dropout masks recorded in the
/// trace gate the inter-layer gradients.
NetGrads net_backward(const Matrix& d_logits, const Network& net,
                      const ForwardTrace& trace);

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::Adam;
  int max_epochs = 200;
  int batch_size = 256;
  Scalar dropout_rate = 0.1;
  Scalar max_norm = 5.0;  // validated from {3, 5, 7}
  double loss_scale_c = 1e6;
  int patience = 5;
  uint64_t seed = 1;
  int threads = 1;
};

struct TrainResult {
  Network net;
  std::vector<double> loss_curve;             // per-epoch mean train loss
  std::vector<double> lr_curve;               // lr used each epoch
  std::vector<std::vector<double>> lambda_trace;  // per epoch, per TABL layer
  // Per epoch, per true class, per temporal column mean attention
  // (final-layer TABL networks only).
  std::vector<std::array<std::vector<double>, 3>> attention_trace;
};

/// Full training protocol: shuffled mini-batches, per-step parameter
/// constraints and max-norm projection, plateau lr schedule on the epoch
/// train loss. Returns the final model and per-epoch logs.
TrainResult train(const std::vector<SampleWindow>& train_set,
                  const NetworkSpec& spec, const TrainConfig& cfg);

/// Inference-mode evaluation over a split; throws on an empty split.
MetricsReport evaluate(const Network& net,
                       const std::vector<SampleWindow>& split,
                       int threads = 1);

/// Per-true-class mean attention per temporal column (oldest -> newest),
/// averaged over samples and the D' attention rows. Requires a TABL final
/// layer.
std::array<std::vector<double>, 3> attention_stats(
    const Network& net, const std::vector<SampleWindow>& split);

}  // namespace tabl
