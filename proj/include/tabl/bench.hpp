#pragma once

#include <cstdint>
#include <string>

#include "tabl/model.hpp"

namespace tabl {

struct CostEstimate {
  long memory_params;   // learnable scalars
  long compute_madds;   // multiply-adds per forward pass
};

/// memory = DD' + TT' + D'T'; compute = D'DT + D'TT' + 2D'T'
CostEstimate cost_bl(int D, int T, int Dp, int Tp);

/// BL cost plus the attention surcharge: +T^2+1 memory (W and lambda),
/// +D'T^2 + 3D'T compute.
CostEstimate cost_tabl(int D, int T, int Dp, int Tp);

/// Attention-based GRU encoder/memory/decoder reference:
/// memory = 3D'D + 11D'^2 + 11D',
/// compute = 11TD'^2 + 20TD' + 4T^2D' + 3TD'D + T^2.
CostEstimate cost_aseq_rnn(int D, int Dp, int T);

struct TimingReport {
  double forward_ms = 0;
  double backward_ms = 0;
  double total_ms = 0;  // forward + backward by construction
  std::string config;
};

/// Steady-state single-sample wall time (monotonic clock, 100-iteration
/// warmup) for one network configuration. Single-threaded.
TimingReport timing_bench(const NetworkSpec& spec, int iterations,
                          uint64_t seed);

}  // namespace tabl
