#include "tabl/bench.hpp"

#include <chrono>
#include <stdexcept>

#include "tabl/rng.hpp"

namespace tabl {

namespace {
void require_positive(int v, const char* name) {
  if (v <= 0) throw std::invalid_argument(std::string(name) + " must be positive");
}
}  // namespace

CostEstimate cost_bl(int D, int T, int Dp, int Tp) {
  require_positive(D, "D");
  require_positive(T, "T");
  require_positive(Dp, "D'");
  require_positive(Tp, "T'");
  CostEstimate c;
  c.memory_params = static_cast<long>(D) * Dp + static_cast<long>(T) * Tp +
                    static_cast<long>(Dp) * Tp;
  c.compute_madds = static_cast<long>(Dp) * D * T +
                    static_cast<long>(Dp) * T * Tp +
                    2L * Dp * Tp;
  return c;
}

CostEstimate cost_tabl(int D, int T, int Dp, int Tp) {
  CostEstimate c = cost_bl(D, T, Dp, Tp);
  c.memory_params += static_cast<long>(T) * T + 1;  // W plus lambda
  c.compute_madds += static_cast<long>(Dp) * T * T + 3L * Dp * T;
  return c;
}

CostEstimate cost_aseq_rnn(int D, int Dp, int T) {
  require_positive(D, "D");
  require_positive(Dp, "D'");
  require_positive(T, "T");
  const long d = D, dp = Dp, t = T;
  CostEstimate c;
  c.memory_params = 3 * dp * d + 11 * dp * dp + 11 * dp;
  c.compute_madds = 11 * t * dp * dp + 20 * t * dp + 4 * t * t * dp +
                    3 * t * dp * d + t * t;
  return c;
}

TimingReport timing_bench(const NetworkSpec& spec, int iterations,
                          uint64_t seed) {
  if (iterations < 1000) {
    throw std::invalid_argument("timing_bench: need at least 1000 iterations");
  }
  Network net = init_network(spec, seed);
  Rng rng = make_rng(seed, "bench-input");
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix x(spec.input_features, spec.input_steps);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = static_cast<Scalar>(dist(rng));

  using clock = std::chrono::steady_clock;
  volatile Scalar sink = 0;  // keep the passes from being optimized out

  auto run_forward = [&](int n) {
    const auto t0 = clock::now();
    for (int i = 0; i < n; ++i) {
      const Matrix probs = net_forward(x, net, false, 0, nullptr, nullptr);
      sink = sink + probs(0, 0);
    }
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };
  auto run_both = [&](int n) {
    Matrix d_logits(3, 1, {1, -1, 0});
    const auto t0 = clock::now();
    for (int i = 0; i < n; ++i) {
      ForwardTrace trace;
      net_forward(x, net, false, 0, nullptr, &trace);
      const NetGrads g = net_backward(d_logits, net, trace);
      if (const auto* bg = std::get_if<BlGrads>(&g.layers.back()))
        sink = sink + bg->d_b(0, 0);
      else
        sink = sink + std::get<TablGrads>(g.layers.back()).d_b(0, 0);
    }
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };

  run_forward(100);  // warmup
  run_both(100);
  const double fwd_ms = run_forward(iterations) / iterations;
  const double both_ms = run_both(iterations) / iterations;

  TimingReport r;
  r.forward_ms = fwd_ms;
  r.backward_ms = std::max(0.0, both_ms - fwd_ms);
  r.total_ms = r.forward_ms + r.backward_ms;
  r.config = std::string("topology ") +
             (spec.topology == Topology::A   ? "A"
              : spec.topology == Topology::B ? "B"
                                             : "C") +
             (spec.final_kind == FinalLayerKind::Tabl ? "(TABL)" : "(BL)");
  return r;
}

}  // namespace tabl
