#include "tabl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace tabl {

std::vector<LayerDims> NetworkSpec::layer_dims() const {
  const int D = input_features;
  const int T = input_steps;
  std::vector<LayerDims> dims;
  switch (topology) {
    case Topology::A:
      dims.push_back({D, T, 3, 1});
      break;
    case Topology::B:
      dims.push_back({D, T, 120, 5});
      dims.push_back({120, 5, 3, 1});
      break;
    case Topology::C:
      dims.push_back({D, T, 120, 5});
      dims.push_back({120, 5, 120, 5});
      dims.push_back({120, 5, 3, 1});
      break;
  }
  return dims;
}

int NetworkSpec::hidden_layers() const {
  return static_cast<int>(layer_dims().size()) - 1;
}

Network init_network(const NetworkSpec& spec, uint64_t seed) {
  Network net;
  net.spec = spec;
  const auto dims = spec.layer_dims();
  for (size_t i = 0; i < dims.size(); ++i) {
    const bool last = i + 1 == dims.size();
    const ActivationKind act =
        last ? ActivationKind::Identity : ActivationKind::Relu;
    const uint64_t layer_seed =
        substream_seed(seed, "init-layer-" + std::to_string(i));
    Layer layer;
    if (last && spec.final_kind == FinalLayerKind::Tabl) {
      layer.params = init_tabl(dims[i], act, layer_seed);
    } else {
      layer.params = init_bl(dims[i], act, layer_seed);
    }
    net.layers.push_back(std::move(layer));
  }
  return net;
}

long Network::param_count() const {
  long n = 0;
  for (const auto& layer : layers) {
    if (const auto* bl = std::get_if<BlParams>(&layer.params)) {
      n += bl->w1.size() + bl->w2.size() + bl->b.size();
    } else {
      const auto& t = std::get<TablParams>(layer.params);
      n += t.w1.size() + t.w.size() + t.w2.size() + t.b.size() + 1;
    }
  }
  return n;
}

Matrix net_forward(const Matrix& x, const Network& net, bool training,
                   Scalar dropout_rate, Rng* rng, ForwardTrace* trace) {
  Matrix h = x;
  if (trace) trace->layers.resize(net.layers.size());
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const bool last = i + 1 == net.layers.size();
    ForwardTrace::PerLayer scratch;
    ForwardTrace::PerLayer& slot = trace ? trace->layers[i] : scratch;
    if (const auto* bl = std::get_if<BlParams>(&net.layers[i].params)) {
      BlCache cache;
      h = bl_forward(h, *bl, cache);
      slot.cache = std::move(cache);
    } else {
      TablCache cache;
      h = tabl_forward(h, std::get<TablParams>(net.layers[i].params), cache);
      slot.cache = std::move(cache);
    }
    if (!last && training && dropout_rate > Scalar{0}) {
      if (!rng) throw std::invalid_argument("net_forward: dropout needs an rng");
      slot.dropout_mask = dropout_mask(h.rows(), h.cols(), dropout_rate, *rng);
      slot.has_mask = true;
      h = hadamard(h, slot.dropout_mask);
    }
  }
  const Matrix probs = softmax_head(h);
  if (trace) {
    trace->logits = h;
    trace->probs = probs;
  }
  return probs;
}

NetGrads net_backward(const Matrix& d_logits, const Network& net,
                      const ForwardTrace& trace) {
  NetGrads grads;
  grads.layers.resize(net.layers.size());
  Matrix d = d_logits;
  for (int i = static_cast<int>(net.layers.size()) - 1; i >= 0; --i) {
    if (const auto* bl = std::get_if<BlParams>(&net.layers[i].params)) {
      BlGrads g = bl_backward(d, std::get<BlCache>(trace.layers[i].cache), *bl);
      d = g.d_x;
      grads.layers[i] = std::move(g);
    } else {
      const auto& p = std::get<TablParams>(net.layers[i].params);
      TablGrads g =
          tabl_backward(d, std::get<TablCache>(trace.layers[i].cache), p);
      d = g.d_x;
      grads.layers[i] = std::move(g);
    }
    if (i > 0 && trace.layers[i - 1].has_mask) {
      d = hadamard(d, trace.layers[i - 1].dropout_mask);
    }
  }
  return grads;
}

void NetGrads::accumulate(const NetGrads& other) {
  if (layers.empty()) {
    layers = other.layers;
    return;
  }
  for (size_t i = 0; i < layers.size(); ++i) {
    if (auto* bg = std::get_if<BlGrads>(&layers[i])) {
      const auto& og = std::get<BlGrads>(other.layers[i]);
      add_in_place(bg->d_w1, og.d_w1);
      add_in_place(bg->d_w2, og.d_w2);
      add_in_place(bg->d_b, og.d_b);
    } else {
      auto& tg = std::get<TablGrads>(layers[i]);
      const auto& og = std::get<TablGrads>(other.layers[i]);
      add_in_place(tg.d_w1, og.d_w1);
      add_in_place(tg.d_w, og.d_w);
      add_in_place(tg.d_w2, og.d_w2);
      add_in_place(tg.d_b, og.d_b);
      tg.d_lambda += og.d_lambda;
    }
  }
}

void NetGrads::scale_all(Scalar s) {
  for (auto& lg : layers) {
    if (auto* bg = std::get_if<BlGrads>(&lg)) {
      bg->d_w1 = scale(bg->d_w1, s);
      bg->d_w2 = scale(bg->d_w2, s);
      bg->d_b = scale(bg->d_b, s);
    } else {
      auto& tg = std::get<TablGrads>(lg);
      tg.d_w1 = scale(tg.d_w1, s);
      tg.d_w = scale(tg.d_w, s);
      tg.d_w2 = scale(tg.d_w2, s);
      tg.d_b = scale(tg.d_b, s);
      tg.d_lambda *= s;
    }
  }
}

namespace {

// Slot ids: 8 per layer, one per parameter tensor.
enum SlotOffset { kW1 = 0, kW2 = 1, kB = 2, kW = 3, kLambda = 4 };

void optimizer_step(Network& net, const NetGrads& grads, Optimizer& opt,
                    Scalar max_norm) {
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const int base = static_cast<int>(i) * 8;
    if (auto* bl = std::get_if<BlParams>(&net.layers[i].params)) {
      const auto& g = std::get<BlGrads>(grads.layers[i]);
      opt.step(base + kW1, bl->w1, g.d_w1);
      opt.step(base + kW2, bl->w2, g.d_w2);
      opt.step(base + kB, bl->b, g.d_b);
      max_norm_project(bl->w1, max_norm, NormAxis::Row);
      max_norm_project(bl->w2, max_norm, NormAxis::Col);
    } else {
      auto& p = std::get<TablParams>(net.layers[i].params);
      const auto& g = std::get<TablGrads>(grads.layers[i]);
      opt.step(base + kW1, p.w1, g.d_w1);
      opt.step(base + kW, p.w, g.d_w);
      opt.step(base + kW2, p.w2, g.d_w2);
      opt.step(base + kB, p.b, g.d_b);
      opt.step_scalar(base + kLambda, p.lambda, g.d_lambda);
      apply_constraints(p);
      // W and lambda carry their own constraints; B is a bias. Only the
      // bilinear factors get the max-norm treatment.
      max_norm_project(p.w1, max_norm, NormAxis::Row);
      max_norm_project(p.w2, max_norm, NormAxis::Col);
    }
  }
}

}  // namespace

TrainResult train(const std::vector<SampleWindow>& train_set,
                  const NetworkSpec& spec, const TrainConfig& cfg) {
  if (train_set.empty()) throw std::invalid_argument("train: empty split");
  ClassWeights weights;
  weights.counts = class_counts(train_set);
  weights.c = cfg.loss_scale_c;

  TrainResult res;
  res.net = init_network(spec, cfg.seed);
  Optimizer opt(cfg.optimizer, 0.01);
  LrSchedule sched;
  sched.patience = cfg.patience;
  opt.set_lr(sched.lr());

  Rng shuffle_rng = make_rng(cfg.seed, "shuffle");
  Rng dropout_rng = make_rng(cfg.seed, "dropout");

  std::vector<int> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(cfg.batch_size)) {
      const size_t end =
          std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      NetGrads batch_grads;
      for (size_t k = start; k < end; ++k) {
        const SampleWindow& sample = train_set[order[k]];
        ForwardTrace trace;
        net_forward(sample.x, res.net, true, cfg.dropout_rate, &dropout_rng,
                    &trace);
        const CeResult ce = weighted_ce(trace.probs, sample.label, weights);
        if (!std::isfinite(static_cast<double>(ce.loss))) {
          throw NumericError("non-finite loss at epoch " +
                             std::to_string(epoch) + ", batch starting at " +
                             std::to_string(start));
        }
        epoch_loss += ce.loss;
        batch_grads.accumulate(net_backward(ce.d_logits, res.net, trace));
      }
      batch_grads.scale_all(Scalar{1} / static_cast<Scalar>(end - start));
      optimizer_step(res.net, batch_grads, opt, cfg.max_norm);
    }
    epoch_loss /= static_cast<double>(train_set.size());

    res.loss_curve.push_back(epoch_loss);
    res.lr_curve.push_back(opt.lr());
    std::vector<double> lambdas;
    for (const auto& layer : res.net.layers) {
      if (const auto* t = std::get_if<TablParams>(&layer.params))
        lambdas.push_back(t->lambda);
    }
    res.lambda_trace.push_back(std::move(lambdas));
    if (res.net.final_is_tabl()) {
      res.attention_trace.push_back(attention_stats(res.net, train_set));
    }
    opt.set_lr(sched.update(epoch_loss));
  }
  return res;
}

MetricsReport evaluate(const Network& net,
                       const std::vector<SampleWindow>& split, int threads) {
  if (split.empty()) throw std::invalid_argument("evaluate: empty split");
  threads = std::max(1, threads);

  auto eval_range = [&](size_t lo, size_t hi, Confusion& conf) {
    for (size_t i = lo; i < hi; ++i) {
      const Matrix probs =
          net_forward(split[i].x, net, false, 0, nullptr, nullptr);
      int pred = 0;
      for (int c = 1; c < kNumClasses; ++c)
        if (probs(c, 0) > probs(pred, 0)) pred = c;
      ++conf[split[i].label][pred];
    }
  };

  std::vector<Confusion> partials(threads);
  for (auto& c : partials) c = Confusion{};
  if (threads == 1) {
    eval_range(0, split.size(), partials[0]);
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (split.size() + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const size_t lo = std::min(split.size(), t * chunk);
      const size_t hi = std::min(split.size(), lo + chunk);
      pool.emplace_back(eval_range, lo, hi, std::ref(partials[t]));
    }
    for (auto& th : pool) th.join();
  }
  // Merge in fixed thread order so runs are reproducible.
  Confusion conf{};
  for (const auto& p : partials)
    for (int i = 0; i < kNumClasses; ++i)
      for (int j = 0; j < kNumClasses; ++j) conf[i][j] += p[i][j];
  return compute_metrics(conf);
}

std::array<std::vector<double>, 3> attention_stats(
    const Network& net, const std::vector<SampleWindow>& split) {
  if (!net.final_is_tabl()) {
    throw std::invalid_argument(
        "attention_stats requires a TABL final layer; this network ends in BL");
  }
  const auto& final_params = std::get<TablParams>(net.layers.back().params);
  const int T = final_params.time_steps();
  std::array<std::vector<double>, 3> acc;
  std::array<long, 3> counts{};
  for (auto& a : acc) a.assign(T, 0.0);

  for (const auto& sample : split) {
    ForwardTrace trace;
    net_forward(sample.x, net, false, 0, nullptr, &trace);
    const auto& cache = std::get<TablCache>(trace.layers.back().cache);
    // Mean over the D' attention rows, per temporal column.
    for (int t = 0; t < T; ++t) {
      double col = 0;
      for (int r = 0; r < cache.a.rows(); ++r) col += cache.a(r, t);
      acc[sample.label][t] += col / cache.a.rows();
    }
    ++counts[sample.label];
  }
  for (int c = 0; c < 3; ++c) {
    if (counts[c] == 0) continue;
    for (int t = 0; t < T; ++t) acc[c][t] /= counts[c];
  }
  return acc;
}

}  // namespace tabl
