// Command-line front end: train / eval / gradcheck / bench / stats / synth.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tabl/bench.hpp"
#include "tabl/checkpoint.hpp"
#include "tabl/model.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace tabl;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct RunConfig {
  std::string command;
  std::string data_path;
  std::string out_dir = "runs";
  std::string checkpoint_path;
  int setup = 2;
  int fold = 1;
  int horizon = 0;  // required for data-driven commands; no default
  std::string topology = "A";
  std::string layer = "TABL";
  std::string optimizer = "adam";
  double max_norm = 5;
  int epochs = 200;
  int batch = 256;
  double dropout = 0.1;
  double loss_scale = 1e6;
  uint64_t seed = 1;
  int threads = 1;
  int stride = 1;
  bool use_synth = false;
  bool separable = false;
  int synth_days = 2;
  int synth_vectors = 2000;
  double synth_threshold = 2e-4;
};

// Key=value config file, applied before flag parsing so that explicit
// command-line flags always win. Keys mirror the long flag names.
void apply_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected key=value");
    auto trim = [](std::string s) {
      const size_t a = s.find_first_not_of(" \t");
      const size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "data") c.data_path = value;
      else if (key == "out") c.out_dir = value;
      else if (key == "checkpoint") c.checkpoint_path = value;
      else if (key == "setup") c.setup = std::stoi(value);
      else if (key == "fold") c.fold = std::stoi(value);
      else if (key == "horizon") c.horizon = std::stoi(value);
      else if (key == "stride") c.stride = std::stoi(value);
      else if (key == "topology") c.topology = value;
      else if (key == "layer") c.layer = value;
      else if (key == "optimizer") c.optimizer = value;
      else if (key == "max-norm") c.max_norm = std::stod(value);
      else if (key == "epochs") c.epochs = std::stoi(value);
      else if (key == "batch") c.batch = std::stoi(value);
      else if (key == "dropout") c.dropout = std::stod(value);
      else if (key == "loss-scale") c.loss_scale = std::stod(value);
      else if (key == "seed") c.seed = std::stoull(value);
      else if (key == "threads") c.threads = std::stoi(value);
      else if (key == "synth") c.use_synth = value == "true" || value == "1";
      else if (key == "separable") c.separable = value == "true" || value == "1";
      else if (key == "synth-days") c.synth_days = std::stoi(value);
      else if (key == "synth-vectors") c.synth_vectors = std::stoi(value);
      else if (key == "threshold") c.synth_threshold = std::stod(value);
      else
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": bad value for '" + key + "'");
    }
  }
}

Topology parse_topology(const std::string& s) {
  if (s == "A") return Topology::A;
  if (s == "B") return Topology::B;
  if (s == "C") return Topology::C;
  throw CLI::ValidationError("--topology", "must be A, B or C");
}

FinalLayerKind parse_layer(const std::string& s) {
  if (s == "BL") return FinalLayerKind::Bl;
  if (s == "TABL") return FinalLayerKind::Tabl;
  throw CLI::ValidationError("--layer", "must be BL or TABL");
}

json config_json(const RunConfig& c) {
  return json{{"command", c.command},
              {"data", c.data_path},
              {"setup", c.setup},
              {"fold", c.fold},
              {"horizon", c.horizon},
              {"topology", c.topology},
              {"layer", c.layer},
              {"optimizer", c.optimizer},
              {"max_norm", c.max_norm},
              {"epochs", c.epochs},
              {"batch", c.batch},
              {"dropout", c.dropout},
              {"loss_scale", c.loss_scale},
              {"seed", c.seed},
              {"threads", c.threads},
              {"stride", c.stride},
              {"synth", c.use_synth},
              {"separable", c.separable}};
}

Dataset load_data(const RunConfig& c) {
  if (c.use_synth) {
    SynthConfig sc;
    sc.seed = c.seed;
    sc.n_days = c.synth_days;
    sc.vectors_per_day = c.synth_vectors;
    sc.separable = c.separable;
    sc.threshold = c.synth_threshold;
    return synth_lob(sc);
  }
  if (c.data_path.empty())
    throw ParseError("no input: pass --data PATH or --synth");
  return load_fi2010(c.data_path);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << content;
}

std::string attention_csv(const std::array<std::vector<double>, 3>& stats) {
  std::string csv = "class";
  const int T = static_cast<int>(stats[0].size());
  for (int t = 0; t < T; ++t) {
    csv += ",t";
    if (t < T - 1) csv += "-" + std::to_string(T - 1 - t);
  }
  csv += "\n";
  const char* names[3] = {"increase", "stationary", "decrease"};
  char buf[32];
  for (int cls = 0; cls < 3; ++cls) {
    csv += names[cls];
    for (double v : stats[cls]) {
      std::snprintf(buf, sizeof(buf), ",%.9f", v);
      csv += buf;
    }
    csv += "\n";
  }
  return csv;
}

std::string lambda_csv(const std::vector<std::vector<double>>& trace) {
  std::string csv = "epoch";
  if (!trace.empty())
    for (size_t l = 0; l < trace[0].size(); ++l)
      csv += ",lambda" + std::to_string(l);
  csv += "\n";
  char buf[32];
  for (size_t e = 0; e < trace.size(); ++e) {
    csv += std::to_string(e + 1);
    for (double l : trace[e]) {
      std::snprintf(buf, sizeof(buf), ",%.9f", l);
      csv += buf;
    }
    csv += "\n";
  }
  return csv;
}

int cmd_train(const RunConfig& c) {
  Dataset ds = load_data(c);
  Split split = make_split(ds, {c.setup, c.fold});
  auto train_set = windows_for_days(ds, split.train_days, c.horizon, c.stride);
  auto test_set = windows_for_days(ds, split.test_days, c.horizon, c.stride);
  std::cout << "train windows: " << train_set.size()
            << ", test windows: " << test_set.size() << "\n";

  NetworkSpec spec{parse_topology(c.topology), parse_layer(c.layer)};
  TrainConfig tc;
  tc.optimizer =
      c.optimizer == "sgd" ? OptimizerKind::SgdNesterov : OptimizerKind::Adam;
  tc.max_epochs = c.epochs;
  tc.batch_size = c.batch;
  tc.dropout_rate = Scalar(c.dropout);
  tc.max_norm = Scalar(c.max_norm);
  tc.loss_scale_c = c.loss_scale;
  tc.seed = c.seed;
  tc.threads = c.threads;

  TrainResult res = train(train_set, spec, tc);
  const MetricsReport train_metrics = evaluate(res.net, train_set, c.threads);
  const MetricsReport test_metrics =
      test_set.empty() ? train_metrics : evaluate(res.net, test_set, c.threads);

  fs::create_directories(c.out_dir);
  const fs::path out(c.out_dir);
  save_checkpoint(res.net, (out / "checkpoint.ckpt").string());

  json manifest;
  manifest["config"] = config_json(c);
  manifest["loss_curve"] = res.loss_curve;
  manifest["lr_curve"] = res.lr_curve;
  manifest["lambda_trace"] = res.lambda_trace;
  manifest["train_metrics"] = json::parse(train_metrics.to_json());
  manifest["test_metrics"] = json::parse(test_metrics.to_json());
  if (!res.attention_trace.empty()) {
    json att = json::array();
    for (const auto& epoch : res.attention_trace)
      att.push_back(json{epoch[0], epoch[1], epoch[2]});
    manifest["attention_trace"] = std::move(att);
  }
  write_file(out / "manifest.json", manifest.dump(2) + "\n");

  write_file(out / "metrics.csv",
             "split,accuracy,precision,recall,f1\ntrain," +
                 train_metrics.csv_row() + "\ntest," + test_metrics.csv_row() +
                 "\n");
  write_file(out / "lambda.csv", lambda_csv(res.lambda_trace));
  if (res.net.final_is_tabl())
    write_file(out / "attention.csv",
               attention_csv(attention_stats(res.net, train_set)));

  std::cout << "train metrics: " << train_metrics.to_json() << "\n"
            << "test metrics:  " << test_metrics.to_json() << "\n"
            << "artifacts in " << c.out_dir << "\n";
  return 0;
}

int cmd_eval(const RunConfig& c) {
  Network net = load_checkpoint(c.checkpoint_path);
  Dataset ds = load_data(c);
  Split split = make_split(ds, {c.setup, c.fold});
  auto test_set = windows_for_days(ds, split.test_days, c.horizon, c.stride);
  const MetricsReport m = evaluate(net, test_set, c.threads);

  fs::create_directories(c.out_dir);
  write_file(fs::path(c.out_dir) / "metrics.csv",
             "split,accuracy,precision,recall,f1\ntest," + m.csv_row() + "\n");
  std::cout << m.to_json() << "\n";
  return 0;
}

// Finite-difference harness over random layer instances: perturbs every
// parameter entry of a TABL layer and compares against the analytic
// gradients of the probe loss L = sum(d_y . Y).
struct GradReport {
  double max_rel_err = 0;
  std::string worst = "none";
  void take(double err, const std::string& where) {
    if (err > max_rel_err) {
      max_rel_err = err;
      worst = where;
    }
  }
};

double probe_loss(const Matrix& y, const Matrix& d_y) {
  double total = 0;
  for (int i = 0; i < y.size(); ++i)
    total += double(y.data()[i]) * d_y.data()[i];
  return total;
}

int cmd_gradcheck(const std::vector<int>& dims_opt, int trials,
                  uint64_t seed) {
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<int> dim(1, 6);
  std::normal_distribution<double> dist;
  std::uniform_real_distribution<double> lam(0.05, 0.95);

  GradReport by_tensor[6];  // w1, w, w2, b, lambda, x
  const char* tensor_names[6] = {"w1", "w", "w2", "b", "lambda", "x"};

  for (int trial = 0; trial < trials; ++trial) {
    LayerDims d{dim(rng), dim(rng), dim(rng), dim(rng)};
    if (dims_opt.size() == 4)
      d = {dims_opt[0], dims_opt[1], dims_opt[2], dims_opt[3]};

    auto rand_m = [&](int r, int cc, double sd = 1.0) {
      Matrix m(r, cc);
      for (int i = 0; i < m.size(); ++i) m.data()[i] = Scalar(sd * dist(rng));
      return m;
    };
    TablParams p;
    // Moderate scales keep the attention softmax away from saturation, where
    // finite differences of the ~1e-13 gradients are pure rounding noise.
    p.w1 = rand_m(d.out_features, d.in_features, 0.5);
    p.w = rand_m(d.in_steps, d.in_steps, 0.3);
    for (int i = 0; i < d.in_steps; ++i)
      p.w(i, i) = Scalar(1) / Scalar(d.in_steps);
    p.w2 = rand_m(d.in_steps, d.out_steps);
    p.b = rand_m(d.out_features, d.out_steps);
    p.lambda = Scalar(lam(rng));
    p.activation = ActivationKind::Identity;
    Matrix x = rand_m(d.in_features, d.in_steps);
    Matrix d_y = rand_m(d.out_features, d.out_steps);

    TablCache cache;
    tabl_forward(x, p, cache);
    TablGrads g = tabl_backward(d_y, cache, p);

    auto loss_with = [&](const TablParams& pp, const Matrix& xx) {
      TablCache cc;
      return probe_loss(tabl_forward(xx, pp, cc), d_y);
    };
    auto central = [&](Scalar& theta, const TablParams& pp, const Matrix& xx) {
      const double h = 1e-5 * std::max(1.0, std::abs(double(theta)));
      const Scalar saved = theta;
      theta = Scalar(double(saved) + h);
      const double up = loss_with(pp, xx);
      theta = Scalar(double(saved) - h);
      const double down = loss_with(pp, xx);
      theta = saved;
      return (up - down) / (2 * h);
    };
    auto rel = [](double analytic, double numeric) {
      return std::abs(analytic - numeric) /
             std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    };
    auto check_matrix = [&](Matrix TablParams::* member, const Matrix& grad,
                            int tensor) {
      TablParams pp = p;
      Matrix& target = pp.*member;
      for (int i = 0; i < target.size(); ++i) {
        if (member == &TablParams::w &&
            i % target.cols() == i / target.cols())
          continue;  // diagonal is fixed, gradient defined as zero
        const double num = central(target.data()[i], pp, x);
        by_tensor[tensor].take(
            rel(double(grad.data()[i]), num),
            std::string(tensor_names[tensor]) + "[" + std::to_string(i) +
                "] trial " + std::to_string(trial));
      }
    };
    check_matrix(&TablParams::w1, g.d_w1, 0);
    check_matrix(&TablParams::w, g.d_w, 1);
    check_matrix(&TablParams::w2, g.d_w2, 2);
    check_matrix(&TablParams::b, g.d_b, 3);
    {
      TablParams pp = p;
      const double num = central(pp.lambda, pp, x);
      by_tensor[4].take(rel(double(g.d_lambda), num),
                        "lambda trial " + std::to_string(trial));
    }
    {
      Matrix xx = x;
      TablParams pp = p;
      for (int i = 0; i < xx.size(); ++i) {
        const double num = central(xx.data()[i], pp, xx);
        by_tensor[5].take(rel(double(g.d_x.data()[i]), num),
                          "x[" + std::to_string(i) + "] trial " +
                              std::to_string(trial));
      }
    }
  }

  bool pass = true;
  for (int t = 0; t < 6; ++t) {
    const bool ok = by_tensor[t].max_rel_err < 1e-5;
    pass = pass && ok;
    std::printf("%-6s max rel err %.3e (%s) %s\n", tensor_names[t],
                by_tensor[t].max_rel_err, by_tensor[t].worst.c_str(),
                ok ? "OK" : "FAIL");
  }
  std::printf("gradcheck %s over %d trials\n", pass ? "PASS" : "FAIL", trials);
  return pass ? 0 : kExitNumeric;
}

int cmd_bench(const RunConfig& c, bool analytic_only, int iterations) {
  std::string csv = "config,memory_params,compute_madds\n";
  auto row = [&](const std::string& name, const CostEstimate& e) {
    csv += name + "," + std::to_string(e.memory_params) + "," +
           std::to_string(e.compute_madds) + "\n";
  };
  row("BL(40x10->3x1)", cost_bl(40, 10, 3, 1));
  row("TABL(40x10->3x1)", cost_tabl(40, 10, 3, 1));
  row("BL(40x10->120x5)", cost_bl(40, 10, 120, 5));
  row("TABL(40x10->120x5)", cost_tabl(40, 10, 120, 5));
  row("BL(120x5->3x1)", cost_bl(120, 5, 3, 1));
  row("TABL(120x5->3x1)", cost_tabl(120, 5, 3, 1));
  row("ASeqRNN(40,32,10)", cost_aseq_rnn(40, 32, 10));
  std::cout << csv;

  fs::create_directories(c.out_dir);
  write_file(fs::path(c.out_dir) / "cost.csv", csv);
  if (analytic_only) return 0;

  std::string timing = "config,forward_ms,backward_ms,total_ms\n";
  for (FinalLayerKind kind : {FinalLayerKind::Bl, FinalLayerKind::Tabl}) {
    NetworkSpec spec{Topology::C, kind};
    TimingReport r = timing_bench(spec, iterations, c.seed);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f\n", r.config.c_str(),
                  r.forward_ms, r.backward_ms, r.total_ms);
    timing += buf;
  }
  std::cout << timing;
  write_file(fs::path(c.out_dir) / "timing.csv", timing);
  return 0;
}

int cmd_stats(const RunConfig& c, const std::string& manifest_path) {
  Network net = load_checkpoint(c.checkpoint_path);
  if (!net.final_is_tabl())
    throw CheckpointError(
        "attention statistics require a TABL final layer; this checkpoint "
        "ends in a plain bilinear layer");
  Dataset ds = load_data(c);
  Split split = make_split(ds, {c.setup, c.fold});
  auto windows = windows_for_days(ds, split.train_days, c.horizon, c.stride);

  fs::create_directories(c.out_dir);
  const std::string csv = attention_csv(attention_stats(net, windows));
  write_file(fs::path(c.out_dir) / "attention.csv", csv);
  std::cout << csv;

  if (!manifest_path.empty()) {
    std::ifstream in(manifest_path);
    if (!in) throw ParseError("cannot read manifest " + manifest_path);
    json manifest = json::parse(in);
    const auto trace =
        manifest.at("lambda_trace").get<std::vector<std::vector<double>>>();
    write_file(fs::path(c.out_dir) / "lambda.csv", lambda_csv(trace));
  }
  return 0;
}

int cmd_synth(const RunConfig& c) {
  SynthConfig sc;
  sc.seed = c.seed;
  sc.n_days = c.synth_days;
  sc.vectors_per_day = c.synth_vectors;
  sc.separable = c.separable;
  sc.threshold = c.synth_threshold;
  Dataset ds = synth_lob(sc);

  fs::create_directories(c.out_dir);
  for (size_t d = 0; d < ds.days.size(); ++d) {
    char name[32];
    std::snprintf(name, sizeof(name), "day_%02zu.txt", d + 1);
    std::ofstream out(fs::path(c.out_dir) / name);
    if (!out) throw ParseError("cannot write day file in " + c.out_dir);
    char buf[32];
    for (const auto& fv : ds.days[d].events) {
      std::string line;
      for (double v : fv.values) {
        std::snprintf(buf, sizeof(buf), "%.10g ", v);
        line += buf;
      }
      for (int i = 0; i < 5; ++i) {
        line += std::to_string(fv.labels[i]);
        line += i == 4 ? '\n' : ' ';
      }
      out << line;
    }
  }
  std::cout << "wrote " << ds.days.size() << " day file(s), "
            << ds.total_vectors() << " vectors to " << c.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal-attention bilinear networks for limit order books"};
  app.require_subcommand(1);

  RunConfig c;
  std::vector<int> gradcheck_dims;
  int gradcheck_trials = 20;
  bool analytic_only = false;
  int bench_iters = 20000;
  std::string manifest_path;
  std::string config_path;

  // The config file (if any) seeds the defaults before flags are parsed, so
  // explicit flags always win. Find it with a pre-scan since its values must
  // be in place before CLI11 runs.
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    std::string path;
    if (arg == "--config" && i + 1 < argc) path = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0) path = arg.substr(9);
    if (!path.empty()) {
      try {
        apply_config_file(c, path);
      } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
      }
    }
  }

  auto add_data_opts = [&](CLI::App* cmd) {
    cmd->add_option("--data", c.data_path, "FI-2010 text file or directory");
    cmd->add_flag("--synth", c.use_synth, "use the synthetic generator");
    cmd->add_flag("--separable", c.separable,
                  "synthetic: plant a separable class signal");
    cmd->add_option("--synth-days", c.synth_days, "synthetic: number of days");
    cmd->add_option("--synth-vectors", c.synth_vectors,
                    "synthetic: vectors per day");
    cmd->add_option("--setup", c.setup, "split protocol")
        ->check(CLI::IsMember({1, 2}));
    cmd->add_option("--fold", c.fold, "anchored fold (setup 1)")
        ->check(CLI::Range(1, 9));
    cmd->add_option("--horizon", c.horizon,
                    "prediction horizon, one of {10,20,30,50,100}")
        ->check(CLI::IsMember({10, 20, 30, 50, 100}));
    cmd->add_option("--stride", c.stride, "window stride")
        ->check(CLI::PositiveNumber);
  };
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", c.seed, "master seed");
    cmd->add_option("--threads", c.threads, "evaluation threads")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", c.out_dir, "output directory");
    cmd->add_option("--config", config_path,
                    "key=value config file; flags win");
  };

  CLI::App* train_cmd = app.add_subcommand("train", "train a network");
  add_data_opts(train_cmd);
  add_common(train_cmd);
  train_cmd->add_option("--topology", c.topology, "A, B or C")
      ->check(CLI::IsMember({"A", "B", "C"}));
  train_cmd->add_option("--layer", c.layer, "final layer kind")
      ->check(CLI::IsMember({"BL", "TABL"}));
  train_cmd->add_option("--optimizer", c.optimizer, "sgd or adam")
      ->check(CLI::IsMember({"sgd", "adam"}));
  train_cmd->add_option("--max-norm", c.max_norm, "max-norm bound")
      ->check(CLI::IsMember({3.0, 5.0, 7.0}));
  train_cmd->add_option("--epochs", c.epochs, "epoch cap")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch", c.batch, "mini-batch size")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--dropout", c.dropout, "hidden dropout rate")
      ->check(CLI::Range(0.0, 0.99));
  train_cmd->add_option("--loss-scale", c.loss_scale,
                        "weighted cross-entropy scale c");

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  add_data_opts(eval_cmd);
  add_common(eval_cmd);
  eval_cmd->add_option("--checkpoint", c.checkpoint_path, "model file")
      ->required();

  CLI::App* grad_cmd =
      app.add_subcommand("gradcheck", "finite-difference gradient audit");
  grad_cmd->add_option("--dims", gradcheck_dims,
                       "fixed D,T,D',T' instead of random dims")
      ->delimiter(',')
      ->expected(4);
  grad_cmd->add_option("--trials", gradcheck_trials, "random instances")
      ->check(CLI::PositiveNumber);
  grad_cmd->add_option("--seed", c.seed, "master seed");

  CLI::App* bench_cmd =
      app.add_subcommand("bench", "complexity estimates and wall-clock timing");
  add_common(bench_cmd);
  bench_cmd->add_flag("--analytic-only", analytic_only,
                      "skip wall-clock timing");
  bench_cmd->add_option("--iters", bench_iters, "timing iterations")
      ->check(CLI::Range(1000, 10000000));

  CLI::App* stats_cmd =
      app.add_subcommand("stats", "attention and lambda export");
  add_data_opts(stats_cmd);
  add_common(stats_cmd);
  stats_cmd->add_option("--checkpoint", c.checkpoint_path, "model file")
      ->required();
  stats_cmd->add_option("--manifest", manifest_path,
                        "training manifest for the lambda curve");

  CLI::App* synth_cmd =
      app.add_subcommand("synth", "write synthetic day files");
  add_common(synth_cmd);
  synth_cmd->add_flag("--separable", c.separable, "separable class signal");
  synth_cmd->add_option("--days", c.synth_days, "number of days");
  synth_cmd->add_option("--vectors", c.synth_vectors, "vectors per day");
  synth_cmd->add_option("--threshold", c.synth_threshold,
                        "labeling threshold on relative mid-price change");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kExitUsage;
  }

  if ((*train_cmd || *eval_cmd || *stats_cmd) && c.horizon == 0) {
    std::cerr << "--horizon is required: choose one of {10,20,30,50,100}\n";
    return kExitUsage;
  }

  try {
    if (*train_cmd) {
      c.command = "train";
      return cmd_train(c);
    }
    if (*eval_cmd) {
      c.command = "eval";
      return cmd_eval(c);
    }
    if (*grad_cmd) return cmd_gradcheck(gradcheck_dims, gradcheck_trials,
                                        c.seed);
    if (*bench_cmd) return cmd_bench(c, analytic_only, bench_iters);
    if (*stats_cmd) return cmd_stats(c, manifest_path);
    if (*synth_cmd) return cmd_synth(c);
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ShapeError& e) {
    std::cerr << "shape error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
