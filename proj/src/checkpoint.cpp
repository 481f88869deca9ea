#include "tabl/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace tabl {

namespace {

constexpr char kMagic[8] = {'T', 'A', 'B', 'L', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
uint32_t read_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_matrix(std::ostream& out, const Matrix& m) {
  write_u32(out, static_cast<uint32_t>(m.rows()));
  write_u32(out, static_cast<uint32_t>(m.cols()));
  for (int i = 0; i < m.size(); ++i) {
    const double v = static_cast<double>(m.data()[i]);
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
}

Matrix read_matrix(std::istream& in) {
  const int rows = static_cast<int>(read_u32(in));
  const int cols = static_cast<int>(read_u32(in));
  if (!in || rows <= 0 || cols <= 0 || rows > 1 << 20 || cols > 1 << 20) {
    throw CheckpointError("corrupt matrix header in checkpoint");
  }
  Matrix m(rows, cols);
  for (int i = 0; i < m.size(); ++i) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    m.data()[i] = static_cast<Scalar>(v);
  }
  if (!in) throw CheckpointError("truncated checkpoint");
  return m;
}

}  // namespace

void save_checkpoint(const Network& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kVersion);
  write_u32(out, static_cast<uint32_t>(net.spec.topology));
  write_u32(out, static_cast<uint32_t>(net.spec.final_kind));
  write_u32(out, static_cast<uint32_t>(net.spec.input_features));
  write_u32(out, static_cast<uint32_t>(net.spec.input_steps));
  write_u32(out, static_cast<uint32_t>(net.layers.size()));
  for (const auto& layer : net.layers) {
    if (const auto* bl = std::get_if<BlParams>(&layer.params)) {
      write_u32(out, 0);  // layer kind: BL
      write_u32(out, static_cast<uint32_t>(bl->activation));
      write_matrix(out, bl->w1);
      write_matrix(out, bl->w2);
      write_matrix(out, bl->b);
    } else {
      const auto& t = std::get<TablParams>(layer.params);
      write_u32(out, 1);  // layer kind: TABL
      write_u32(out, static_cast<uint32_t>(t.activation));
      write_matrix(out, t.w1);
      write_matrix(out, t.w);
      const double lambda = static_cast<double>(t.lambda);
      out.write(reinterpret_cast<const char*>(&lambda), sizeof(lambda));
      write_matrix(out, t.w2);
      write_matrix(out, t.b);
    }
  }
  if (!out) throw CheckpointError("write failed for " + path);
}

Network load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw CheckpointError(path + ": not a checkpoint (bad magic)");
  }
  const uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw CheckpointError(path + ": unsupported checkpoint version " +
                          std::to_string(version));
  }
  Network net;
  net.spec.topology = static_cast<Topology>(read_u32(in));
  net.spec.final_kind = static_cast<FinalLayerKind>(read_u32(in));
  net.spec.input_features = static_cast<int>(read_u32(in));
  net.spec.input_steps = static_cast<int>(read_u32(in));
  const uint32_t n_layers = read_u32(in);
  for (uint32_t i = 0; i < n_layers; ++i) {
    const uint32_t kind = read_u32(in);
    const auto act = static_cast<ActivationKind>(read_u32(in));
    Layer layer;
    if (kind == 0) {
      BlParams p;
      p.activation = act;
      p.w1 = read_matrix(in);
      p.w2 = read_matrix(in);
      p.b = read_matrix(in);
      validate(p);
      layer.params = std::move(p);
    } else if (kind == 1) {
      TablParams p;
      p.activation = act;
      p.w1 = read_matrix(in);
      p.w = read_matrix(in);
      double lambda = 0;
      in.read(reinterpret_cast<char*>(&lambda), sizeof(lambda));
      p.lambda = static_cast<Scalar>(lambda);
      p.w2 = read_matrix(in);
      p.b = read_matrix(in);
      validate(p);
      layer.params = std::move(p);
    } else {
      throw CheckpointError(path + ": unknown layer kind " +
                            std::to_string(kind));
    }
    net.layers.push_back(std::move(layer));
  }
  if (!in) throw CheckpointError(path + ": truncated checkpoint");
  return net;
}

}  // namespace tabl
