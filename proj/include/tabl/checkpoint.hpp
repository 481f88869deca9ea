#pragma once

#include <string>

#include "tabl/model.hpp"

namespace tabl {

/// Binary checkpoint: magic "TABLCKPT", uint32 format version, network
/// geometry, then row-major parameter values as 64-bit doubles per layer
/// (w1, [w, lambda,] w2, b).
void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tabl
