#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcc/mlp.hpp"
#include "mcc/model.hpp"

namespace mcc {

/// Versioned binary encoding of one stack: layer count, per-layer shape
/// table (out, in, activation), then weights row-major and biases in
/// declaration order, all integers u32 and parameters f64, little-endian.
/// The federated broadcast path uses exactly these bytes.
std::vector<std::uint8_t> serialize_stack(const MlpParams& p);
MlpParams deserialize_stack(const std::vector<std::uint8_t>& bytes, std::size_t* offset = nullptr);

/// Full model checkpoint: magic "MCCFCKP1", format version, then the six
/// stacks (online f, g_i, g_c, target f, g_i, g_c) in the stack encoding.
void save_checkpoint(const MccModel& model, const std::string& path);
MccModel load_checkpoint(const std::string& path);

std::vector<std::uint8_t> serialize_model(const MccModel& model);
MccModel deserialize_model(const std::vector<std::uint8_t>& bytes);

}  // namespace mcc
