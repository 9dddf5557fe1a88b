#pragma once

#include <cstdint>

#include "neon/graph/graph.hpp"

namespace neon::graph {

/// Builds a matmul node with seeded Xavier-uniform weights.
GraphNode make_matmul(std::string id, std::vector<std::string> inputs, TensorShape out, std::size_t fan_in,
                      std::uint64_t seed);

GraphNode make_node(std::string id, OpKind op, std::vector<std::string> inputs, TensorShape out);

/// capsule-mini: caps_fc (matmul 16->8) -> squash(8) -> route_fc (matmul 8->16) -> softmax(16).
/// Input is `capsules` x 16.
ExecutionGraph capsule_mini(std::uint64_t seed = 7, std::size_t capsules = 32);

/// attn-mini: score_fc (matmul 32->64) -> softmax(64) -> value_fc (matmul 64->32) -> sigmoid.
/// Input is `tokens` x 32.
ExecutionGraph attn_mini(std::uint64_t seed = 11, std::size_t tokens = 64);

}  // namespace neon::graph
