#include "neon/graph/fixtures.hpp"

#include <cmath>

#include "neon/common/rng.hpp"

namespace neon::graph {

GraphNode make_matmul(std::string id, std::vector<std::string> inputs, TensorShape out, std::size_t fan_in,
                      std::uint64_t seed) {
    GraphNode n = make_node(std::move(id), OpKind::of(OpTag::matmul), std::move(inputs), std::move(out));
    const std::size_t fan_out = n.output_shape.last();
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Rng rng(derive_seed(seed, n.id));
    n.weights.resize(fan_in * fan_out);
    for (auto& w : n.weights) {
        w = rng.uniform(-limit, limit);
    }
    return n;
}

GraphNode make_node(std::string id, OpKind op, std::vector<std::string> inputs, TensorShape out) {
    GraphNode n;
    n.id = std::move(id);
    n.op = op;
    n.inputs = std::move(inputs);
    n.output_shape = std::move(out);
    return n;
}

ExecutionGraph capsule_mini(std::uint64_t seed, std::size_t capsules) {
    std::vector<GraphNode> nodes;
    nodes.push_back(make_matmul("caps_fc", {}, {capsules, 8}, 16, seed));
    nodes.push_back(make_node("squash", OpKind::squash(8), {"caps_fc"}, {capsules, 8}));
    nodes.push_back(make_matmul("route_fc", {"squash"}, {capsules, 16}, 8, seed));
    nodes.push_back(make_node("softmax", OpKind::softmax(16), {"route_fc"}, {capsules, 16}));
    return ExecutionGraph::build(std::move(nodes), "caps_fc", "softmax");
}

ExecutionGraph attn_mini(std::uint64_t seed, std::size_t tokens) {
    std::vector<GraphNode> nodes;
    nodes.push_back(make_matmul("score_fc", {}, {tokens, 64}, 32, seed));
    nodes.push_back(make_node("softmax", OpKind::softmax(64), {"score_fc"}, {tokens, 64}));
    nodes.push_back(make_matmul("value_fc", {"softmax"}, {tokens, 32}, 64, seed));
    nodes.push_back(make_node("gate", OpKind::of(OpTag::sigmoid), {"value_fc"}, {tokens, 32}));
    return ExecutionGraph::build(std::move(nodes), "score_fc", "gate");
}

}  // namespace neon::graph
