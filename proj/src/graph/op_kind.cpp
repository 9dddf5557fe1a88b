#include "neon/graph/op_kind.hpp"

#include <array>
#include <utility>

namespace neon::graph {

namespace {

constexpr std::array<std::pair<OpTag, std::string_view>, 14> kNames{{
    {OpTag::matmul, "matmul"},
    {OpTag::bias_add, "bias_add"},
    {OpTag::tanh, "tanh"},
    {OpTag::sigmoid, "sigmoid"},
    {OpTag::relu, "relu"},
    {OpTag::mul_elementwise, "mul_elementwise"},
    {OpTag::softmax, "softmax"},
    {OpTag::squash, "squash"},
    {OpTag::sqrt_elementwise, "sqrt_elementwise"},
    {OpTag::leaky_relu, "leaky_relu"},
    {OpTag::identity, "identity"},
    {OpTag::affine, "affine"},
    {OpTag::clamp, "clamp"},
    {OpTag::reshape, "reshape"},
}};

}  // namespace

std::string_view op_name(OpTag tag) {
    for (const auto& [t, name] : kNames) {
        if (t == tag) {
            return name;
        }
    }
    return "unknown";
}

std::optional<OpTag> parse_op(std::string_view name) {
    for (const auto& [t, n] : kNames) {
        if (n == name) {
            return t;
        }
    }
    return std::nullopt;
}

bool is_grouped(OpTag tag) {
    switch (tag) {
        case OpTag::softmax:
        case OpTag::squash:
        case OpTag::relu:
        case OpTag::leaky_relu:
        case OpTag::sqrt_elementwise:
            return true;
        default:
            return false;
    }
}

bool is_shape_preserving(OpTag tag) {
    switch (tag) {
        case OpTag::matmul:
        case OpTag::reshape:
        case OpTag::mul_elementwise:
            return false;
        default:
            return true;
    }
}

}  // namespace neon::graph
