#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace neon::graph {

enum class OpTag {
    matmul,
    bias_add,
    tanh,
    sigmoid,
    relu,
    mul_elementwise,
    softmax,
    squash,
    sqrt_elementwise,
    leaky_relu,
    identity,
    // Produced by graph rewrites: y = scale * x + shift.
    affine,
    // Saturation into [lo, hi]; the comparator + multiplexer rounding circuit.
    clamp,
    // Reinterprets the innermost axis width; values untouched.
    reshape,
};

inline constexpr OpTag kAllOpTags[] = {
    OpTag::matmul,   OpTag::bias_add,   OpTag::tanh,
    OpTag::sigmoid,  OpTag::relu,       OpTag::mul_elementwise,
    OpTag::softmax,  OpTag::squash,     OpTag::sqrt_elementwise,
    OpTag::leaky_relu, OpTag::identity, OpTag::affine,
    OpTag::clamp,    OpTag::reshape,
};

std::string_view op_name(OpTag tag);
std::optional<OpTag> parse_op(std::string_view name);

/// Operation tag plus the scalar attributes the tag uses.
struct OpKind {
    OpTag tag = OpTag::identity;
    // Invocation width along the innermost axis: softmax/squash vector width,
    // group width for elementwise candidates (default 1), target width for reshape.
    std::size_t dim = 1;
    double alpha = 0.0;   // leaky_relu slope
    double scale = 1.0;   // affine
    double shift = 0.0;   // affine
    double lo = 0.0;      // clamp
    double hi = 0.0;      // clamp

    static OpKind of(OpTag t) { return OpKind{.tag = t}; }
    static OpKind softmax(std::size_t d) { return OpKind{.tag = OpTag::softmax, .dim = d}; }
    static OpKind squash(std::size_t d) { return OpKind{.tag = OpTag::squash, .dim = d}; }
    static OpKind leaky_relu(double a) { return OpKind{.tag = OpTag::leaky_relu, .alpha = a}; }
    static OpKind affine(double s, double b) { return OpKind{.tag = OpTag::affine, .scale = s, .shift = b}; }
    static OpKind clamp(double l, double h) { return OpKind{.tag = OpTag::clamp, .lo = l, .hi = h}; }
    static OpKind reshape(std::size_t d) { return OpKind{.tag = OpTag::reshape, .dim = d}; }

    friend bool operator==(const OpKind&, const OpKind&) = default;
};

/// Ops whose semantics act on groups of `dim` innermost elements.
bool is_grouped(OpTag tag);
/// Single-input ops that preserve the tensor shape.
bool is_shape_preserving(OpTag tag);

}  // namespace neon::graph
