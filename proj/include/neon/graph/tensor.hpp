#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace neon::graph {

/// Dimension list of a dense tensor. The last axis is the innermost
/// (row-major flattening).
class TensorShape {
public:
    TensorShape() = default;
    TensorShape(std::initializer_list<std::size_t> dims) : dims_(dims) {}
    explicit TensorShape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {}

    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    std::size_t rank() const noexcept { return dims_.size(); }
    bool empty() const noexcept { return dims_.empty(); }
    std::size_t last() const { return dims_.back(); }

    /// Product of dims; throws when a dim is zero or the product overflows.
    std::size_t element_count() const;
    bool is_valid() const noexcept;

    /// Same shape with the innermost axis replaced.
    TensorShape with_last(std::size_t d) const;

    std::string to_string() const;

    friend bool operator==(const TensorShape&, const TensorShape&) = default;

private:
    std::vector<std::size_t> dims_;
};

struct Tensor {
    TensorShape shape;
    std::vector<double> values;

    Tensor() = default;
    Tensor(TensorShape s, std::vector<double> v) : shape(std::move(s)), values(std::move(v)) {}
    static Tensor zeros(TensorShape s);

    /// Number of innermost-axis rows.
    std::size_t rows() const { return values.size() / shape.last(); }
};

}  // namespace neon::graph
