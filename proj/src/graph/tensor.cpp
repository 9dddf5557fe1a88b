#include "neon/graph/tensor.hpp"

#include <limits>

#include "neon/common/error.hpp"

namespace neon::graph {

bool TensorShape::is_valid() const noexcept {
    if (dims_.empty()) {
        return false;
    }
    std::size_t count = 1;
    for (std::size_t d : dims_) {
        if (d == 0 || count > std::numeric_limits<std::size_t>::max() / d) {
            return false;
        }
        count *= d;
    }
    return true;
}

std::size_t TensorShape::element_count() const {
    if (!is_valid()) {
        throw Error("invalid tensor shape " + to_string());
    }
    std::size_t count = 1;
    for (std::size_t d : dims_) {
        count *= d;
    }
    return count;
}

TensorShape TensorShape::with_last(std::size_t d) const {
    auto dims = dims_;
    dims.back() = d;
    return TensorShape(std::move(dims));
}

std::string TensorShape::to_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (i) {
            s += "x";
        }
        s += std::to_string(dims_[i]);
    }
    return s + "]";
}

Tensor Tensor::zeros(TensorShape s) {
    const auto n = s.element_count();
    return Tensor(std::move(s), std::vector<double>(n, 0.0));
}

}  // namespace neon::graph
