#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "neon/nn/fc_net.hpp"

namespace neon::nn {

/// Two's-complement fixed point: value = raw / 2^frac_bits.
struct QuantSpec {
    int total_bits = 16;
    int frac_bits = 8;
    bool is_signed = true;

    std::int64_t raw_max() const;
    std::int64_t raw_min() const;
    double max_value() const;
    double lsb() const;
    /// Throws neon::Error unless 0 < frac_bits < total_bits <= 32.
    void validate() const;
};

/// Largest frac_bits for which every weight, bias and `activation_bound`
/// is representable. Returns at least 1.
int calibrate_frac_bits(const FcNet& net, double activation_bound, int total_bits = 16);

/// Integer tanh table over the fixed-point input grid: 2^frac_bits + 1
/// knots spanning [-8, 8] (clipped to the representable range), linearly
/// interpolated in integer arithmetic.
class FixedTanhTable {
public:
    explicit FixedTanhTable(const QuantSpec& spec);
    std::int64_t operator()(std::int64_t raw) const;
    std::size_t size() const { return knots_.size(); }

private:
    std::int64_t lo_ = 0;
    std::int64_t step_ = 1;
    std::vector<std::int64_t> knots_;
};

struct QuantizedOutput {
    Eigen::VectorXd values;
    std::size_t saturations = 0;
};

/// Forward pass on the fixed-point grid: inputs, weights, biases and every
/// layer output are rounded to nearest and saturated; saturations counted.
QuantizedOutput quantize_eval(const FcNet& net, const QuantSpec& spec, const Eigen::VectorXd& x);

class QuantizedNet {
public:
    QuantizedNet(const FcNet& net, const QuantSpec& spec);
    QuantizedOutput operator()(const Eigen::VectorXd& x) const;
    const QuantSpec& spec() const { return spec_; }
    std::size_t weight_saturations() const { return weight_saturations_; }

private:
    struct QLayer {
        Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> weight;
        Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> bias;
        Activation activation;
    };
    QuantSpec spec_;
    FixedTanhTable tanh_;
    std::vector<QLayer> layers_;
    std::size_t weight_saturations_ = 0;
};

}  // namespace neon::nn
