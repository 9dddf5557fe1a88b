#include "neon/nn/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neon/common/error.hpp"

namespace neon::nn {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

// Round-half-up division by 2^shift.
std::int64_t rounding_shift(std::int64_t acc, int shift) {
    if (shift <= 0) {
        return acc;
    }
    return floor_div(acc + (std::int64_t{1} << (shift - 1)), std::int64_t{1} << shift);
}

std::int64_t saturate(std::int64_t raw, const QuantSpec& spec, std::size_t& saturations) {
    if (raw > spec.raw_max()) {
        ++saturations;
        return spec.raw_max();
    }
    if (raw < spec.raw_min()) {
        ++saturations;
        return spec.raw_min();
    }
    return raw;
}

std::int64_t to_raw(double v, const QuantSpec& spec, std::size_t& saturations) {
    const double scaled = std::ldexp(v, spec.frac_bits);
    if (!(scaled < 9.0e18 && scaled > -9.0e18)) {
        ++saturations;
        return scaled > 0 ? spec.raw_max() : spec.raw_min();
    }
    return saturate(std::llround(scaled), spec, saturations);
}

}  // namespace

std::int64_t QuantSpec::raw_max() const {
    return is_signed ? (std::int64_t{1} << (total_bits - 1)) - 1 : (std::int64_t{1} << total_bits) - 1;
}

std::int64_t QuantSpec::raw_min() const {
    return is_signed ? -(std::int64_t{1} << (total_bits - 1)) : 0;
}

double QuantSpec::max_value() const { return std::ldexp(static_cast<double>(raw_max()), -frac_bits); }

double QuantSpec::lsb() const { return std::ldexp(1.0, -frac_bits); }

void QuantSpec::validate() const {
    if (total_bits <= 1 || total_bits > 32 || frac_bits <= 0 || frac_bits >= total_bits) {
        throw Error("invalid fixed-point spec: total_bits=" + std::to_string(total_bits) +
                    " frac_bits=" + std::to_string(frac_bits));
    }
}

int calibrate_frac_bits(const FcNet& net, double activation_bound, int total_bits) {
    double peak = std::abs(activation_bound);
    for (const auto& l : net.layers) {
        peak = std::max({peak, l.weight.cwiseAbs().maxCoeff(), l.bias.size() ? l.bias.cwiseAbs().maxCoeff() : 0.0});
    }
    for (int f = total_bits - 1; f >= 1; --f) {
        QuantSpec s{total_bits, f, true};
        if (peak <= s.max_value()) {
            return f;
        }
    }
    return 1;
}

FixedTanhTable::FixedTanhTable(const QuantSpec& spec) {
    spec.validate();
    const std::int64_t one = std::int64_t{1} << spec.frac_bits;
    lo_ = std::max(-8 * one, spec.raw_min());
    const std::int64_t hi = std::min(8 * one, spec.raw_max());
    const std::int64_t span = hi - lo_;
    step_ = std::max<std::int64_t>(1, (span + one - 1) / one);
    const std::int64_t count = (span + step_ - 1) / step_ + 1;
    knots_.reserve(static_cast<std::size_t>(count));
    for (std::int64_t k = 0; k < count; ++k) {
        const double x = std::ldexp(static_cast<double>(lo_ + k * step_), -spec.frac_bits);
        knots_.push_back(std::llround(std::ldexp(std::tanh(x), spec.frac_bits)));
    }
}

std::int64_t FixedTanhTable::operator()(std::int64_t raw) const {
    if (raw <= lo_) {
        return knots_.front();
    }
    const std::int64_t offset = raw - lo_;
    const auto idx = static_cast<std::size_t>(offset / step_);
    if (idx + 1 >= knots_.size()) {
        return knots_.back();
    }
    const std::int64_t rem = offset % step_;
    const std::int64_t t0 = knots_[idx];
    const std::int64_t t1 = knots_[idx + 1];
    return t0 + floor_div((t1 - t0) * rem + step_ / 2, step_);
}

QuantizedNet::QuantizedNet(const FcNet& net, const QuantSpec& spec) : spec_(spec), tanh_(spec) {
    net.validate();
    for (const auto& l : net.layers) {
        QLayer q;
        q.activation = l.activation;
        q.weight.resize(l.weight.rows(), l.weight.cols());
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
                q.weight(r, c) = to_raw(l.weight(r, c), spec_, weight_saturations_);
            }
        }
        q.bias.resize(l.bias.size());
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) {
            q.bias(r) = to_raw(l.bias(r), spec_, weight_saturations_);
        }
        layers_.push_back(std::move(q));
    }
}

QuantizedOutput QuantizedNet::operator()(const Eigen::VectorXd& x) const {
    if (x.size() != layers_.front().weight.cols()) {
        throw DimensionError("input has " + std::to_string(x.size()) + " features, network expects " +
                             std::to_string(layers_.front().weight.cols()));
    }
    QuantizedOutput out;
    out.saturations = weight_saturations_;
    std::vector<std::int64_t> a(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        a[static_cast<std::size_t>(i)] = to_raw(x(i), spec_, out.saturations);
    }
    const int f = spec_.frac_bits;
    for (const auto& l : layers_) {
        std::vector<std::int64_t> next(static_cast<std::size_t>(l.weight.rows()));
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
            std::int64_t acc = l.bias(r) * (std::int64_t{1} << f);
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
                acc += l.weight(r, c) * a[static_cast<std::size_t>(c)];
            }
            std::int64_t v = saturate(rounding_shift(acc, f), spec_, out.saturations);
            switch (l.activation) {
                case Activation::linear:
                    break;
                case Activation::tanh:
                    v = tanh_(v);
                    break;
                case Activation::relu:
                    v = std::max<std::int64_t>(v, 0);
                    break;
                case Activation::sigmoid:
                    // (tanh(z/2) + 1) / 2 on the same table.
                    v = rounding_shift(tanh_(rounding_shift(v, 1)) + (std::int64_t{1} << f), 1);
                    break;
            }
            next[static_cast<std::size_t>(r)] = v;
        }
        a = std::move(next);
    }
    out.values.resize(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.values(static_cast<Eigen::Index>(i)) = std::ldexp(static_cast<double>(a[i]), -f);
    }
    return out;
}

QuantizedOutput quantize_eval(const FcNet& net, const QuantSpec& spec, const Eigen::VectorXd& x) {
    return QuantizedNet(net, spec)(x);
}

}  // namespace neon::nn
