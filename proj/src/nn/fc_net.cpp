#include "neon/nn/fc_net.hpp"

#include <cmath>
#include <string>

#include "neon/common/error.hpp"
#include "neon/common/rng.hpp"

namespace neon::nn {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::linear: return "linear";
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
    }
    return "linear";
}

Activation parse_activation(std::string_view name) {
    for (auto a : {Activation::linear, Activation::tanh, Activation::relu, Activation::sigmoid}) {
        if (to_string(a) == name) {
            return a;
        }
    }
    throw Error("unknown activation '" + std::string(name) + "'");
}

std::size_t FcNet::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) {
        n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    }
    return n;
}

void FcNet::validate() const {
    if (layers.empty()) {
        throw DimensionError("network has no layers");
    }
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& l = layers[k];
        if (l.bias.size() != l.weight.rows()) {
            throw DimensionError("layer " + std::to_string(k) + " bias length does not match its outputs");
        }
        if (k > 0 && layers[k - 1].out_dim() != l.in_dim()) {
            throw DimensionError("layer " + std::to_string(k - 1) + " emits " +
                                 std::to_string(layers[k - 1].out_dim()) + " values but layer " +
                                 std::to_string(k) + " expects " + std::to_string(l.in_dim()));
        }
    }
}

FcNet FcNet::xavier(const std::vector<Eigen::Index>& dims, Activation hidden, Activation output,
                    std::uint64_t seed) {
    if (dims.size() < 2) {
        throw DimensionError("a network needs input and output sizes");
    }
    Rng rng(seed);
    FcNet net;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
        Layer l;
        const auto in = dims[k];
        const auto out = dims[k + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        l.weight.resize(out, in);
        // Column-major fill order keeps initialisation independent of Eigen internals.
        for (Eigen::Index c = 0; c < in; ++c) {
            for (Eigen::Index r = 0; r < out; ++r) {
                l.weight(r, c) = rng.uniform(-limit, limit);
            }
        }
        l.bias = Eigen::VectorXd::Zero(out);
        l.activation = (k + 2 == dims.size()) ? output : hidden;
        net.layers.push_back(std::move(l));
    }
    return net;
}

Gradients Gradients::zeros_like(const FcNet& net) {
    Gradients g;
    for (const auto& l : net.layers) {
        g.weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
        g.bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
    }
    return g;
}

void apply_activation(Activation a, Eigen::MatrixXd& z) {
    switch (a) {
        case Activation::linear:
            break;
        case Activation::tanh:
            z = z.array().tanh();
            break;
        case Activation::relu:
            z = z.array().max(0.0);
            break;
        case Activation::sigmoid:
            z = (1.0 + (-z.array()).exp()).inverse();
            break;
    }
}

Eigen::MatrixXd activation_derivative(Activation a, const Eigen::MatrixXd& z, const Eigen::MatrixXd& y) {
    switch (a) {
        case Activation::linear:
            return Eigen::MatrixXd::Ones(z.rows(), z.cols());
        case Activation::tanh:
            return 1.0 - y.array().square();
        case Activation::relu:
            return (z.array() > 0.0).cast<double>();
        case Activation::sigmoid:
            return y.array() * (1.0 - y.array());
    }
    return Eigen::MatrixXd::Ones(z.rows(), z.cols());
}

ForwardCache forward_batch(const FcNet& net, const Eigen::MatrixXd& x) {
    if (net.layers.empty() || x.rows() != net.in_dim()) {
        throw DimensionError("input has " + std::to_string(x.rows()) + " features, network expects " +
                             std::to_string(net.layers.empty() ? 0 : net.in_dim()));
    }
    ForwardCache cache;
    cache.inputs.reserve(net.layers.size());
    cache.pre.reserve(net.layers.size());
    Eigen::MatrixXd a = x;
    for (const auto& l : net.layers) {
        cache.inputs.push_back(a);
        Eigen::MatrixXd z = l.weight * a;
        z.colwise() += l.bias;
        cache.pre.push_back(z);
        apply_activation(l.activation, z);
        a = std::move(z);
    }
    cache.output = std::move(a);
    return cache;
}

Eigen::VectorXd forward(const FcNet& net, const Eigen::VectorXd& x, ForwardCache* cache) {
    auto c = forward_batch(net, x);
    Eigen::VectorXd y = c.output.col(0);
    if (cache) {
        *cache = std::move(c);
    }
    return y;
}

Gradients backward(const FcNet& net, const ForwardCache& cache, const Eigen::MatrixXd& grad_out) {
    if (cache.inputs.size() != net.layers.size() || cache.pre.size() != net.layers.size()) {
        throw DimensionError("forward cache does not belong to this network");
    }
    if (grad_out.rows() != net.out_dim() || grad_out.cols() != cache.output.cols()) {
        throw DimensionError("output gradient shape does not match the cached batch");
    }
    Gradients g = Gradients::zeros_like(net);
    Eigen::MatrixXd delta = grad_out;
    for (std::size_t k = net.layers.size(); k-- > 0;) {
        const auto& l = net.layers[k];
        if (cache.inputs[k].rows() != l.in_dim() || cache.pre[k].rows() != l.out_dim()) {
            throw DimensionError("forward cache does not belong to this network");
        }
        const Eigen::MatrixXd& y = (k + 1 < net.layers.size()) ? cache.inputs[k + 1] : cache.output;
        delta = delta.cwiseProduct(activation_derivative(l.activation, cache.pre[k], y));
        if (!l.frozen) {
            g.weight[k].noalias() = delta * cache.inputs[k].transpose();
            g.bias[k] = delta.rowwise().sum();
        }
        delta = l.weight.transpose() * delta;
    }
    g.input = std::move(delta);
    return g;
}

double mse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
        throw DimensionError("prediction and truth batches differ in shape");
    }
    if (pred.size() == 0) {
        throw DimensionError("mse of an empty batch");
    }
    return (pred - truth).squaredNorm() / static_cast<double>(pred.size());
}

Eigen::MatrixXd mse_gradient(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols() || pred.size() == 0) {
        throw DimensionError("prediction and truth batches differ in shape");
    }
    return (2.0 / static_cast<double>(pred.size())) * (pred - truth);
}

double cosine_similarity(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
        throw DimensionError("prediction and truth batches differ in shape");
    }
    if (pred.cols() == 0) {
        return 1.0;
    }
    double total = 0.0;
    for (Eigen::Index c = 0; c < pred.cols(); ++c) {
        const double np = pred.col(c).norm();
        const double nt = truth.col(c).norm();
        if (np == 0.0 || nt == 0.0) {
            total += (np == 0.0 && nt == 0.0) ? 1.0 : 0.0;
        } else {
            total += pred.col(c).dot(truth.col(c)) / (np * nt);
        }
    }
    return total / static_cast<double>(pred.cols());
}

}  // namespace neon::nn
