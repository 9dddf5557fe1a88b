#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace neon::nn {

enum class Activation { linear, tanh, relu, sigmoid };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct Layer {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;    // out
    Activation activation = Activation::linear;
    bool frozen = false;

    Eigen::Index in_dim() const { return weight.cols(); }
    Eigen::Index out_dim() const { return weight.rows(); }
};

/// Fully-connected network. Batches are column-major: one sample per column.
struct FcNet {
    std::vector<Layer> layers;

    Eigen::Index in_dim() const { return layers.front().in_dim(); }
    Eigen::Index out_dim() const { return layers.back().out_dim(); }
    std::size_t hidden_layers() const { return layers.empty() ? 0 : layers.size() - 1; }
    std::size_t parameter_count() const;

    /// Throws DimensionError when consecutive layers do not chain.
    void validate() const;

    /// Xavier-uniform weights, zero biases. `dims` lists node counts from
    /// input to output; hidden layers use `hidden`, the last layer `output`.
    static FcNet xavier(const std::vector<Eigen::Index>& dims, Activation hidden, Activation output,
                        std::uint64_t seed);
};

struct ForwardCache {
    std::vector<Eigen::MatrixXd> inputs;  // per layer: its input batch
    std::vector<Eigen::MatrixXd> pre;     // per layer: pre-activation
    Eigen::MatrixXd output;
};

struct Gradients {
    std::vector<Eigen::MatrixXd> weight;
    std::vector<Eigen::VectorXd> bias;
    Eigen::MatrixXd input;  // dL/dx for the batch

    static Gradients zeros_like(const FcNet& net);
};

void apply_activation(Activation a, Eigen::MatrixXd& z);
/// Derivative given pre-activation z and activation output y.
Eigen::MatrixXd activation_derivative(Activation a, const Eigen::MatrixXd& z, const Eigen::MatrixXd& y);

ForwardCache forward_batch(const FcNet& net, const Eigen::MatrixXd& x);
Eigen::VectorXd forward(const FcNet& net, const Eigen::VectorXd& x, ForwardCache* cache = nullptr);

/// Backpropagates dL/d(output). Frozen layers receive zero parameter
/// gradients but still propagate to their inputs.
Gradients backward(const FcNet& net, const ForwardCache& cache, const Eigen::MatrixXd& grad_out);

/// Mean over every element of the squared difference.
double mse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);
/// d mse / d pred.
Eigen::MatrixXd mse_gradient(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);

/// Mean per-sample (per-column) cosine similarity. Two zero vectors count
/// as 1, one zero vector as 0.
double cosine_similarity(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);

}  // namespace neon::nn
