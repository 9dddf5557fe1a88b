#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "neon/nn/fc_net.hpp"

namespace neon::nn {

enum class LrSchedule { constant, cosine };

struct TrainConfig {
    double epsilon = 1e-4;
    int max_layers = 100;
    int num_epochs = 100;
    int batch_size = 1024;
    double learning_rate = 1e-4;
    double weight_decay = 1e-4;
    std::uint64_t seed = 0;
    int xbar_size = 128;
    LrSchedule schedule = LrSchedule::constant;
    double validation_fraction = 0.1;

    /// Throws neon::Error on out-of-range values.
    void validate() const;

    /// Profile that reaches the MSE thresholds on a desktop CPU: larger
    /// step, smaller batches, cosine decay, no weight decay.
    static TrainConfig desk();
};

struct AdamState {
    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double eps = 1e-8;

    std::vector<Eigen::MatrixXd> m_weight, v_weight;
    std::vector<Eigen::VectorXd> m_bias, v_bias;
    long step = 0;

    static AdamState for_net(const FcNet& net);
};

/// One Adam update with bias correction. Weight decay is an L2 term added
/// to the gradient. Frozen layers are left untouched.
void adam_step(FcNet& net, const Gradients& grads, AdamState& state, double learning_rate, double weight_decay);

/// Column-aligned supervised pairs.
struct Dataset {
    Eigen::MatrixXd inputs;   // in_dim x N
    Eigen::MatrixXd targets;  // out_dim x N

    Eigen::Index size() const { return inputs.cols(); }
};

struct TrainResult {
    std::vector<double> loss_curve;  // mean training MSE per epoch
    double validation_mse = 0.0;
    int epochs_run = 0;
    double seconds = 0.0;
};

/// Seeded train/validation split; the validation part is `fraction` of the
/// samples (at least one when there are two or more samples).
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double fraction, std::uint64_t seed);

/// Mini-batch Adam on MSE for cfg.num_epochs. A training split smaller
/// than one batch is trained as a single full batch.
TrainResult train(FcNet& net, const Dataset& data, const TrainConfig& cfg);

/// Trains on an existing split; the validation set only scores the result.
TrainResult train_split(FcNet& net, const Dataset& train_set, const Dataset& validation, const TrainConfig& cfg);

}  // namespace neon::nn
