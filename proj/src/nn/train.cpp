#include "neon/nn/train.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>

#include "neon/common/error.hpp"
#include "neon/common/rng.hpp"

namespace neon::nn {

void TrainConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw Error(std::string("invalid training config: ") + what);
        }
    };
    require(epsilon > 0.0, "epsilon must be positive");
    require(max_layers > 0, "max_layers must be positive");
    require(num_epochs > 0, "num_epochs must be positive");
    require(batch_size > 0, "batch_size must be positive");
    require(learning_rate > 0.0, "learning_rate must be positive");
    require(weight_decay >= 0.0, "weight_decay must be non-negative");
    require(xbar_size > 0, "xbar_size must be positive");
    require(validation_fraction >= 0.0 && validation_fraction < 1.0, "validation_fraction must be in [0, 1)");
}

TrainConfig TrainConfig::desk() {
    TrainConfig c;
    c.learning_rate = 3e-3;
    c.batch_size = 128;
    c.weight_decay = 0.0;
    c.schedule = LrSchedule::cosine;
    return c;
}

AdamState AdamState::for_net(const FcNet& net) {
    AdamState s;
    for (const auto& l : net.layers) {
        s.m_weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
        s.v_weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
        s.m_bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
        s.v_bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
    }
    return s;
}

namespace {

template <typename Param>
void adam_update(Param& theta, const Param& grad, Param& m, Param& v, double lr, double wd, double c1, double c2) {
    Param g = grad;
    if (wd != 0.0) {
        g += wd * theta;
    }
    m = AdamState::beta1 * m + (1.0 - AdamState::beta1) * g;
    v = AdamState::beta2 * v + (1.0 - AdamState::beta2) * g.cwiseProduct(g);
    theta.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + AdamState::eps);
}

Dataset take_columns(const Dataset& data, const std::vector<Eigen::Index>& cols) {
    Dataset out;
    out.inputs = data.inputs(Eigen::all, cols);
    out.targets = data.targets(Eigen::all, cols);
    return out;
}

}  // namespace

void adam_step(FcNet& net, const Gradients& grads, AdamState& state, double learning_rate, double weight_decay) {
    if (state.m_weight.size() != net.layers.size() || grads.weight.size() != net.layers.size()) {
        throw DimensionError("optimizer state does not match the network");
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(AdamState::beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(AdamState::beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        auto& l = net.layers[k];
        if (state.m_weight[k].rows() != l.weight.rows() || state.m_weight[k].cols() != l.weight.cols() ||
            grads.weight[k].rows() != l.weight.rows() || grads.weight[k].cols() != l.weight.cols()) {
            throw DimensionError("optimizer state does not match layer " + std::to_string(k));
        }
        if (l.frozen) {
            continue;
        }
        adam_update(l.weight, grads.weight[k], state.m_weight[k], state.v_weight[k], learning_rate, weight_decay, c1, c2);
        adam_update(l.bias, grads.bias[k], state.m_bias[k], state.v_bias[k], learning_rate, weight_decay, c1, c2);
    }
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double fraction, std::uint64_t seed) {
    const Eigen::Index n = data.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng(derive_seed(seed, "split"));
    rng.shuffle(order);
    Eigen::Index n_val = static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(n)));
    if (fraction > 0.0 && n >= 2) {
        n_val = std::clamp<Eigen::Index>(n_val, 1, n - 1);
    } else {
        n_val = 0;
    }
    std::vector<Eigen::Index> val(order.begin(), order.begin() + n_val);
    std::vector<Eigen::Index> tr(order.begin() + n_val, order.end());
    return {take_columns(data, tr), take_columns(data, val)};
}

TrainResult train_split(FcNet& net, const Dataset& train_set, const Dataset& validation, const TrainConfig& cfg) {
    cfg.validate();
    net.validate();
    if (train_set.size() == 0) {
        throw Error("cannot train on an empty dataset");
    }
    if (train_set.inputs.rows() != net.in_dim() || train_set.targets.rows() != net.out_dim()) {
        throw DimensionError("dataset dimensions do not match the network");
    }
    const auto start = std::chrono::steady_clock::now();
    const Eigen::Index n = train_set.size();
    const Eigen::Index batch = std::min<Eigen::Index>(cfg.batch_size, n);
    const Eigen::Index batches_per_epoch = (n + batch - 1) / batch;
    const double total_steps = static_cast<double>(batches_per_epoch) * cfg.num_epochs;

    AdamState state = AdamState::for_net(net);
    Rng rng(derive_seed(cfg.seed, "batches"));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    TrainResult result;
    for (int epoch = 0; epoch < cfg.num_epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (Eigen::Index b = 0; b < batches_per_epoch; ++b) {
            const Eigen::Index lo = b * batch;
            const Eigen::Index hi = std::min(n, lo + batch);
            const std::vector<Eigen::Index> cols(order.begin() + lo, order.begin() + hi);
            const Eigen::MatrixXd x = train_set.inputs(Eigen::all, cols);
            const Eigen::MatrixXd t = train_set.targets(Eigen::all, cols);
            const auto cache = forward_batch(net, x);
            epoch_loss += mse(cache.output, t) * static_cast<double>(hi - lo);
            const auto grads = backward(net, cache, mse_gradient(cache.output, t));
            double lr = cfg.learning_rate;
            if (cfg.schedule == LrSchedule::cosine) {
                lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(state.step) / total_steps));
            }
            adam_step(net, grads, state, lr, cfg.weight_decay);
        }
        epoch_loss /= static_cast<double>(n);
        if (!std::isfinite(epoch_loss)) {
            throw Error("training diverged: non-finite loss at epoch " + std::to_string(epoch));
        }
        result.loss_curve.push_back(epoch_loss);
        ++result.epochs_run;
    }
    const Dataset& scored = validation.size() > 0 ? validation : train_set;
    result.validation_mse = mse(forward_batch(net, scored.inputs).output, scored.targets);
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

TrainResult train(FcNet& net, const Dataset& data, const TrainConfig& cfg) {
    cfg.validate();
    auto [train_set, validation] = split_dataset(data, cfg.validation_fraction, cfg.seed);
    return train_split(net, train_set, validation, cfg);
}

}  // namespace neon::nn
