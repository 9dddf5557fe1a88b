#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "neon/graph/graph.hpp"
#include "neon/nn/train.hpp"
#include "neon/transform/neon_net.hpp"

namespace neon::transform {

struct LabeledData {
    Eigen::MatrixXd inputs;   // features x N
    std::vector<int> labels;  // N class ids

    Eigen::Index size() const { return inputs.cols(); }
    /// One-hot targets, classes x N.
    Eigen::MatrixXd one_hot(Eigen::Index classes) const;
};

/// Seeded isotropic 2-D Gaussian blobs, one per class.
LabeledData gaussian_blobs(std::size_t per_class, int classes, double spread, std::uint64_t seed);

/// A single-path graph whose input is [1, features], viewed as a sequence
/// of stages that can be trained on column batches.
class Chain {
public:
    struct Stage {
        enum class Kind { dense, op, neon } kind = Kind::op;
        std::string id;           // node id for op and neon stages; matmul id for dense
        std::string bias_id;      // dense only, may be empty
        nn::Layer layer;          // dense only
        graph::OpKind op;         // op stage, or the true op behind a NEON stage
        NeonNet neon;             // neon only
    };

    /// `original` supplies the op each NEON-Net stands in for; pass the
    /// graph itself when it has no NEON-Nets.
    static Chain from_graph(const graph::ExecutionGraph& g, const graph::ExecutionGraph& original);

    /// Writes dense weights back into a copy of `g`.
    graph::ExecutionGraph write_back(const graph::ExecutionGraph& g) const;

    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
    double accuracy(const LabeledData& data) const;

    std::vector<Stage>& stages() { return stages_; }
    const std::vector<Stage>& stages() const { return stages_; }

    /// Indices of dense stages nearest to each NEON stage on either side.
    std::vector<std::size_t> neighbours_of_neon() const;

    /// Mini-batch Adam on MSE against one-hot labels. NEON stages run
    /// forward through the net and backward through the true op's
    /// Jacobian at the stage input. Only dense stages with `trainable`
    /// set are updated. Returns per-epoch mean loss.
    std::vector<double> train(const LabeledData& data, const std::vector<bool>& trainable, int epochs,
                              const nn::TrainConfig& cfg);

private:
    std::vector<Stage> stages_;
};

/// Jacobian-transpose product of the exact op at input x for upstream g,
/// column by column (each column holds whole invocations).
Eigen::MatrixXd op_vjp(const graph::OpKind& op, const Eigen::MatrixXd& x, const Eigen::MatrixXd& g);

struct FineTuneResult {
    graph::ExecutionGraph graph;
    double accuracy_baseline = 0.0;  // original graph
    double accuracy_before = 0.0;    // transformed, before fine-tuning
    double accuracy_after = 0.0;
    std::vector<std::string> unfrozen;  // dense stages that were trained
};

/// Freezes every workload layer except the dense layers adjacent to each
/// NEON-Net (whichever side exists), keeps NEON-Nets frozen, and trains
/// for `epochs`. Accuracy is measured on `eval`.
FineTuneResult fine_tune(const graph::ExecutionGraph& transformed, const graph::ExecutionGraph& original,
                         const LabeledData& train_data, const LabeledData& eval, int epochs,
                         const nn::TrainConfig& cfg);

struct ToyTask {
    graph::ExecutionGraph graph;  // trained classifier
    LabeledData train;
    LabeledData test;
};

/// Three-class blob classifier: fc1 (2 -> 8) -> squash(8) -> fc2 (8 -> 3)
/// -> softmax(3), trained from scratch with the chain trainer.
ToyTask make_toy_classifier(std::uint64_t seed);

}  // namespace neon::transform
