#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "neon/graph/graph.hpp"
#include "neon/nn/train.hpp"
#include "neon/rram/hardware_config.hpp"
#include "neon/transform/neon_net.hpp"

namespace neon::transform {

/// Transform candidates in topological order. Layers that belong to an
/// inserted NEON-Net are never listed, so the pass is applied once only.
std::vector<std::string> delineate(const graph::ExecutionGraph& g, const rram::HardwareConfig& hw);

/// Sigmoid nodes the hardware supports through the tanh identity.
std::vector<std::string> identity_rewrites(const graph::ExecutionGraph& g, const rram::HardwareConfig& hw);

/// Replaces every sigmoid with affine(1/2, 0) -> tanh -> affine(1/2, 1/2);
/// the last node keeps the sigmoid's id.
graph::ExecutionGraph rewrite_sigmoid(const graph::ExecutionGraph& g);

/// Runs the graph once per sample and records the node's input/output.
/// Each run yields one column per invocation of the op: a [rows, W] tensor
/// with invocation width d contributes rows * W / d columns, each a
/// row-major slice of d consecutive elements.
CaptureDataset capture(const graph::ExecutionGraph& g, const std::string& node_id,
                       const std::vector<graph::Tensor>& samples);

/// Invocations per graph run for a node.
std::size_t repeat_count(const graph::ExecutionGraph& g, const std::string& node_id);

/// Seeded Gaussian mixture over the op's input vectors.
struct MixtureSpec {
    int components = 8;
    double center_mean = 0.0;
    double center_std = 1.0;
    double within_std = 0.3;
};

/// Mixture defaults used when an op is trained without a host workload.
MixtureSpec default_mixture(const graph::OpKind& op);

/// Desk training profile for an op trained on its own: squash has a
/// tighter target and gets three times the epochs.
nn::TrainConfig op_profile(const graph::OpKind& op);

/// Samples op inputs from the mixture and labels them with the exact op.
CaptureDataset synthesize_dataset(const graph::OpKind& op, std::size_t samples, const MixtureSpec& mix,
                                  std::uint64_t seed);

/// Exact op applied to every column (one invocation per column).
Eigen::MatrixXd apply_op(const graph::OpKind& op, const Eigen::MatrixXd& x);

/// Structure growth: one xbar_size-wide tanh hidden layer, trained; while
/// validation MSE > epsilon, add another layer, re-initialize everything
/// and retrain, up to max_layers. Exhausting the budget is flagged through
/// report.converged, not thrown.
NeonNet grow_structure(const CaptureDataset& data, const nn::TrainConfig& cfg);

struct ActivationScore {
    nn::Activation activation;
    double validation_mse;
};

/// Trains one single-hidden-layer net per activation on identical data
/// and seed; sorted by ascending validation MSE.
std::vector<ActivationScore> activation_grid_search(const CaptureDataset& data,
                                                    const std::vector<nn::Activation>& candidates,
                                                    const nn::TrainConfig& cfg);

/// Splices clamp_in -> NEON layers -> clamp_out in place of the node. The
/// last inserted node keeps the node's id, so consumers are untouched.
/// Reshape nodes bracket the subgraph when the tensor's innermost width
/// differs from the invocation width.
graph::ExecutionGraph apply_replacement(const graph::ExecutionGraph& g, const std::string& node_id,
                                        const NeonNet& neon);

/// Rebuilds a NEON-Net (weights and bounds) from the nodes it owns.
NeonNet extract_neon_net(const graph::ExecutionGraph& g, const std::string& owner, const graph::OpKind& replaced);

struct TransformOptions {
    nn::TrainConfig train = nn::TrainConfig::desk();
    std::size_t capture_samples = 50000;  // op invocations recorded per candidate
    double input_std = 1.0;               // graph inputs are seeded N(0, input_std)
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct CandidateResult {
    std::string node_id;
    NeonNet neon;
    std::size_t samples = 0;
};

struct TransformResult {
    graph::ExecutionGraph graph;
    std::vector<CandidateResult> candidates;  // delineation order
    std::vector<std::string> identity_rewrites;
};

/// delineate -> capture -> grow_structure -> extract_bounds -> apply_replacement
/// for every candidate, after the sigmoid identity rewrite.
TransformResult transform_graph(const graph::ExecutionGraph& g, const rram::HardwareConfig& hw,
                                const TransformOptions& opts);

/// Per-candidate summary. Wall-clock timings are left out so the report
/// is a pure function of its inputs; see timings_to_json.
nlohmann::json transform_report(const TransformResult& r);
nlohmann::json timings_to_json(const TransformResult& r);

/// Seeded N(0, stddev) tensors shaped like the graph input.
std::vector<graph::Tensor> sample_graph_inputs(const graph::ExecutionGraph& g, std::size_t count, double stddev,
                                               std::uint64_t seed);

}  // namespace neon::transform
