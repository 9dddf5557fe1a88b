#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "neon/graph/op_kind.hpp"
#include "neon/nn/fc_net.hpp"

namespace neon::transform {

struct BoundSpec {
    double input_min = 0.0;
    double input_max = 0.0;
    double output_min = 0.0;
    double output_max = 0.0;
};

enum class BoundSide { input, output };

/// Input/output pairs recorded at one node, one invocation per column.
/// Values are stored exactly as observed; nothing is normalized.
struct CaptureDataset {
    std::string source;  // node id, or a synthetic label
    graph::OpKind op;
    Eigen::MatrixXd inputs;   // in_dim x N
    Eigen::MatrixXd outputs;  // out_dim x N

    Eigen::Index size() const { return inputs.cols(); }
};

struct GrowthReport {
    std::size_t hidden_layers = 0;
    double validation_mse = 0.0;
    int epochs_run = 0;  // summed over every attempted depth
    double seconds = 0.0;
    bool converged = false;
};

struct NeonNet {
    nn::FcNet net;
    BoundSpec bounds;
    graph::OpKind replaced_op;
    GrowthReport report;

    Eigen::Index in_dim() const { return net.in_dim(); }
    Eigen::Index out_dim() const { return net.out_dim(); }

    /// Clamped inference: clamp_in -> net -> clamp_out.
    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
};

/// Exact min/max over every element. A degenerate range is widened by 1e-6
/// on each side so the clamp stays well defined.
BoundSpec extract_bounds(const CaptureDataset& data);

double clamp(double v, const BoundSpec& b, BoundSide side);
Eigen::VectorXd clamp(const Eigen::VectorXd& x, const BoundSpec& b, BoundSide side);

nlohmann::json bounds_to_json(const BoundSpec& b);
BoundSpec bounds_from_json(const nlohmann::json& j);

// NEON-Net files: a JSON header naming a float32 sidecar with every layer's
// weights (row-major out x in) followed by its bias.
void save_neon_net(const NeonNet& n, const std::filesystem::path& path);
NeonNet load_neon_net(const std::filesystem::path& path);

// Capture files: a JSON manifest plus a float32 sidecar holding the input
// block (column after column) followed by the output block.
void save_capture(const CaptureDataset& d, const std::filesystem::path& path);
CaptureDataset load_capture(const std::filesystem::path& path);

}  // namespace neon::transform
