#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "neon/graph/graph.hpp"
#include "neon/rram/hardware_config.hpp"

namespace neon::rram {

enum class TileRole { workload_weights, neon_net, lut_storage };
enum class Sign { pos, neg };

std::string_view to_string(TileRole r);
std::string_view to_string(Sign s);

/// One output channel's weights, laid out along the crossbar rows.
using Kernel = std::vector<double>;

/// One kernel per output of a matmul; kernel length is the fan-in. A bias
/// (if given) is appended as one extra row driven by a constant 1.
std::vector<Kernel> unroll_kernels(const graph::GraphNode& node, const graph::GraphNode* bias = nullptr);

/// One column of one tile: a (kernel, row group, bit slice, sign) entry.
struct Placement {
    std::string node;
    std::size_t kernel = 0;
    std::size_t row_group = 0;
    std::size_t slice = 0;  // 0 = least significant cell
    Sign sign = Sign::pos;
    std::size_t tile = 0;
    std::size_t col = 0;
    std::vector<std::uint8_t> digits;  // one cell value per occupied row
};

struct CrossbarTile {
    std::size_t id = 0;
    TileRole role = TileRole::workload_weights;
    std::string node;  // workload or NEON layer; LUT function name for lut_storage
    std::size_t row_group = 0;
    Sign sign = Sign::pos;
    std::size_t occupied_rows = 0;
    std::size_t occupied_cols = 0;
    std::vector<std::size_t> placements;  // indices into MappingPlan::placements
};

/// How one MAC node was laid out.
struct NodeMapping {
    std::string node;
    std::string bias_node;  // fused bias_add, empty when none
    TileRole role = TileRole::workload_weights;
    int frac_bits = 0;  // magnitudes stored as round(|w| * 2^frac_bits)
    std::size_t kernels = 0;
    std::size_t kernel_length = 0;
    std::size_t row_groups = 0;
    std::size_t slices = 0;
    std::vector<std::size_t> tiles;
};

struct MappingPlan {
    std::size_t xbar_rows = 0;
    std::size_t xbar_cols = 0;
    std::vector<CrossbarTile> tiles;
    std::vector<Placement> placements;
    std::map<std::string, NodeMapping> nodes;  // keyed by matmul (or lone bias) id
    std::map<std::string, std::string> fused_bias;  // bias_add id -> matmul id

    std::size_t total_subarrays() const { return tiles.size(); }
    double utilization(const CrossbarTile& t) const;
    double mean_utilization() const;
    std::size_t tiles_with_role(TileRole r) const;
    std::size_t occupied_cells(TileRole r) const;
};

/// Fixed-point fraction bits for a weight set: the largest f <= 32 such
/// that every |w| * 2^f rounds into value_bits unsigned bits.
int weight_frac_bits(const std::vector<double>& values, int value_bits);

/// Slices every kernel into ceil(value_bits / cell_bits) columns, splits
/// kernels longer than xbar_rows into row groups, and packs first-fit by
/// column groups into tiles owned by one (node, row group, sign). Positive
/// magnitudes go to the pos tile set, negative magnitudes to the neg set.
void slice_and_place(MappingPlan& plan, const std::string& node, const std::vector<Kernel>& kernels, int frac_bits,
                     TileRole role, const HardwareConfig& hw);

/// Places every MAC node of a transformed graph. Biases that directly
/// follow a matmul are fused into it. Throws if a transform candidate that
/// no NEON-Net replaced remains in the graph, unless `allow_candidates`
/// (baselines run candidates off-crossbar).
MappingPlan map_graph(const graph::ExecutionGraph& g, const HardwareConfig& hw, bool allow_candidates = false);

/// Rebuilds the quantized weights of a node from its cell digits:
/// sum over slices of digit << (slice * cell_bits), negated on the neg set,
/// divided by 2^frac_bits. Returns kernels in unroll order.
std::vector<Kernel> reconstruct_kernels(const MappingPlan& plan, const std::string& node, const HardwareConfig& hw);

/// Kernels after rounding to the node's fixed-point grid.
std::vector<Kernel> quantize_kernels(const std::vector<Kernel>& kernels, int frac_bits, int value_bits);

/// Checks capacity, conservation and placement uniqueness; throws on violation.
void check_plan(const MappingPlan& plan, const HardwareConfig& hw);

struct LutFootprint {
    std::size_t inputs = 1;
    double bytes = 0.0;  // may exceed any integer type for wide inputs
    double subarrays = 0.0;
    bool feasible = true;
};

/// 2^(inputs * value_bits) entries of value_bits / 8 bytes each.
LutFootprint lut_footprint(std::size_t inputs, const HardwareConfig& hw);
/// Footprint of one op's LUT: invocation width inputs for grouped ops.
LutFootprint lut_footprint(const graph::OpKind& op, const HardwareConfig& hw);

/// Tiles sorted by id, placements sorted by (node, kernel, row group, slice, sign).
nlohmann::json plan_to_json(const MappingPlan& plan);

}  // namespace neon::rram
