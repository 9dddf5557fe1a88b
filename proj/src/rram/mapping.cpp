#include "neon/rram/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "neon/common/error.hpp"

namespace neon::rram {

using graph::GraphNode;
using graph::OpTag;

std::string_view to_string(TileRole r) {
    switch (r) {
        case TileRole::workload_weights: return "workload_weights";
        case TileRole::neon_net: return "neon_net";
        case TileRole::lut_storage: return "lut_storage";
    }
    return "unknown";
}

std::string_view to_string(Sign s) { return s == Sign::pos ? "pos" : "neg"; }

std::vector<Kernel> unroll_kernels(const GraphNode& node, const GraphNode* bias) {
    if (node.weights.empty()) {
        throw Error("node '" + node.id + "' has no weights to unroll");
    }
    if (node.op.tag == OpTag::bias_add) {
        std::vector<Kernel> out;
        for (double b : node.weights) out.push_back({b});
        return out;
    }
    if (node.op.tag != OpTag::matmul) {
        throw Error("node '" + node.id + "' is not a MAC node");
    }
    const std::size_t fan_out = node.output_shape.last();
    const std::size_t fan_in = node.fan_in();
    if (bias && bias->weights.size() != fan_out) {
        throw DimensionError("bias '" + bias->id + "' does not match '" + node.id + "'");
    }
    std::vector<Kernel> out(fan_out, Kernel(fan_in + (bias ? 1 : 0)));
    for (std::size_t i = 0; i < fan_in; ++i) {
        for (std::size_t j = 0; j < fan_out; ++j) out[j][i] = node.weights[i * fan_out + j];
    }
    if (bias) {
        for (std::size_t j = 0; j < fan_out; ++j) out[j][fan_in] = bias->weights[j];
    }
    return out;
}

double MappingPlan::utilization(const CrossbarTile& t) const {
    return static_cast<double>(t.occupied_rows * t.occupied_cols) / static_cast<double>(xbar_rows * xbar_cols);
}

double MappingPlan::mean_utilization() const {
    if (tiles.empty()) return 0.0;
    double s = 0.0;
    for (const auto& t : tiles) s += utilization(t);
    return s / static_cast<double>(tiles.size());
}

std::size_t MappingPlan::tiles_with_role(TileRole r) const {
    return static_cast<std::size_t>(std::count_if(tiles.begin(), tiles.end(), [&](const auto& t) { return t.role == r; }));
}

std::size_t MappingPlan::occupied_cells(TileRole r) const {
    std::size_t n = 0;
    for (const auto& t : tiles) {
        if (t.role == r) n += t.occupied_rows * t.occupied_cols;
    }
    return n;
}

int weight_frac_bits(const std::vector<double>& values, int value_bits) {
    double peak = 0.0;
    for (double v : values) peak = std::max(peak, std::abs(v));
    const double top = std::ldexp(1.0, value_bits) - 1.0;
    for (int f = 32; f > -32; --f) {
        if (std::round(std::ldexp(peak, f)) <= top) return f;
    }
    throw Error("weights too large for " + std::to_string(value_bits) + "-bit storage");
}

namespace {

std::uint64_t magnitude_code(double w, int frac_bits, int value_bits) {
    const double q = std::round(std::ldexp(std::abs(w), frac_bits));
    return std::min(static_cast<std::uint64_t>(q), (std::uint64_t{1} << value_bits) - 1);
}

}  // namespace

std::vector<Kernel> quantize_kernels(const std::vector<Kernel>& kernels, int frac_bits, int value_bits) {
    std::vector<Kernel> out = kernels;
    for (auto& k : out) {
        for (auto& w : k) {
            const double m = std::ldexp(static_cast<double>(magnitude_code(w, frac_bits, value_bits)), -frac_bits);
            w = w < 0 ? -m : m;
        }
    }
    return out;
}

void slice_and_place(MappingPlan& plan, const std::string& node, const std::vector<Kernel>& kernels, int frac_bits,
                     TileRole role, const HardwareConfig& hw) {
    hw.validate();
    plan.xbar_rows = hw.xbar_rows;
    plan.xbar_cols = hw.xbar_cols;
    NodeMapping nm;
    nm.node = node;
    nm.role = role;
    nm.frac_bits = frac_bits;
    nm.kernels = kernels.size();
    nm.kernel_length = kernels.empty() ? 0 : kernels.front().size();
    nm.slices = static_cast<std::size_t>(hw.columns_per_kernel());
    nm.row_groups = (nm.kernel_length + hw.xbar_rows - 1) / hw.xbar_rows;
    const std::uint64_t digit_mask = (std::uint64_t{1} << hw.cell_bits) - 1;

    for (std::size_t rg = 0; rg < nm.row_groups; ++rg) {
        const std::size_t r0 = rg * hw.xbar_rows;
        const std::size_t rows = std::min(hw.xbar_rows, nm.kernel_length - r0);
        for (Sign sign : {Sign::pos, Sign::neg}) {
            CrossbarTile* tile = nullptr;
            for (std::size_t k = 0; k < kernels.size(); ++k) {
                // A kernel's slice columns stay contiguous on one tile.
                if (!tile || tile->occupied_cols + nm.slices > hw.xbar_cols) {
                    CrossbarTile t;
                    t.id = plan.tiles.size();
                    t.role = role;
                    t.node = node;
                    t.row_group = rg;
                    t.sign = sign;
                    t.occupied_rows = rows;
                    plan.tiles.push_back(std::move(t));
                    tile = &plan.tiles.back();
                    nm.tiles.push_back(tile->id);
                }
                for (std::size_t s = 0; s < nm.slices; ++s) {
                    Placement p;
                    p.node = node;
                    p.kernel = k;
                    p.row_group = rg;
                    p.slice = s;
                    p.sign = sign;
                    p.tile = tile->id;
                    p.col = tile->occupied_cols++;
                    p.digits.resize(rows);
                    for (std::size_t r = 0; r < rows; ++r) {
                        const double w = kernels[k][r0 + r];
                        const bool mine = sign == Sign::pos ? w > 0.0 : w < 0.0;
                        const std::uint64_t code = mine ? magnitude_code(w, frac_bits, hw.value_bits) : 0;
                        p.digits[r] = static_cast<std::uint8_t>((code >> (s * hw.cell_bits)) & digit_mask);
                    }
                    tile->placements.push_back(plan.placements.size());
                    plan.placements.push_back(std::move(p));
                }
            }
        }
    }
    plan.nodes[node] = std::move(nm);
}

MappingPlan map_graph(const graph::ExecutionGraph& g, const HardwareConfig& hw, bool allow_candidates) {
    hw.validate();
    MappingPlan plan;
    plan.xbar_rows = hw.xbar_rows;
    plan.xbar_cols = hw.xbar_cols;
    for (const auto& n : g.nodes()) {
        if (!allow_candidates && !n.is_neon_internal() && graph::classify(n.op, hw) == graph::SupportClass::transform_candidate) {
            throw Error("node '" + n.id + "' (" + std::string(graph::op_name(n.op.tag)) +
                        ") has no hardware mapping; run the transform pass first");
        }
    }
    for (auto i : g.topo_order()) {
        const auto& n = g.nodes()[i];
        if (n.op.tag == OpTag::bias_add && plan.fused_bias.contains(n.id)) {
            continue;
        }
        if (n.op.tag != OpTag::matmul && n.op.tag != OpTag::bias_add) {
            continue;
        }
        const GraphNode* bias = nullptr;
        if (n.op.tag == OpTag::matmul) {
            const auto consumers = g.consumers(n.id);
            if (consumers.size() == 1) {
                const auto& c = g.node(consumers.front());
                if (c.op.tag == OpTag::bias_add && c.neon_owner == n.neon_owner) bias = &c;
            }
        }
        const auto kernels = unroll_kernels(n, bias);
        std::vector<double> all;
        for (const auto& k : kernels) all.insert(all.end(), k.begin(), k.end());
        const TileRole role = n.is_neon_internal() ? TileRole::neon_net : TileRole::workload_weights;
        slice_and_place(plan, n.id, kernels, weight_frac_bits(all, hw.value_bits), role, hw);
        if (bias) {
            plan.nodes[n.id].bias_node = bias->id;
            plan.fused_bias[bias->id] = n.id;
        }
    }
    check_plan(plan, hw);
    return plan;
}

std::vector<Kernel> reconstruct_kernels(const MappingPlan& plan, const std::string& node, const HardwareConfig& hw) {
    const auto& nm = plan.nodes.at(node);
    std::vector<std::vector<std::int64_t>> codes(nm.kernels, std::vector<std::int64_t>(nm.kernel_length, 0));
    for (const auto& p : plan.placements) {
        if (p.node != node) continue;
        const std::size_t r0 = p.row_group * hw.xbar_rows;
        for (std::size_t r = 0; r < p.digits.size(); ++r) {
            const std::int64_t part = static_cast<std::int64_t>(p.digits[r]) << (p.slice * hw.cell_bits);
            codes[p.kernel][r0 + r] += p.sign == Sign::pos ? part : -part;
        }
    }
    std::vector<Kernel> out(nm.kernels, Kernel(nm.kernel_length));
    for (std::size_t k = 0; k < nm.kernels; ++k) {
        for (std::size_t r = 0; r < nm.kernel_length; ++r) {
            out[k][r] = std::ldexp(static_cast<double>(codes[k][r]), -nm.frac_bits);
        }
    }
    return out;
}

void check_plan(const MappingPlan& plan, const HardwareConfig& hw) {
    std::set<std::tuple<std::string, std::size_t, std::size_t, std::size_t, Sign>> seen;
    std::map<std::string, std::size_t> per_node;
    for (const auto& p : plan.placements) {
        if (!seen.emplace(p.node, p.kernel, p.row_group, p.slice, p.sign).second) {
            throw Error("placement of '" + p.node + "' kernel " + std::to_string(p.kernel) + " appears twice");
        }
        ++per_node[p.node];
    }
    for (const auto& t : plan.tiles) {
        if (t.occupied_rows > hw.xbar_rows || t.occupied_cols > hw.xbar_cols) {
            throw Error("tile " + std::to_string(t.id) + " exceeds the crossbar");
        }
        if (t.occupied_rows == 0 || t.occupied_cols == 0) {
            throw Error("tile " + std::to_string(t.id) + " is empty");
        }
    }
    for (const auto& [id, nm] : plan.nodes) {
        const std::size_t expect = nm.kernels * nm.slices * nm.row_groups * 2;
        if (per_node[id] != expect) {
            throw Error("node '" + id + "' has " + std::to_string(per_node[id]) + " placements, expected " +
                        std::to_string(expect));
        }
    }
}

LutFootprint lut_footprint(std::size_t inputs, const HardwareConfig& hw) {
    LutFootprint f;
    f.inputs = inputs;
    const double entry_bytes = hw.value_bits / 8.0;
    f.bytes = std::ldexp(entry_bytes, static_cast<int>(std::min<std::size_t>(inputs * hw.value_bits, 4000)));
    f.subarrays = std::ceil(f.bytes / static_cast<double>(hw.subarray_capacity_bytes()));
    f.feasible = f.bytes <= static_cast<double>(hw.lut_cap_bytes);
    return f;
}

LutFootprint lut_footprint(const graph::OpKind& op, const HardwareConfig& hw) {
    return lut_footprint(graph::is_grouped(op.tag) ? op.dim : 1, hw);
}

nlohmann::json plan_to_json(const MappingPlan& plan) {
    using nlohmann::json;
    json tiles = json::array();
    for (const auto& t : plan.tiles) {
        tiles.push_back({{"id", t.id},
                         {"role", to_string(t.role)},
                         {"node", t.node},
                         {"row_group", t.row_group},
                         {"sign", to_string(t.sign)},
                         {"occupied_rows", t.occupied_rows},
                         {"occupied_cols", t.occupied_cols},
                         {"utilization", plan.utilization(t)}});
    }
    std::vector<const Placement*> order;
    for (const auto& p : plan.placements) order.push_back(&p);
    std::sort(order.begin(), order.end(), [](const Placement* a, const Placement* b) {
        return std::tie(a->node, a->kernel, a->row_group, a->slice, a->sign) <
               std::tie(b->node, b->kernel, b->row_group, b->slice, b->sign);
    });
    json placements = json::array();
    for (const auto* p : order) {
        placements.push_back({{"node", p->node},
                              {"kernel", p->kernel},
                              {"row_group", p->row_group},
                              {"slice", p->slice},
                              {"sign", to_string(p->sign)},
                              {"tile", p->tile},
                              {"col", p->col}});
    }
    json nodes = json::object();
    for (const auto& [id, nm] : plan.nodes) {
        nodes[id] = {{"role", to_string(nm.role)},
                     {"bias_node", nm.bias_node},
                     {"frac_bits", nm.frac_bits},
                     {"kernels", nm.kernels},
                     {"kernel_length", nm.kernel_length},
                     {"row_groups", nm.row_groups},
                     {"slices", nm.slices},
                     {"tiles", nm.tiles}};
    }
    return {{"xbar", {plan.xbar_rows, plan.xbar_cols}},
            {"total_subarrays", plan.total_subarrays()},
            {"mean_utilization", plan.mean_utilization()},
            {"nodes", nodes},
            {"tiles", tiles},
            {"placements", placements}};
}

}  // namespace neon::rram
