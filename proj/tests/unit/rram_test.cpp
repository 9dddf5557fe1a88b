#include <gtest/gtest.h>

#include <cmath>

#include "neon/common/error.hpp"
#include "neon/common/rng.hpp"
#include "neon/graph/fixtures.hpp"
#include "neon/rram/mapping.hpp"
#include "neon/transform/transform.hpp"

using namespace neon;
using namespace neon::graph;
using namespace neon::rram;

namespace {

HardwareConfig hw;

GraphNode matmul(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed = 1) {
    return make_matmul("m", {}, {1, fan_out}, fan_in, seed);
}

transform::NeonNet small_neon(std::size_t d, std::uint64_t seed) {
    transform::NeonNet n;
    n.net = nn::FcNet::xavier({static_cast<Eigen::Index>(d), 16, static_cast<Eigen::Index>(d)}, nn::Activation::tanh,
                              nn::Activation::linear, seed);
    n.net.layers[0].bias.setConstant(0.25);
    n.bounds = {-3.0, 3.0, -1.0, 1.0};
    return n;
}

ExecutionGraph transformed_capsule() {
    auto g = capsule_mini(7, 4);
    auto sq = small_neon(8, 1);
    sq.replaced_op = OpKind::squash(8);
    auto sm = small_neon(16, 2);
    sm.replaced_op = OpKind::softmax(16);
    g = transform::apply_replacement(g, "squash", sq);
    return transform::apply_replacement(g, "softmax", sm);
}

}  // namespace

TEST(Unroll, OneKernelPerOutput) {
    auto k = unroll_kernels(matmul(128, 64));
    ASSERT_EQ(k.size(), 64u);
    EXPECT_EQ(k[0].size(), 128u);
    auto n = matmul(3, 2);
    k = unroll_kernels(n);
    // weights are fan_in x fan_out row-major; kernel j is column j
    EXPECT_EQ(k[1][2], n.weights[2 * 2 + 1]);
    EXPECT_EQ(unroll_kernels(matmul(1, 1)).size(), 1u);
}

TEST(Unroll, ConvLoweredToMatmul) {
    // K=4 filters over C=3 channels with 3x3 windows: 27 x 4 weights.
    auto conv = make_matmul("conv", {}, {10, 4}, 3 * 3 * 3, 5);
    auto k = unroll_kernels(conv);
    ASSERT_EQ(k.size(), 4u);
    for (const auto& v : k) EXPECT_EQ(v.size(), 27u);
}

TEST(Unroll, BiasAppendsARow) {
    auto m = matmul(3, 2);
    auto b = make_node("b", OpKind::of(OpTag::bias_add), {"m"}, {1, 2});
    b.weights = {0.5, -0.5};
    auto k = unroll_kernels(m, &b);
    EXPECT_EQ(k[0].size(), 4u);
    EXPECT_EQ(k[1][3], -0.5);
}

TEST(Unroll, MissingWeightsThrow) {
    auto n = make_node("t", OpKind::of(OpTag::tanh), {}, {1, 2});
    EXPECT_THROW(unroll_kernels(n), Error);
}

TEST(Slice, EightColumnsPerKernelPerSign) {
    EXPECT_EQ(hw.columns_per_kernel(), 8);
    MappingPlan plan;
    slice_and_place(plan, "m", unroll_kernels(matmul(10, 1)), 12, TileRole::workload_weights, hw);
    ASSERT_EQ(plan.tiles.size(), 2u);
    EXPECT_EQ(plan.tiles[0].occupied_cols, 8u);
    EXPECT_EQ(plan.tiles[1].sign, Sign::neg);
}

TEST(Slice, HalfRowsGiveHalfUtilization) {
    MappingPlan plan;
    slice_and_place(plan, "m", unroll_kernels(matmul(64, 64)), 14, TileRole::workload_weights, hw);
    // 64 kernels x 8 slices = 512 columns per sign = 4 full-width tiles per sign.
    ASSERT_EQ(plan.tiles.size(), 8u);
    for (const auto& t : plan.tiles) {
        EXPECT_EQ(t.occupied_cols, 128u);
        EXPECT_EQ(t.occupied_rows, 64u);
        EXPECT_DOUBLE_EQ(plan.utilization(t), 0.5);
    }
}

TEST(Slice, LongKernelsSplitIntoRowGroups) {
    MappingPlan plan;
    slice_and_place(plan, "m", unroll_kernels(matmul(200, 2)), 14, TileRole::workload_weights, hw);
    EXPECT_EQ(plan.nodes.at("m").row_groups, 2u);
    ASSERT_EQ(plan.tiles.size(), 4u);
    EXPECT_EQ(plan.tiles[0].occupied_rows, 128u);
    EXPECT_EQ(plan.tiles[2].occupied_rows, 72u);
    check_plan(plan, hw);
}

TEST(Slice, DigitsOfAKnownValue) {
    // 0.75 at frac 14 is 12288 = 0b11'00'00'00'00'00'00'00: only slice 6 holds 3.
    MappingPlan plan;
    slice_and_place(plan, "m", {{0.75}, {-0.75}}, 14, TileRole::workload_weights, hw);
    for (const auto& p : plan.placements) {
        const bool lit = p.slice == 6 && ((p.kernel == 0) == (p.sign == Sign::pos));
        EXPECT_EQ(p.digits[0], lit ? 3 : 0) << p.kernel << " " << p.slice << " " << to_string(p.sign);
    }
}

TEST(FracBits, LargestThatFits) {
    EXPECT_EQ(weight_frac_bits({0.75}, 16), 16);  // 0.75 * 2^16 = 49152 < 65535
    EXPECT_EQ(weight_frac_bits({1.5}, 16), 15);
    EXPECT_EQ(weight_frac_bits({3.0, -0.1}, 16), 14);
}

TEST(MapGraph, CapsuleTransformedIsFullyPlaced) {
    auto g = transformed_capsule();
    auto plan = map_graph(g, hw);
    for (const auto& n : g.nodes()) {
        if (n.op.tag == OpTag::matmul) {
            EXPECT_TRUE(plan.nodes.contains(n.id)) << n.id;
        }
        if (n.op.tag == OpTag::bias_add) {
            EXPECT_TRUE(plan.fused_bias.contains(n.id)) << n.id;
        }
    }
    EXPECT_EQ(plan.nodes.at("squash/fc0").role, TileRole::neon_net);
    EXPECT_EQ(plan.nodes.at("caps_fc").role, TileRole::workload_weights);
    for (const auto& t : plan.tiles) {
        EXPECT_GT(plan.utilization(t), 0.0);
        EXPECT_LE(plan.utilization(t), 1.0);
        // NEON-Nets never share a tile with the workload.
        EXPECT_EQ(t.role == TileRole::neon_net, g.node(t.node).is_neon_internal());
    }
    EXPECT_GT(plan.tiles_with_role(TileRole::neon_net), 0u);
}

TEST(MapGraph, RoundTripIsBitExact) {
    auto g = transformed_capsule();
    auto plan = map_graph(g, hw);
    for (const auto& [id, nm] : plan.nodes) {
        const auto& n = g.node(id);
        const GraphNode* bias = nm.bias_node.empty() ? nullptr : &g.node(nm.bias_node);
        const auto expect = quantize_kernels(unroll_kernels(n, bias), nm.frac_bits, hw.value_bits);
        EXPECT_EQ(reconstruct_kernels(plan, id, hw), expect) << id;
    }
}

TEST(MapGraph, UntransformedCandidateIsAnError) {
    EXPECT_THROW(map_graph(capsule_mini(), hw), Error);
}

TEST(MapGraph, EmptyGraphGivesEmptyPlan) {
    auto plan = map_graph(ExecutionGraph::build({}, "", ""), hw);
    EXPECT_EQ(plan.total_subarrays(), 0u);
    EXPECT_EQ(plan.mean_utilization(), 0.0);
}

TEST(MapGraph, ConservationAcrossConfigs) {
    auto g = transformed_capsule();
    for (std::size_t size : {32u, 64u, 128u, 256u}) {
        HardwareConfig h;
        h.xbar_rows = h.xbar_cols = size;
        auto plan = map_graph(g, h);
        std::map<std::string, std::size_t> count;
        for (const auto& p : plan.placements) ++count[p.node];
        for (const auto& [id, nm] : plan.nodes) {
            EXPECT_EQ(count[id], nm.kernels * nm.slices * nm.row_groups * 2) << id;
        }
    }
}

TEST(MapGraph, MeanUtilizationDoesNotGrowWithCrossbarSize) {
    auto g = transformed_capsule();
    double prev = 2.0;
    for (std::size_t size : {64u, 128u, 256u, 512u}) {
        HardwareConfig h;
        h.xbar_rows = h.xbar_cols = size;
        const double u = map_graph(g, h).mean_utilization();
        EXPECT_LE(u, prev) << size;
        prev = u;
    }
}

TEST(MapGraph, JsonOrderingIsStable) {
    auto g = transformed_capsule();
    auto a = plan_to_json(map_graph(g, hw)).dump();
    auto b = plan_to_json(map_graph(g, hw)).dump();
    EXPECT_EQ(a, b);
    auto j = plan_to_json(map_graph(g, hw));
    const auto& ps = j.at("placements");
    for (std::size_t i = 1; i < ps.size(); ++i) {
        EXPECT_LE(ps[i - 1].at("node").get<std::string>(), ps[i].at("node").get<std::string>());
    }
}

TEST(Lut, SingleInputSixteenBit) {
    auto f = lut_footprint(1, hw);
    EXPECT_EQ(f.bytes, 131072.0);
    EXPECT_EQ(hw.subarray_capacity_bytes(), 4096u);
    EXPECT_EQ(f.subarrays, 32.0);
    EXPECT_TRUE(f.feasible);
    // 2880 MB spread over 23040 LUTs.
    EXPECT_EQ(2880.0 * 1024 * 1024 / 23040, f.bytes);
}

TEST(Lut, TwoInputIsInfeasible) {
    auto f = lut_footprint(2, hw);
    EXPECT_EQ(f.bytes, std::ldexp(2.0, 32));
    EXPECT_FALSE(f.feasible);
    EXPECT_FALSE(lut_footprint(OpKind::softmax(16), hw).feasible);
    EXPECT_TRUE(lut_footprint(OpKind::leaky_relu(0.1), hw).feasible);
}
