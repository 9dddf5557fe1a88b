#include <gtest/gtest.h>

#include <cmath>

#include "neon/common/error.hpp"
#include "neon/cost/cost_model.hpp"
#include "neon/graph/fixtures.hpp"
#include "neon/transform/transform.hpp"

using namespace neon;
using namespace neon::graph;
using namespace neon::cost;

namespace {

rram::HardwareConfig hw;
const ComponentCatalog catalog = ComponentCatalog::defaults();
const LatencyModel model;

ExecutionGraph single(GraphNode n) {
    auto id = n.id;
    return ExecutionGraph::build({std::move(n)}, id, id);
}

GraphNode positive_matmul(std::string id, std::vector<std::string> in, std::size_t fan_in, std::size_t fan_out) {
    auto n = make_matmul(std::move(id), std::move(in), {1, fan_out}, fan_in, 3);
    for (auto& w : n.weights) w = std::abs(w) + 0.01;
    return n;
}

transform::NeonNet neon_for(const OpKind& op, std::size_t d, std::size_t width, std::uint64_t seed) {
    transform::NeonNet n;
    n.net = nn::FcNet::xavier({static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(width),
                               static_cast<Eigen::Index>(d)},
                              nn::Activation::tanh, nn::Activation::linear, seed);
    n.bounds = {-4.0, 4.0, -1.0, 1.0};
    n.replaced_op = op;
    return n;
}

ExecutionGraph transformed_attn(const ExecutionGraph& g, std::size_t width = 128) {
    auto t = transform::rewrite_sigmoid(g);
    return transform::apply_replacement(t, "softmax", neon_for(OpKind::softmax(64), 64, width, 5));
}

ExecutionGraph transformed_capsule(const ExecutionGraph& g) {
    auto t = transform::apply_replacement(g, "squash", neon_for(OpKind::squash(8), 8, 128, 1));
    return transform::apply_replacement(t, "softmax", neon_for(OpKind::softmax(16), 16, 128, 2));
}

CostReport run(Arch a, const ExecutionGraph& original, const ExecutionGraph& transformed,
               const ComponentCatalog& cat = catalog, const LatencyModel& m = model) {
    return evaluate(plan_config(a, original, transformed, hw), hw, cat, m);
}

}  // namespace

TEST(Latency, MatmulWithSixtyFourActiveColumns) {
    // 8 kernels x 8 slices fill 64 columns of one tile per sign.
    auto g = single(make_matmul("m", {}, {1, 8}, 16, 2));
    auto r = run(Arch::neon, g, g);
    EXPECT_EQ(model.crossbar_op_cycles(64, 8, hw), 32);
    EXPECT_EQ(r.latency_cycles, 32);
}

TEST(Latency, RowsOfAMatmulRunBackToBack) {
    auto g = single(make_matmul("m", {}, {5, 8}, 16, 2));
    EXPECT_EQ(run(Arch::neon, g, g).latency_cycles, 5 * 32);
}

TEST(Schedule, IndependentMatmulsOverlap) {
    auto a = make_matmul("a", {}, {1, 8}, 16, 2);
    auto b = make_matmul("b", {"a"}, {1, 8}, 8, 3);
    auto c = make_matmul("c", {"a"}, {1, 4}, 8, 4);
    auto add = make_node("sum", OpKind::of(OpTag::identity), {"b"}, {1, 8});
    auto g = ExecutionGraph::build({a, b, c, add}, "a", "sum");
    auto plan = plan_config(Arch::neon, g, g, hw);
    auto s = schedule(plan, hw, catalog, model);
    std::map<std::string, NodeTiming> t;
    for (const auto& n : s.nodes) t[n.node] = n;
    EXPECT_EQ(t["b"].start, t["c"].start);
    EXPECT_EQ(s.makespan, std::max(t["b"].end, t["c"].end));
    EXPECT_LT(s.makespan, t["a"].end + (t["b"].end - t["b"].start) + (t["c"].end - t["c"].start));
    check_schedule(s, g);
}

TEST(Schedule, ChainRespectsDependencies) {
    auto a = make_matmul("a", {}, {1, 8}, 16, 2);
    auto b = make_node("t", OpKind::of(OpTag::tanh), {"a"}, {1, 8});
    auto c = make_matmul("c", {"t"}, {1, 4}, 8, 4);
    auto g = ExecutionGraph::build({a, b, c}, "a", "c");
    auto s = schedule(plan_config(Arch::neon, g, g, hw), hw, catalog, model);
    for (std::size_t i = 1; i < s.nodes.size(); ++i) EXPECT_GE(s.nodes[i].start, s.nodes[i - 1].end);
    check_schedule(s, g);
}

TEST(Schedule, DoubleBookingIsDetected) {
    auto g = single(make_matmul("m", {}, {1, 8}, 16, 2));
    auto s = schedule(plan_config(Arch::neon, g, g, hw), hw, catalog, model);
    s.intervals.push_back({s.intervals.front().resource, "m", 1, 2});
    EXPECT_THROW(check_schedule(s, g), Error);
}

TEST(Schedule, CandidateUnderNeonIsUnroutable) {
    auto g = attn_mini(11, 4);
    EXPECT_THROW(run(Arch::neon, g, g), Error);
}

TEST(Energy, OneSubarrayForOneCycle) {
    // One kernel of length 1: a pos and a neg tile, 16 + 1 + 8 cycles each.
    auto g = single(positive_matmul("m", {}, 1, 1));
    auto r = run(Arch::neon, g, g);
    ASSERT_EQ(r.subarrays, 2u);
    ASSERT_EQ(r.latency_cycles, 25);
    const double per_cycle_nj = 24.08 * 10.0 * 1e-3;
    EXPECT_NEAR(per_cycle_nj, 0.2408, 1e-15);
    EXPECT_NEAR(r.nodes.front().energy_uj * 1e3, 2 * 25 * per_cycle_nj, 1e-12);
}

TEST(Energy, EmptyPlanIsZero) {
    ExecutionGraph g;
    for (Arch a : {Arch::dlc, Arch::lut, Arch::neon}) {
        auto r = run(a, g, g);
        EXPECT_EQ(r.latency_cycles, 0);
        EXPECT_EQ(r.energy_uj, 0.0);
        EXPECT_EQ(r.area_um2, 0.0);
        EXPECT_EQ(r.peak_power_mw, 0.0);
        EXPECT_EQ(r.subarrays, 0u);
        EXPECT_TRUE(r.nodes.empty());
    }
}

TEST(Energy, WideSoftmaxStaticPower) {
    auto g = single(make_node("sm", OpKind::softmax(1152), {}, {1, 1152}));
    LatencyModel wide = model;
    wide.dlc_lanes = 576;
    auto r = run(Arch::dlc, g, g, catalog, wide);
    // The multiplier every configuration carries adds 4.7 uW.
    EXPECT_NEAR(r.unit_power_mw, 576 * (7.424 + 26.88) + 0.0047, 1e-6);
    EXPECT_NEAR(r.unit_power_mw / 1e3, 19.76, 0.01);
}

TEST(Energy, SumOfNodes) {
    auto g = capsule_mini(7, 4);
    auto t = transformed_capsule(g);
    for (Arch a : {Arch::dlc, Arch::lut, Arch::neon}) {
        auto r = run(a, g, t);
        double sum = 0.0;
        for (const auto& n : r.nodes) sum += n.energy_uj;
        EXPECT_NEAR(r.energy_uj, sum, 1e-9 * r.energy_uj) << to_string(a);
        EXPECT_GT(r.energy_uj, 0.0);
        EXPECT_NEAR(r.edp_uj_s, r.energy_uj * r.latency_s, 1e-12 * r.edp_uj_s);
        EXPECT_LE(r.average_power_mw, r.peak_power_mw + 1e-9);
    }
}

TEST(Energy, MonotoneInEveryCatalogPower) {
    auto g = capsule_mini(7, 4);
    auto t = transformed_capsule(g);
    for (const auto& [name, spec] : catalog.entries) {
        auto hot = catalog;
        hot.entries[name].power_mw *= 1.5;
        for (Arch a : {Arch::dlc, Arch::lut, Arch::neon}) {
            EXPECT_GE(run(a, g, t, hot).energy_uj, run(a, g, t).energy_uj) << name << " " << to_string(a);
        }
    }
}

TEST(Energy, NeonInstantiatesOneTanhUnitAndMultiplier) {
    auto g = capsule_mini(7, 4);
    auto r = run(Arch::neon, g, transformed_capsule(g));
    EXPECT_EQ(r.components.at("tanh_unit"), 1u);
    EXPECT_EQ(r.components.at("multiplier"), 1u);
    EXPECT_FALSE(r.components.contains("exp_unit"));
}

TEST(Compare, DlcOverDlcIsOne) {
    auto g = capsule_mini(7, 4);
    auto c = compare_configs(g, transformed_capsule(g), hw, catalog, model);
    for (const auto& [k, v] : c.ratios.at("dlc")) EXPECT_EQ(v, 1.0) << k;
}

TEST(Compare, NoCandidatesGivesIdenticalConfigs) {
    auto a = make_matmul("a", {}, {2, 8}, 16, 2);
    auto b = make_node("t", OpKind::of(OpTag::tanh), {"a"}, {2, 8});
    auto g = ExecutionGraph::build({a, b}, "a", "t");
    auto c = compare_configs(g, g, hw, catalog, model);
    for (const auto& [arch, row] : c.ratios) {
        for (const auto& [k, v] : row) EXPECT_EQ(v, 1.0) << arch << " " << k;
    }
}

TEST(Compare, DirectionsOnSoftmaxHeavyFixture) {
    auto g = attn_mini(11, 16);
    auto c = compare_configs(g, transformed_attn(g), hw, catalog, model);
    EXPECT_LT(c.neon.latency_cycles, c.dlc.latency_cycles);
    EXPECT_GT(c.neon.area_um2, c.dlc.area_um2);
    EXPECT_GT(c.lut.area_um2, c.neon.area_um2);
}

TEST(Compare, GeomeanOfIdenticalComparisonsIsTheRatio) {
    auto g = capsule_mini(7, 4);
    auto c = compare_configs(g, transformed_capsule(g), hw, catalog, model);
    auto gm = geomean_ratios({c, c, c});
    for (const auto& [arch, row] : c.ratios) {
        for (const auto& [k, v] : row) EXPECT_NEAR(gm[arch][k], v, 1e-12 * v);
    }
}

TEST(Compare, Deterministic) {
    auto g = capsule_mini(7, 4);
    auto t = transformed_capsule(g);
    EXPECT_EQ(comparison_to_json(compare_configs(g, t, hw, catalog, model)).dump(),
              comparison_to_json(compare_configs(g, t, hw, catalog, model)).dump());
}

TEST(Scaling, DlcDoublesNeonBreaksAtCrossbarRows) {
    std::vector<std::size_t> counts;
    for (std::size_t n = 1; n <= 512; n *= 2) counts.push_back(n);
    auto s = operator_scaling_sweep(hw, catalog, model, counts);
    ASSERT_EQ(s.points.size(), 10u);
    for (std::size_t i = 1; i < s.points.size(); ++i) {
        EXPECT_NEAR(s.points[i].dlc_edp / s.points[i - 1].dlc_edp, 2.0, 1e-12);
        EXPECT_GE(s.points[i].neon_edp, s.points[i - 1].neon_edp);
        if (s.points[i].count <= hw.xbar_rows) EXPECT_LT(s.points[i].neon_edp / s.points[i - 1].neon_edp, 2.0);
    }
    EXPECT_TRUE(s.dlc_breaks.empty());
    EXPECT_EQ(s.neon_breaks, std::vector<std::size_t>{128});
    EXPECT_TRUE(s.points[0].lut_edp.has_value());
    for (std::size_t i = 1; i < s.points.size(); ++i) EXPECT_FALSE(s.points[i].lut_edp.has_value());
    EXPECT_EQ(s.points[0].lut_bytes, 131072.0);
}

TEST(Scaling, BreakFollowsCrossbarRows) {
    auto small = hw;
    small.xbar_rows = small.xbar_cols = 64;
    auto s = operator_scaling_sweep(small, catalog, model, {16, 32, 64, 128, 256});
    EXPECT_EQ(s.neon_breaks, std::vector<std::size_t>{64});
}

TEST(Scaling, UnsortedCountsThrow) {
    EXPECT_THROW(operator_scaling_sweep(hw, catalog, model, {4, 2}), Error);
    EXPECT_THROW(operator_scaling_sweep(hw, catalog, model, {0, 2}), Error);
}

TEST(InitEnergy, ZeroWithoutNeonTiles) {
    auto g = single(make_matmul("m", {}, {1, 8}, 16, 2));
    EXPECT_EQ(init_energy(rram::map_graph(g, hw), hw, catalog), 0.0);
}

TEST(InitEnergy, LinearInNetSize) {
    auto g = attn_mini(11, 4);
    auto one = rram::map_graph(transformed_attn(g, 32), hw);
    auto two = rram::map_graph(transformed_attn(g, 64), hw);
    const double cells = static_cast<double>(one.occupied_cells(rram::TileRole::neon_net));
    const double per_cell = 24.08 * 10.0 * 1e-6 / (128.0 * 128.0) * 1000.0;
    EXPECT_NEAR(init_energy(one, hw, catalog), cells * per_cell, 1e-15);
    // Width doubling doubles both weight matrices (biases ride along as one row).
    const double ratio = init_energy(two, hw, catalog) / init_energy(one, hw, catalog);
    EXPECT_NEAR(ratio, static_cast<double>(two.occupied_cells(rram::TileRole::neon_net)) / cells, 1e-12);
    EXPECT_GT(ratio, 1.9);
}

TEST(InitEnergy, SmallFractionOfInference) {
    auto g = capsule_mini(7, 32);
    auto r = run(Arch::neon, g, transformed_capsule(g));
    EXPECT_LT(r.init_energy_uj / r.energy_uj, 0.10);
}

TEST(Serialize, CsvColumns) {
    auto g = capsule_mini(7, 4);
    auto c = compare_configs(g, transformed_capsule(g), hw, catalog, model);
    auto csv = comparison_to_csv(c);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "arch,latency_cycles,area_um2,peak_power_mw,average_power_mw,energy_uj,edp_uj_s,init_energy_uj");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    auto s = scaling_to_csv(operator_scaling_sweep(hw, catalog, model, {1, 2}));
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 7);
}

TEST(Catalog, RoundTripAndValidation) {
    auto j = catalog.to_json();
    EXPECT_EQ(ComponentCatalog::from_json(j).to_json(), j);
    j["exp_unit"]["power_mw"] = 0.0;
    EXPECT_THROW(ComponentCatalog::from_json(j), Error);
    auto m = model.to_json();
    EXPECT_EQ(LatencyModel::from_json(m).to_json(), m);
    m["dlc_lanes"] = 0;
    EXPECT_THROW(LatencyModel::from_json(m), Error);
    EXPECT_THROW(parse_arch("tpu"), Error);
}
