#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "neon/common/error.hpp"
#include "neon/common/rng.hpp"
#include "neon/graph/fixtures.hpp"
#include "neon/graph/graph.hpp"
#include "neon/graph/serialize.hpp"
#include "neon/rram/hardware_config.hpp"

using namespace neon;
using namespace neon::graph;
using nlohmann::json;

namespace {

json node_json(const std::string& id, const std::string& op, std::vector<std::string> inputs,
               std::vector<int> shape, json attrs = json::object()) {
    return {{"id", id}, {"op", op}, {"attrs", attrs}, {"inputs", inputs}, {"output_shape", shape},
            {"weights_ref", nullptr}};
}

GraphErrorKind error_kind_of(const json& doc, std::span<const float> w = {}) {
    try {
        parse_graph(doc, w);
    } catch (const GraphError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected GraphError";
    return GraphErrorKind::schema;
}

Tensor random_tensor(const TensorShape& s, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    Tensor t = Tensor::zeros(s);
    for (auto& v : t.values) v = rng.normal(0.0, scale);
    return t;
}

}  // namespace

TEST(GraphLoad, SingleSoftmaxNode) {
    json doc = {{"version", 1}, {"entry", "sm"}, {"exit", "sm"},
                {"nodes", {node_json("sm", "softmax", {}, {64}, {{"dim", 64}})}}};
    auto g = parse_graph(doc, {});
    EXPECT_EQ(g.size(), 1u);
    EXPECT_EQ(g.input_shape(), TensorShape({64}));
    EXPECT_EQ(g.node("sm").op.dim, 64u);
}

TEST(GraphLoad, TwoNodeCycleNamesBothNodes) {
    json doc = {{"version", 1}, {"entry", "A"}, {"exit", "B"},
                {"nodes", {node_json("A", "tanh", {"B"}, {4}), node_json("B", "tanh", {"A"}, {4})}}};
    try {
        parse_graph(doc, {});
        FAIL() << "cycle accepted";
    } catch (const GraphError& e) {
        EXPECT_EQ(e.kind(), GraphErrorKind::cycle);
        EXPECT_EQ(e.node_id(), "A,B");
    }
}

TEST(GraphLoad, MatmulWeightRowsMustMatchInputWidth) {
    // 128x64 weights fed by a 32-wide input.
    std::vector<float> w(128 * 64, 0.5f);
    auto mm = node_json("mm", "matmul", {"x"}, {64});
    mm["weights_ref"] = {{"offset", 0}, {"count", 128 * 64}};
    json doc = {{"version", 1}, {"entry", "x"}, {"exit", "mm"},
                {"nodes", {node_json("x", "identity", {}, {32}), mm}}};
    try {
        parse_graph(doc, w);
        FAIL() << "shape mismatch accepted";
    } catch (const GraphError& e) {
        EXPECT_EQ(e.kind(), GraphErrorKind::shape_mismatch);
        EXPECT_EQ(e.node_id(), "mm");
    }
}

TEST(GraphLoad, ReportsDanglingInputsUnknownOpsAndSchemaErrors) {
    json dangling = {{"version", 1}, {"entry", "a"}, {"exit", "b"},
                     {"nodes", {node_json("a", "tanh", {}, {4}), node_json("b", "tanh", {"zz"}, {4})}}};
    EXPECT_EQ(error_kind_of(dangling), GraphErrorKind::dangling_input);

    json unknown = {{"version", 1}, {"entry", "a"}, {"exit", "a"}, {"nodes", {node_json("a", "gelu", {}, {4})}}};
    EXPECT_EQ(error_kind_of(unknown), GraphErrorKind::unknown_op);

    json bad_alpha = {{"version", 1}, {"entry", "a"}, {"exit", "a"},
                      {"nodes", {node_json("a", "leaky_relu", {}, {4}, {{"alpha", 1.5}})}}};
    EXPECT_EQ(error_kind_of(bad_alpha), GraphErrorKind::schema);

    json dup = {{"version", 1}, {"entry", "a"}, {"exit", "a"},
                {"nodes", {node_json("a", "tanh", {}, {4}), node_json("a", "tanh", {"a"}, {4})}}};
    EXPECT_EQ(error_kind_of(dup), GraphErrorKind::schema);

    json wrong_dim = {{"version", 1}, {"entry", "a"}, {"exit", "a"},
                      {"nodes", {node_json("a", "softmax", {}, {8}, {{"dim", 4}})}}};
    EXPECT_EQ(error_kind_of(wrong_dim), GraphErrorKind::shape_mismatch);

    json no_weights = {{"version", 1}, {"entry", "a"}, {"exit", "a"}, {"nodes", {node_json("a", "matmul", {}, {4})}}};
    EXPECT_EQ(error_kind_of(no_weights), GraphErrorKind::schema);

    auto mm = node_json("a", "matmul", {}, {4});
    mm["weights_ref"] = {{"offset", 2}, {"count", 8}};
    json short_sidecar = {{"version", 1}, {"entry", "a"}, {"exit", "a"}, {"nodes", {mm}}};
    std::vector<float> w(8, 1.0f);
    EXPECT_EQ(error_kind_of(short_sidecar, w), GraphErrorKind::schema);
}

TEST(GraphLoad, SaveLoadPreservesFixture) {
    const auto g = capsule_mini();
    const auto dir = std::filesystem::temp_directory_path() / "neon_graph_test";
    std::filesystem::create_directories(dir);
    save_graph(g, dir / "caps.json");
    const auto h = load_graph(dir / "caps.json");
    ASSERT_EQ(h.size(), g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto& a = g.nodes()[i];
        const auto& b = h.nodes()[i];
        EXPECT_EQ(a.id, b.id);
        EXPECT_EQ(a.op, b.op);
        EXPECT_EQ(a.output_shape, b.output_shape);
        ASSERT_EQ(a.weights.size(), b.weights.size());
        for (std::size_t k = 0; k < a.weights.size(); ++k) {
            EXPECT_EQ(static_cast<float>(a.weights[k]), static_cast<float>(b.weights[k]));
        }
    }
}

TEST(GraphLoad, MissingSidecarIsAnError) {
    const auto dir = std::filesystem::temp_directory_path() / "neon_graph_missing";
    std::filesystem::create_directories(dir);
    save_graph(capsule_mini(), dir / "g.json");
    std::filesystem::remove(dir / "g.bin");
    EXPECT_THROW(load_graph(dir / "g.json"), Error);
}

TEST(Classify, PaperSupportClasses) {
    rram::HardwareConfig hw;
    EXPECT_EQ(classify(OpKind::of(OpTag::matmul), hw), SupportClass::crossbar_native);
    EXPECT_EQ(classify(OpKind::of(OpTag::bias_add), hw), SupportClass::crossbar_native);
    EXPECT_EQ(classify(OpKind::of(OpTag::sigmoid), hw), SupportClass::identity_rewrite);
    EXPECT_EQ(classify(OpKind::of(OpTag::tanh), hw), SupportClass::dlc_native);
    EXPECT_EQ(classify(OpKind::of(OpTag::mul_elementwise), hw), SupportClass::dlc_native);
    EXPECT_EQ(classify(OpKind::softmax(1152), hw), SupportClass::transform_candidate);
    for (auto tag : {OpTag::squash, OpTag::sqrt_elementwise, OpTag::leaky_relu, OpTag::relu}) {
        EXPECT_EQ(classify(OpKind::of(tag), hw), SupportClass::transform_candidate) << op_name(tag);
    }
}

TEST(Classify, CoversEveryNodeAndFollowsSupportedSet) {
    rram::HardwareConfig hw;
    const auto g = capsule_mini();
    const auto classes = classify_nodes(g, hw);
    EXPECT_EQ(classes.size(), g.size());
    EXPECT_EQ(classes.at("squash"), SupportClass::transform_candidate);

    hw.supported_dlc_ops.insert(OpTag::softmax);
    EXPECT_EQ(classify(OpKind::softmax(16), hw), SupportClass::dlc_native);
    hw.supported_dlc_ops.erase(OpTag::tanh);
    EXPECT_EQ(classify(OpKind::of(OpTag::sigmoid), hw), SupportClass::transform_candidate);
}

TEST(Reference, UniformSoftmaxAndZeroSquash) {
    auto sm = ExecutionGraph::build({make_node("sm", OpKind::softmax(4), {}, {4})}, "sm", "sm");
    auto out = run_graph(sm, Tensor({4}, {3.0, 3.0, 3.0, 3.0}));
    for (double v : out.values) EXPECT_DOUBLE_EQ(v, 0.25);

    auto sq = ExecutionGraph::build({make_node("sq", OpKind::squash(8), {}, {8})}, "sq", "sq");
    auto z = run_graph(sq, Tensor::zeros({8}));
    for (double v : z.values) EXPECT_EQ(v, 0.0);
}

TEST(Reference, MatmulSoftmaxMatchesScalarOracle) {
    std::vector<GraphNode> nodes;
    nodes.push_back(make_matmul("fc1", {}, {3, 12}, 10, 99));
    nodes.push_back(make_node("t", OpKind::of(OpTag::tanh), {"fc1"}, {3, 12}));
    nodes.push_back(make_matmul("fc2", {"t"}, {3, 6}, 12, 99));
    nodes.push_back(make_node("sm", OpKind::softmax(6), {"fc2"}, {3, 6}));
    const auto g = ExecutionGraph::build(nodes, "fc1", "sm");
    const auto x = random_tensor({3, 10}, 5);
    const auto y = run_graph(g, x);

    // Independent oracle: column-major accumulation, unstabilised softmax.
    const auto& w1 = nodes[0].weights;
    const auto& w2 = nodes[2].weights;
    for (std::size_t r = 0; r < 3; ++r) {
        double h[12];
        for (std::size_t j = 0; j < 12; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < 10; ++i) acc += x.values[r * 10 + i] * w1[i * 12 + j];
            h[j] = std::tanh(acc);
        }
        double z[6];
        double denom = 0.0;
        for (std::size_t j = 0; j < 6; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < 12; ++i) acc += h[i] * w2[i * 6 + j];
            z[j] = std::exp(acc);
            denom += z[j];
        }
        for (std::size_t j = 0; j < 6; ++j) {
            const double want = z[j] / denom;
            EXPECT_NEAR(y.values[r * 6 + j], want, 1e-12 * std::abs(want));
        }
    }
}

TEST(Reference, TracesEveryNodeInTopologicalOrder) {
    const auto g = attn_mini(3, 4);
    const auto traces = execute_reference(g, random_tensor(g.input_shape(), 1));
    EXPECT_EQ(traces.size(), g.size());
    std::vector<std::size_t> position(g.size());
    for (std::size_t k = 0; k < g.topo_order().size(); ++k) position[g.topo_order()[k]] = k;
    for (const auto& n : g.nodes()) {
        for (const auto& src : n.inputs) {
            EXPECT_LT(position[g.index_of(src)], position[g.index_of(n.id)]);
            EXPECT_EQ(traces.at(n.id).inputs[0].values, traces.at(src).output.values);
        }
    }
}

TEST(Reference, DeterministicBitIdentical) {
    const auto g = capsule_mini();
    const auto x = random_tensor(g.input_shape(), 17);
    const auto a = run_graph(g, x);
    const auto b = run_graph(g, x);
    EXPECT_EQ(a.values, b.values);
}

TEST(Reference, SoftmaxSumsToOneAndSquashStaysInsideUnitBall) {
    Rng seeds(2024);
    const auto g = capsule_mini();
    for (int trial = 0; trial < 50; ++trial) {
        const auto traces = execute_reference(g, random_tensor(g.input_shape(), seeds.next_u64(), 3.0));
        const auto& sm = traces.at("softmax").output;
        for (std::size_t r = 0; r < sm.rows(); ++r) {
            double sum = 0.0;
            for (std::size_t k = 0; k < 16; ++k) sum += sm.values[r * 16 + k];
            EXPECT_NEAR(sum, 1.0, 1e-9);
        }
        const auto& sq = traces.at("squash").output;
        for (std::size_t r = 0; r < sq.rows(); ++r) {
            double n2 = 0.0;
            for (std::size_t k = 0; k < 8; ++k) n2 += sq.values[r * 8 + k] * sq.values[r * 8 + k];
            EXPECT_LT(std::sqrt(n2), 1.0);
        }
    }
}

TEST(Reference, NonFiniteValuesAreReportedWithNodeId) {
    auto g = ExecutionGraph::build({make_node("root", OpKind::of(OpTag::sqrt_elementwise), {}, {2})}, "root", "root");
    try {
        run_graph(g, Tensor({2}, {4.0, -1.0}));
        FAIL() << "NaN accepted";
    } catch (const GraphError& e) {
        EXPECT_EQ(e.kind(), GraphErrorKind::numerical);
        EXPECT_EQ(e.node_id(), "root");
    }
    EXPECT_THROW(run_graph(g, Tensor({3}, {1.0, 1.0, 1.0})), DimensionError);
}
