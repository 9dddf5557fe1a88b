#include "neon/graph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_set>

#include "neon/common/error.hpp"
#include "neon/rram/hardware_config.hpp"

namespace neon::graph {

namespace {

[[noreturn]] void fail(GraphErrorKind kind, const std::string& id, const std::string& detail) {
    throw GraphError(kind, id, detail);
}

void check_attrs(const GraphNode& n) {
    const auto& op = n.op;
    if (op.tag == OpTag::leaky_relu && !(op.alpha > 0.0 && op.alpha < 1.0)) {
        fail(GraphErrorKind::schema, n.id, "leaky_relu requires 0 < alpha < 1, got " + std::to_string(op.alpha));
    }
    if ((is_grouped(op.tag) || op.tag == OpTag::reshape) && op.dim == 0) {
        fail(GraphErrorKind::schema, n.id, "dim must be positive");
    }
    if (op.tag == OpTag::clamp && !(op.lo <= op.hi)) {
        fail(GraphErrorKind::schema, n.id, "clamp requires lo <= hi");
    }
    const bool weighted = op.tag == OpTag::matmul || op.tag == OpTag::bias_add;
    if (!weighted && !n.weights.empty()) {
        fail(GraphErrorKind::schema, n.id, "op " + std::string(op_name(op.tag)) + " takes no weights");
    }
    if (!n.output_shape.is_valid()) {
        fail(GraphErrorKind::schema, n.id, "invalid output shape " + n.output_shape.to_string());
    }
}

void require_shape(const GraphNode& n, const TensorShape& got, const TensorShape& want, const char* what) {
    if (got != want) {
        fail(GraphErrorKind::shape_mismatch, n.id,
             std::string(what) + " " + got.to_string() + " does not match " + want.to_string());
    }
}

// Input shape implied for the entry node, which reads the graph input.
TensorShape entry_input_shape(const GraphNode& n) {
    switch (n.op.tag) {
        case OpTag::matmul:
            return n.output_shape.with_last(n.fan_in());
        case OpTag::reshape:
        case OpTag::mul_elementwise:
            fail(GraphErrorKind::schema, n.id, "op cannot be the graph entry");
        default:
            return n.output_shape;
    }
}

void check_shapes(const GraphNode& n, const std::vector<TensorShape>& in) {
    const auto& out = n.output_shape;
    switch (n.op.tag) {
        case OpTag::matmul: {
            const std::size_t fan_out = out.last();
            if (n.weights.empty() || n.weights.size() % fan_out != 0) {
                fail(GraphErrorKind::shape_mismatch, n.id,
                     "weight payload of " + std::to_string(n.weights.size()) +
                         " values is not fan_in x " + std::to_string(fan_out));
            }
            const std::size_t fan_in = n.weights.size() / fan_out;
            if (in[0].last() != fan_in) {
                fail(GraphErrorKind::shape_mismatch, n.id,
                     "input width " + std::to_string(in[0].last()) + " does not match weight rows " +
                         std::to_string(fan_in));
            }
            require_shape(n, out, in[0].with_last(fan_out), "output shape");
            return;
        }
        case OpTag::bias_add:
            if (n.weights.size() != out.last()) {
                fail(GraphErrorKind::shape_mismatch, n.id,
                     "bias of " + std::to_string(n.weights.size()) + " values for width " +
                         std::to_string(out.last()));
            }
            require_shape(n, out, in[0], "output shape");
            return;
        case OpTag::mul_elementwise:
            require_shape(n, in[1], in[0], "second operand");
            require_shape(n, out, in[0], "output shape");
            return;
        case OpTag::reshape:
            if (out.element_count() != in[0].element_count() || out.last() != n.op.dim) {
                fail(GraphErrorKind::shape_mismatch, n.id,
                     "cannot reshape " + in[0].to_string() + " to " + out.to_string());
            }
            return;
        case OpTag::softmax:
        case OpTag::squash:
            if (n.op.dim != in[0].last()) {
                fail(GraphErrorKind::shape_mismatch, n.id,
                     "dim " + std::to_string(n.op.dim) + " does not match innermost axis " +
                         std::to_string(in[0].last()));
            }
            break;
        case OpTag::relu:
        case OpTag::leaky_relu:
        case OpTag::sqrt_elementwise:
            if (in[0].last() % n.op.dim != 0) {
                fail(GraphErrorKind::shape_mismatch, n.id, "group width does not divide innermost axis");
            }
            break;
        default:
            break;
    }
    require_shape(n, out, in[0], "output shape");
}

void check_finite(const GraphNode& n, const Tensor& t) {
    for (std::size_t i = 0; i < t.values.size(); ++i) {
        if (!std::isfinite(t.values[i])) {
            fail(GraphErrorKind::numerical, n.id, "non-finite value at element " + std::to_string(i));
        }
    }
}

}  // namespace

std::size_t GraphNode::fan_in() const {
    if (op.tag != OpTag::matmul || output_shape.empty() || output_shape.last() == 0) {
        return 0;
    }
    return weights.size() / output_shape.last();
}

ExecutionGraph ExecutionGraph::build(std::vector<GraphNode> nodes, std::string entry, std::string exit) {
    ExecutionGraph g;
    if (nodes.empty()) {
        if (!entry.empty() || !exit.empty()) {
            fail(GraphErrorKind::schema, entry, "empty graph cannot name entry/exit nodes");
        }
        return g;
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        if (n.id.empty()) {
            fail(GraphErrorKind::schema, "#" + std::to_string(i), "node id must be non-empty");
        }
        if (!g.index_.emplace(n.id, i).second) {
            fail(GraphErrorKind::schema, n.id, "duplicate node id");
        }
    }
    for (const auto& n : nodes) {
        for (const auto& src : n.inputs) {
            if (!g.index_.contains(src)) {
                fail(GraphErrorKind::dangling_input, n.id, "input '" + src + "' does not exist");
            }
        }
    }

    // Kahn's algorithm; ties broken by document order so the order is stable.
    std::vector<std::size_t> indegree(nodes.size(), 0);
    std::vector<std::vector<std::size_t>> succ(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (const auto& src : nodes[i].inputs) {
            succ[g.index_.at(src)].push_back(i);
            ++indegree[i];
        }
    }
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (indegree[i] == 0) {
            ready.push(i);
        }
    }
    while (!ready.empty()) {
        const auto i = ready.top();
        ready.pop();
        g.topo_.push_back(i);
        for (auto s : succ[i]) {
            if (--indegree[s] == 0) {
                ready.push(s);
            }
        }
    }
    if (g.topo_.size() != nodes.size()) {
        std::vector<std::string> on_cycle;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (indegree[i] > 0) {
                on_cycle.push_back(nodes[i].id);
            }
        }
        std::sort(on_cycle.begin(), on_cycle.end());
        std::string ids;
        for (const auto& id : on_cycle) {
            ids += (ids.empty() ? "" : ",") + id;
        }
        fail(GraphErrorKind::cycle, ids, "graph is not acyclic");
    }

    if (!g.index_.contains(entry)) {
        fail(GraphErrorKind::schema, entry, "entry node does not exist");
    }
    if (!g.index_.contains(exit)) {
        fail(GraphErrorKind::schema, exit, "exit node does not exist");
    }
    for (const auto& n : nodes) {
        check_attrs(n);
        const std::size_t arity = n.op.tag == OpTag::mul_elementwise ? 2 : 1;
        if (n.id == entry) {
            if (!n.inputs.empty()) {
                fail(GraphErrorKind::schema, n.id, "entry node must not have inputs");
            }
        } else if (n.inputs.empty()) {
            fail(GraphErrorKind::dangling_input, n.id, "node has no inputs and is not the entry");
        } else if (n.inputs.size() != arity) {
            fail(GraphErrorKind::schema, n.id,
                 "expected " + std::to_string(arity) + " inputs, got " + std::to_string(n.inputs.size()));
        }
    }

    g.nodes_ = std::move(nodes);
    g.entry_ = std::move(entry);
    g.exit_ = std::move(exit);
    g.input_shape_ = entry_input_shape(g.node(g.entry_));
    if (!g.input_shape_.is_valid()) {
        fail(GraphErrorKind::shape_mismatch, g.entry_, "cannot derive graph input shape");
    }
    for (auto i : g.topo_) {
        const auto& n = g.nodes_[i];
        check_shapes(n, g.input_shapes(n));
    }
    return g;
}

std::size_t ExecutionGraph::index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        throw GraphError(GraphErrorKind::schema, id, "no such node");
    }
    return it->second;
}

std::vector<TensorShape> ExecutionGraph::input_shapes(const GraphNode& n) const {
    if (n.id == entry_) {
        return {input_shape_};
    }
    std::vector<TensorShape> shapes;
    shapes.reserve(n.inputs.size());
    for (const auto& src : n.inputs) {
        shapes.push_back(node(src).output_shape);
    }
    return shapes;
}

std::vector<std::string> ExecutionGraph::consumers(const std::string& id) const {
    std::vector<std::string> out;
    for (const auto& n : nodes_) {
        if (std::find(n.inputs.begin(), n.inputs.end(), id) != n.inputs.end()) {
            out.push_back(n.id);
        }
    }
    return out;
}

std::string_view to_string(SupportClass c) {
    switch (c) {
        case SupportClass::crossbar_native: return "crossbar_native";
        case SupportClass::dlc_native: return "dlc_native";
        case SupportClass::identity_rewrite: return "identity_rewrite";
        case SupportClass::transform_candidate: return "transform_candidate";
    }
    return "unknown";
}

SupportClass classify(const OpKind& op, const rram::HardwareConfig& hw) {
    switch (op.tag) {
        case OpTag::matmul:
        case OpTag::bias_add:
            return SupportClass::crossbar_native;
        case OpTag::sigmoid:
            if (hw.supported_dlc_ops.contains(OpTag::sigmoid)) {
                return SupportClass::dlc_native;
            }
            return hw.supported_dlc_ops.contains(OpTag::tanh) ? SupportClass::identity_rewrite
                                                               : SupportClass::transform_candidate;
        default:
            break;
    }
    if (std::find(std::begin(kAllOpTags), std::end(kAllOpTags), op.tag) == std::end(kAllOpTags)) {
        throw GraphError(GraphErrorKind::unknown_op, "", "unknown op kind");
    }
    return hw.supported_dlc_ops.contains(op.tag) ? SupportClass::dlc_native : SupportClass::transform_candidate;
}

std::map<std::string, SupportClass> classify_nodes(const ExecutionGraph& g, const rram::HardwareConfig& hw) {
    std::map<std::string, SupportClass> out;
    for (const auto& n : g.nodes()) {
        out.emplace(n.id, classify(n.op, hw));
    }
    return out;
}

void softmax_inplace(std::vector<double>& v, std::size_t offset, std::size_t width) {
    double peak = v[offset];
    for (std::size_t k = 1; k < width; ++k) {
        peak = std::max(peak, v[offset + k]);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < width; ++k) {
        v[offset + k] = std::exp(v[offset + k] - peak);
        sum += v[offset + k];
    }
    for (std::size_t k = 0; k < width; ++k) {
        v[offset + k] /= sum;
    }
}

void squash_inplace(std::vector<double>& v, std::size_t offset, std::size_t width) {
    double norm2 = 0.0;
    for (std::size_t k = 0; k < width; ++k) {
        norm2 += v[offset + k] * v[offset + k];
    }
    // s(0) = 0 is the limit of the squash map.
    const double factor = norm2 > 0.0 ? std::sqrt(norm2) / (1.0 + norm2) : 0.0;
    for (std::size_t k = 0; k < width; ++k) {
        v[offset + k] *= factor;
    }
}

Tensor evaluate_op(const GraphNode& n, const std::vector<const Tensor*>& inputs) {
    const Tensor& x = *inputs.at(0);
    const auto& op = n.op;
    switch (op.tag) {
        case OpTag::matmul: {
            const std::size_t fan_out = n.output_shape.last();
            const std::size_t fan_in = n.fan_in();
            const std::size_t rows = x.values.size() / fan_in;
            std::vector<double> y(rows * fan_out, 0.0);
            for (std::size_t r = 0; r < rows; ++r) {
                const double* xr = x.values.data() + r * fan_in;
                double* yr = y.data() + r * fan_out;
                for (std::size_t i = 0; i < fan_in; ++i) {
                    const double* wi = n.weights.data() + i * fan_out;
                    for (std::size_t j = 0; j < fan_out; ++j) {
                        yr[j] += xr[i] * wi[j];
                    }
                }
            }
            return Tensor(n.output_shape, std::move(y));
        }
        case OpTag::mul_elementwise: {
            const Tensor& b = *inputs.at(1);
            std::vector<double> y(x.values.size());
            for (std::size_t i = 0; i < y.size(); ++i) {
                y[i] = x.values[i] * b.values[i];
            }
            return Tensor(n.output_shape, std::move(y));
        }
        case OpTag::reshape:
            return Tensor(n.output_shape, x.values);
        default:
            break;
    }

    std::vector<double> y = x.values;
    switch (op.tag) {
        case OpTag::bias_add: {
            const std::size_t width = n.weights.size();
            for (std::size_t i = 0; i < y.size(); ++i) {
                y[i] += n.weights[i % width];
            }
            break;
        }
        case OpTag::tanh:
            for (auto& v : y) v = std::tanh(v);
            break;
        case OpTag::sigmoid:
            for (auto& v : y) v = 1.0 / (1.0 + std::exp(-v));
            break;
        case OpTag::relu:
            for (auto& v : y) v = v > 0.0 ? v : 0.0;
            break;
        case OpTag::leaky_relu:
            for (auto& v : y) v = v > 0.0 ? v : op.alpha * v;
            break;
        case OpTag::sqrt_elementwise:
            for (auto& v : y) v = std::sqrt(v);
            break;
        case OpTag::affine:
            for (auto& v : y) v = op.scale * v + op.shift;
            break;
        case OpTag::clamp:
            for (auto& v : y) v = std::clamp(v, op.lo, op.hi);
            break;
        case OpTag::softmax:
            for (std::size_t off = 0; off < y.size(); off += op.dim) softmax_inplace(y, off, op.dim);
            break;
        case OpTag::squash:
            for (std::size_t off = 0; off < y.size(); off += op.dim) squash_inplace(y, off, op.dim);
            break;
        case OpTag::identity:
            break;
        default:
            throw GraphError(GraphErrorKind::unknown_op, n.id, "no evaluator");
    }
    return Tensor(n.output_shape, std::move(y));
}

std::map<std::string, NodeTrace> execute_reference(const ExecutionGraph& g, const Tensor& input) {
    std::map<std::string, NodeTrace> traces;
    if (g.empty()) {
        return traces;
    }
    if (input.shape != g.input_shape() || input.values.size() != g.input_shape().element_count()) {
        throw DimensionError("graph input " + input.shape.to_string() + " does not match entry shape " +
                             g.input_shape().to_string());
    }
    for (auto i : g.topo_order()) {
        const auto& n = g.nodes()[i];
        NodeTrace trace;
        if (n.id == g.entry()) {
            trace.inputs.push_back(input);
        } else {
            for (const auto& src : n.inputs) {
                trace.inputs.push_back(traces.at(src).output);
            }
        }
        std::vector<const Tensor*> args;
        for (const auto& t : trace.inputs) {
            args.push_back(&t);
        }
        trace.output = evaluate_op(n, args);
        check_finite(n, trace.output);
        traces.emplace(n.id, std::move(trace));
    }
    return traces;
}

Tensor run_graph(const ExecutionGraph& g, const Tensor& input) {
    if (g.empty()) {
        return input;
    }
    if (input.shape != g.input_shape() || input.values.size() != g.input_shape().element_count()) {
        throw DimensionError("graph input " + input.shape.to_string() + " does not match entry shape " +
                             g.input_shape().to_string());
    }
    std::vector<Tensor> values(g.size());
    for (auto i : g.topo_order()) {
        const auto& n = g.nodes()[i];
        std::vector<const Tensor*> args;
        if (n.id == g.entry()) {
            args.push_back(&input);
        } else {
            for (const auto& src : n.inputs) {
                args.push_back(&values[g.index_of(src)]);
            }
        }
        values[i] = evaluate_op(n, args);
        check_finite(n, values[i]);
    }
    return values[g.index_of(g.exit())];
}

}  // namespace neon::graph
