#include "neon/transform/transform.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "neon/common/error.hpp"
#include "neon/common/rng.hpp"
#include "neon/graph/fixtures.hpp"
#include "neon/graph/serialize.hpp"

namespace neon::transform {

using graph::ExecutionGraph;
using graph::GraphNode;
using graph::OpKind;
using graph::OpTag;
using graph::SupportClass;
using graph::Tensor;
using graph::TensorShape;

namespace {

// Invocation width: the vector an op consumes in one call.
std::size_t invocation_width(const OpKind& op) { return graph::is_grouped(op.tag) ? op.dim : 1; }

// Replaces `target` by `chain`. chain.front() takes over target's inputs and
// chain.back() must carry target's id.
ExecutionGraph splice(const ExecutionGraph& g, const std::string& target, std::vector<GraphNode> chain) {
    const GraphNode& old = g.node(target);
    chain.front().inputs = old.inputs;
    std::vector<GraphNode> nodes;
    nodes.reserve(g.size() + chain.size());
    for (const auto& n : g.nodes()) {
        if (n.id == target) {
            nodes.insert(nodes.end(), chain.begin(), chain.end());
        } else {
            nodes.push_back(n);
        }
    }
    const std::string entry = g.entry() == target ? chain.front().id : g.entry();
    return ExecutionGraph::build(std::move(nodes), entry, g.exit());
}

}  // namespace

std::vector<std::string> delineate(const ExecutionGraph& g, const rram::HardwareConfig& hw) {
    std::vector<std::string> out;
    for (auto i : g.topo_order()) {
        const auto& n = g.nodes()[i];
        if (!n.is_neon_internal() && graph::classify(n.op, hw) == SupportClass::transform_candidate) {
            out.push_back(n.id);
        }
    }
    return out;
}

std::vector<std::string> identity_rewrites(const ExecutionGraph& g, const rram::HardwareConfig& hw) {
    std::vector<std::string> out;
    for (auto i : g.topo_order()) {
        const auto& n = g.nodes()[i];
        if (graph::classify(n.op, hw) == SupportClass::identity_rewrite) {
            out.push_back(n.id);
        }
    }
    return out;
}

ExecutionGraph rewrite_sigmoid(const ExecutionGraph& g) {
    ExecutionGraph out = g;
    for (const auto& n : g.nodes()) {
        if (n.op.tag != OpTag::sigmoid) {
            continue;
        }
        // sigmoid(z) = (tanh(z / 2) + 1) / 2
        std::vector<GraphNode> chain;
        chain.push_back(graph::make_node(n.id + "/half", OpKind::affine(0.5, 0.0), {}, n.output_shape));
        chain.push_back(graph::make_node(n.id + "/tanh", OpKind::of(OpTag::tanh), {n.id + "/half"}, n.output_shape));
        chain.push_back(graph::make_node(n.id, OpKind::affine(0.5, 0.5), {n.id + "/tanh"}, n.output_shape));
        out = splice(out, n.id, std::move(chain));
    }
    return out;
}

std::size_t repeat_count(const ExecutionGraph& g, const std::string& node_id) {
    const auto& n = g.node(node_id);
    return n.output_shape.element_count() / invocation_width(n.op);
}

CaptureDataset capture(const ExecutionGraph& g, const std::string& node_id, const std::vector<Tensor>& samples) {
    const auto& n = g.node(node_id);
    if (n.inputs.size() > 1) {
        throw Error("capture supports single-input ops; '" + node_id + "' has " + std::to_string(n.inputs.size()));
    }
    const std::size_t d = invocation_width(n.op);
    const std::size_t per_run = repeat_count(g, node_id);
    CaptureDataset data;
    data.source = node_id;
    data.op = n.op;
    const auto total = static_cast<Eigen::Index>(per_run * samples.size());
    data.inputs.resize(static_cast<Eigen::Index>(d), total);
    data.outputs.resize(static_cast<Eigen::Index>(d), total);
    Eigen::Index col = 0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        std::map<std::string, graph::NodeTrace> trace;
        try {
            trace = graph::execute_reference(g, samples[s]);
        } catch (const GraphError& e) {
            throw Error("capture aborted at sample " + std::to_string(s) + ": " + e.what());
        }
        const auto& t = trace.at(node_id);
        const auto& x = t.inputs.at(0).values;
        const auto& y = t.output.values;
        for (std::size_t k = 0; k < per_run; ++k, ++col) {
            for (std::size_t i = 0; i < d; ++i) {
                data.inputs(static_cast<Eigen::Index>(i), col) = x[k * d + i];
                data.outputs(static_cast<Eigen::Index>(i), col) = y[k * d + i];
            }
        }
    }
    return data;
}

Eigen::MatrixXd apply_op(const OpKind& op, const Eigen::MatrixXd& x) {
    const auto d = static_cast<std::size_t>(x.rows());
    const auto n = static_cast<std::size_t>(x.cols());
    if (x.size() == 0) {
        return x;
    }
    // Column-major d x n is the same memory as row-major n x d.
    GraphNode node = graph::make_node("op", op, {}, {n, d});
    Tensor in({n, d}, std::vector<double>(x.data(), x.data() + x.size()));
    const Tensor y = graph::evaluate_op(node, {&in});
    return Eigen::Map<const Eigen::MatrixXd>(y.values.data(), x.rows(), x.cols());
}

MixtureSpec default_mixture(const OpKind& op) {
    MixtureSpec m;
    switch (op.tag) {
        case OpTag::softmax:
            m.center_mean = 0.3;
            m.center_std = 0.7;
            m.within_std = 0.3;
            break;
        case OpTag::squash:
            m.center_mean = 0.3;
            m.center_std = 0.5;
            m.within_std = 0.1;
            break;
        default:
            m.center_mean = 0.0;
            m.center_std = 1.0;
            m.within_std = 1.0;
            break;
    }
    return m;
}

nn::TrainConfig op_profile(const OpKind& op) {
    auto cfg = nn::TrainConfig::desk();
    if (op.tag == OpTag::squash) {
        cfg.epsilon = 1e-6;
        cfg.num_epochs = 300;
    }
    return cfg;
}

CaptureDataset synthesize_dataset(const OpKind& op, std::size_t samples, const MixtureSpec& mix, std::uint64_t seed) {
    if (mix.components <= 0 || mix.center_std < 0.0 || mix.within_std < 0.0) {
        throw Error("invalid mixture spec");
    }
    const auto d = static_cast<Eigen::Index>(invocation_width(op));
    Rng rng(derive_seed(seed, "mixture"));
    Eigen::MatrixXd centers(d, mix.components);
    for (Eigen::Index k = 0; k < centers.cols(); ++k) {
        for (Eigen::Index i = 0; i < d; ++i) centers(i, k) = rng.normal(mix.center_mean, mix.center_std);
    }
    CaptureDataset data;
    data.source = std::string(graph::op_name(op.tag));
    data.op = op;
    data.inputs.resize(d, static_cast<Eigen::Index>(samples));
    for (Eigen::Index c = 0; c < data.inputs.cols(); ++c) {
        const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(mix.components)));
        for (Eigen::Index i = 0; i < d; ++i) data.inputs(i, c) = rng.normal(centers(i, k), mix.within_std);
    }
    if (op.tag == OpTag::sqrt_elementwise) {
        data.inputs = data.inputs.cwiseAbs();
    }
    data.outputs = apply_op(op, data.inputs);
    return data;
}

NeonNet grow_structure(const CaptureDataset& data, const nn::TrainConfig& cfg) {
    cfg.validate();
    if (data.size() == 0) {
        throw Error("cannot grow a NEON-Net from an empty dataset");
    }
    nn::Dataset ds{data.inputs, data.outputs};
    const auto [train_set, validation] = nn::split_dataset(ds, cfg.validation_fraction, cfg.seed);

    NeonNet out;
    out.replaced_op = data.op;
    out.bounds = extract_bounds(data);
    for (int depth = 1;; ++depth) {
        std::vector<Eigen::Index> dims{data.inputs.rows()};
        dims.insert(dims.end(), static_cast<std::size_t>(depth), cfg.xbar_size);
        dims.push_back(data.outputs.rows());
        // A fresh net also means a fresh optimizer: train_split builds its own state.
        out.net = nn::FcNet::xavier(dims, nn::Activation::tanh, nn::Activation::linear,
                                    derive_seed(cfg.seed, "init/" + std::to_string(depth)));
        const auto r = nn::train_split(out.net, train_set, validation, cfg);
        out.report.hidden_layers = static_cast<std::size_t>(depth);
        out.report.validation_mse = r.validation_mse;
        out.report.epochs_run += r.epochs_run;
        out.report.seconds += r.seconds;
        if (r.validation_mse <= cfg.epsilon) {
            out.report.converged = true;
            break;
        }
        if (depth >= cfg.max_layers) {
            out.report.converged = false;
            break;
        }
    }
    return out;
}

std::vector<ActivationScore> activation_grid_search(const CaptureDataset& data,
                                                    const std::vector<nn::Activation>& candidates,
                                                    const nn::TrainConfig& cfg) {
    cfg.validate();
    nn::Dataset ds{data.inputs, data.outputs};
    const auto [train_set, validation] = nn::split_dataset(ds, cfg.validation_fraction, cfg.seed);
    std::vector<ActivationScore> out;
    for (auto a : candidates) {
        auto net = nn::FcNet::xavier({data.inputs.rows(), cfg.xbar_size, data.outputs.rows()}, a,
                                     nn::Activation::linear, derive_seed(cfg.seed, "init/1"));
        out.push_back({a, nn::train_split(net, train_set, validation, cfg).validation_mse});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ActivationScore& x, const ActivationScore& y) { return x.validation_mse < y.validation_mse; });
    return out;
}

ExecutionGraph apply_replacement(const ExecutionGraph& g, const std::string& node_id, const NeonNet& neon) {
    const GraphNode& old = g.node(node_id);
    if (old.is_neon_internal()) {
        throw Error("'" + node_id + "' belongs to a NEON-Net and is never replaced");
    }
    if (old.inputs.size() > 1) {
        throw Error("cannot replace multi-input node '" + node_id + "'");
    }
    const std::size_t d = invocation_width(old.op);
    if (static_cast<std::size_t>(neon.in_dim()) != d || static_cast<std::size_t>(neon.out_dim()) != d) {
        throw DimensionError("NEON-Net is " + std::to_string(neon.in_dim()) + " -> " + std::to_string(neon.out_dim()) +
                             " but '" + node_id + "' is invoked on width " + std::to_string(d));
    }
    neon.net.validate();

    const TensorShape full = old.output_shape;
    const bool regroup = full.last() != d;
    if (regroup && node_id == g.entry()) {
        throw Error("cannot regroup the graph entry '" + node_id + "'");
    }
    auto shape_for = [&](std::size_t width) {
        return regroup ? TensorShape{full.element_count() / d, width} : full.with_last(width);
    };

    std::vector<GraphNode> chain;
    auto push = [&](std::string suffix, OpKind op, TensorShape shape, std::vector<double> weights = {}) {
        GraphNode n = graph::make_node(node_id + "/" + suffix, op, {}, std::move(shape));
        if (!chain.empty()) n.inputs = {chain.back().id};
        n.weights = std::move(weights);
        n.neon_owner = node_id;
        n.dedicated_subarray = true;
        chain.push_back(std::move(n));
    };

    if (regroup) push("regroup", OpKind::reshape(d), shape_for(d));
    push("clamp_in", OpKind::clamp(neon.bounds.input_min, neon.bounds.input_max), shape_for(d));
    for (std::size_t k = 0; k < neon.net.layers.size(); ++k) {
        const auto& l = neon.net.layers[k];
        const auto in = static_cast<std::size_t>(l.in_dim());
        const auto out = static_cast<std::size_t>(l.out_dim());
        std::vector<double> w(in * out);
        for (std::size_t i = 0; i < in; ++i) {
            for (std::size_t j = 0; j < out; ++j) {
                w[i * out + j] = l.weight(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
            }
        }
        const std::string tag = std::to_string(k);
        push("fc" + tag, OpKind::of(OpTag::matmul), shape_for(out), std::move(w));
        push("bias" + tag, OpKind::of(OpTag::bias_add), shape_for(out),
             std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size()));
        switch (l.activation) {
            case nn::Activation::linear:
                break;
            case nn::Activation::tanh:
                push("tanh" + tag, OpKind::of(OpTag::tanh), shape_for(out));
                break;
            default:
                throw Error("NEON-Net layers must be tanh or linear, got " + std::string(nn::to_string(l.activation)));
        }
    }
    push("clamp_out", OpKind::clamp(neon.bounds.output_min, neon.bounds.output_max), shape_for(d));
    if (regroup) push("ungroup", OpKind::reshape(full.last()), full);
    chain.back().id = node_id;
    return splice(g, node_id, std::move(chain));
}

NeonNet extract_neon_net(const ExecutionGraph& g, const std::string& owner, const OpKind& replaced) {
    NeonNet out;
    out.replaced_op = replaced;
    bool seen_clamp = false;
    for (auto i : g.topo_order()) {
        const auto& n = g.nodes()[i];
        if (n.neon_owner != owner) {
            continue;
        }
        switch (n.op.tag) {
            case OpTag::clamp:
                if (!seen_clamp) {
                    out.bounds.input_min = n.op.lo;
                    out.bounds.input_max = n.op.hi;
                    seen_clamp = true;
                } else {
                    out.bounds.output_min = n.op.lo;
                    out.bounds.output_max = n.op.hi;
                }
                break;
            case OpTag::matmul: {
                nn::Layer l;
                const auto fan_out = static_cast<Eigen::Index>(n.output_shape.last());
                const auto fan_in = static_cast<Eigen::Index>(n.fan_in());
                l.weight.resize(fan_out, fan_in);
                for (Eigen::Index r = 0; r < fan_in; ++r) {
                    for (Eigen::Index c = 0; c < fan_out; ++c) {
                        l.weight(c, r) = n.weights[static_cast<std::size_t>(r * fan_out + c)];
                    }
                }
                l.bias = Eigen::VectorXd::Zero(fan_out);
                out.net.layers.push_back(std::move(l));
                break;
            }
            case OpTag::bias_add:
                out.net.layers.back().bias = Eigen::Map<const Eigen::VectorXd>(
                    n.weights.data(), static_cast<Eigen::Index>(n.weights.size()));
                break;
            case OpTag::tanh:
                out.net.layers.back().activation = nn::Activation::tanh;
                break;
            default:
                break;
        }
    }
    if (out.net.layers.empty()) {
        throw Error("graph holds no NEON-Net for '" + owner + "'");
    }
    out.net.validate();
    out.report.hidden_layers = out.net.hidden_layers();
    return out;
}

std::vector<Tensor> sample_graph_inputs(const ExecutionGraph& g, std::size_t count, double stddev,
                                        std::uint64_t seed) {
    Rng rng(derive_seed(seed, "graph-inputs"));
    std::vector<Tensor> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        Tensor t = Tensor::zeros(g.input_shape());
        for (auto& v : t.values) v = rng.normal(0.0, stddev);
        out.push_back(std::move(t));
    }
    return out;
}

TransformResult transform_graph(const ExecutionGraph& g, const rram::HardwareConfig& hw, const TransformOptions& opts) {
    opts.train.validate();
    TransformResult result;
    result.identity_rewrites = identity_rewrites(g, hw);
    ExecutionGraph work = result.identity_rewrites.empty() ? g : rewrite_sigmoid(g);
    const auto ids = delineate(work, hw);
    result.candidates.resize(ids.size());

    auto run = [&](std::size_t k) {
        const auto& id = ids[k];
        const std::size_t per_run = repeat_count(work, id);
        const std::size_t runs = (opts.capture_samples + per_run - 1) / per_run;
        const auto inputs = sample_graph_inputs(work, runs, opts.input_std, derive_seed(opts.seed, id));
        const auto data = capture(work, id, inputs);
        nn::TrainConfig cfg = opts.train;
        cfg.seed = derive_seed(opts.seed, id);
        result.candidates[k] = {id, grow_structure(data, cfg), static_cast<std::size_t>(data.size())};
    };

    const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(opts.jobs, 1)), 1,
                                                        std::max<std::size_t>(ids.size(), 1));
    if (workers <= 1) {
        for (std::size_t k = 0; k < ids.size(); ++k) run(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(ids.size());
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < ids.size(); k = next++) {
                    try {
                        run(k);
                    } catch (...) {
                        errors[k] = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    // Rewrites stay sequential and in delineation order.
    for (const auto& c : result.candidates) {
        work = apply_replacement(work, c.node_id, c.neon);
    }
    result.graph = std::move(work);
    return result;
}

nlohmann::json transform_report(const TransformResult& r) {
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : r.candidates) {
        cands.push_back({
            {"node", c.node_id},
            {"op", graph::op_name(c.neon.replaced_op.tag)},
            {"attrs", graph::op_attrs_to_json(c.neon.replaced_op)},
            {"dims", {{"in", c.neon.in_dim()}, {"out", c.neon.out_dim()}}},
            {"hidden_layers", c.neon.report.hidden_layers},
            {"mse_validation", c.neon.report.validation_mse},
            {"epochs_run", c.neon.report.epochs_run},
            {"samples", c.samples},
            {"bounds", bounds_to_json(c.neon.bounds)},
            {"converged", c.neon.report.converged},
        });
    }
    return {{"candidates", cands}, {"identity_rewrites", r.identity_rewrites}};
}

nlohmann::json timings_to_json(const TransformResult& r) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& c : r.candidates) out[c.node_id] = {{"training_seconds", c.neon.report.seconds}};
    return out;
}

}  // namespace neon::transform
