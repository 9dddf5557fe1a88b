#include "neon/transform/fine_tune.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "neon/common/error.hpp"
#include "neon/common/rng.hpp"
#include "neon/graph/fixtures.hpp"
#include "neon/transform/transform.hpp"

namespace neon::transform {

using graph::ExecutionGraph;
using graph::GraphNode;
using graph::OpKind;
using graph::OpTag;

namespace {

std::size_t group_width(const OpKind& op) { return graph::is_grouped(op.tag) ? op.dim : 1; }

// Views a (W x N) batch as (d x N*W/d): one invocation per column.
Eigen::MatrixXd regroup(const Eigen::MatrixXd& x, Eigen::Index d) {
    if (x.size() % d != 0) {
        throw DimensionError("width " + std::to_string(x.rows()) + " is not a multiple of " + std::to_string(d));
    }
    return Eigen::Map<const Eigen::MatrixXd>(x.data(), d, x.size() / d);
}

Eigen::MatrixXd ungroup(const Eigen::MatrixXd& x, Eigen::Index rows) {
    return Eigen::Map<const Eigen::MatrixXd>(x.data(), rows, x.size() / rows);
}

Eigen::MatrixXd run_stage(const Chain::Stage& s, const Eigen::MatrixXd& x) {
    using Kind = Chain::Stage::Kind;
    switch (s.kind) {
        case Kind::dense: {
            Eigen::MatrixXd z = s.layer.weight * x;
            z.colwise() += s.layer.bias;
            return z;
        }
        case Kind::op: {
            const auto d = static_cast<Eigen::Index>(group_width(s.op));
            return ungroup(apply_op(s.op, regroup(x, d)), x.rows());
        }
        case Kind::neon: {
            Eigen::MatrixXd g = regroup(x, s.neon.in_dim());
            g = g.unaryExpr([&](double v) { return clamp(v, s.neon.bounds, BoundSide::input); });
            Eigen::MatrixXd y = nn::forward_batch(s.neon.net, g).output;
            y = y.unaryExpr([&](double v) { return clamp(v, s.neon.bounds, BoundSide::output); });
            return ungroup(y, x.rows());
        }
    }
    return x;
}

}  // namespace

Eigen::MatrixXd LabeledData::one_hot(Eigen::Index classes) const {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(classes, size());
    for (Eigen::Index c = 0; c < size(); ++c) {
        t(labels[static_cast<std::size_t>(c)], c) = 1.0;
    }
    return t;
}

LabeledData gaussian_blobs(std::size_t per_class, int classes, double spread, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "blobs"));
    LabeledData d;
    const auto n = static_cast<Eigen::Index>(per_class) * classes;
    d.inputs.resize(2, n);
    d.labels.resize(static_cast<std::size_t>(n));
    Eigen::Index col = 0;
    for (int k = 0; k < classes; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / classes;
        for (std::size_t i = 0; i < per_class; ++i, ++col) {
            d.inputs(0, col) = 2.0 * std::cos(angle) + rng.normal(0.0, spread);
            d.inputs(1, col) = 2.0 * std::sin(angle) + rng.normal(0.0, spread);
            d.labels[static_cast<std::size_t>(col)] = k;
        }
    }
    return d;
}

Eigen::MatrixXd op_vjp(const OpKind& op, const Eigen::MatrixXd& x_full, const Eigen::MatrixXd& g_full) {
    const auto d = static_cast<Eigen::Index>(group_width(op));
    const Eigen::MatrixXd x = regroup(x_full, d);
    const Eigen::MatrixXd g = regroup(g_full, d);
    Eigen::MatrixXd out(x.rows(), x.cols());
    switch (op.tag) {
        case OpTag::identity:
        case OpTag::reshape:
            out = g;
            break;
        case OpTag::affine:
            out = op.scale * g;
            break;
        case OpTag::clamp:
            out = g.array() * (x.array() >= op.lo && x.array() <= op.hi).cast<double>();
            break;
        case OpTag::tanh: {
            const Eigen::ArrayXXd y = x.array().tanh();
            out = g.array() * (1.0 - y.square());
            break;
        }
        case OpTag::sigmoid: {
            const Eigen::ArrayXXd y = 1.0 / (1.0 + (-x.array()).exp());
            out = g.array() * y * (1.0 - y);
            break;
        }
        case OpTag::relu:
            out = g.array() * (x.array() > 0.0).cast<double>();
            break;
        case OpTag::leaky_relu:
            out = g.array() * (x.array() > 0.0).select(1.0, Eigen::ArrayXXd::Constant(x.rows(), x.cols(), op.alpha));
            break;
        case OpTag::sqrt_elementwise:
            out = g.array() / (2.0 * x.array().sqrt());
            break;
        case OpTag::softmax: {
            const Eigen::MatrixXd y = apply_op(op, x);
            for (Eigen::Index c = 0; c < x.cols(); ++c) {
                const double dot = y.col(c).dot(g.col(c));
                out.col(c) = y.col(c).array() * (g.col(c).array() - dot);
            }
            break;
        }
        case OpTag::squash:
            // s(v) = c(n) v with c(n) = n / (1 + n^2); J = c I + (c'(n) / n) v v^T.
            for (Eigen::Index c = 0; c < x.cols(); ++c) {
                const double n2 = x.col(c).squaredNorm();
                const double n = std::sqrt(n2);
                if (n < 1e-150) {
                    out.col(c).setZero();
                    continue;
                }
                const double coef = n / (1.0 + n2);
                const double dcoef = (1.0 - n2) / ((1.0 + n2) * (1.0 + n2));
                out.col(c) = coef * g.col(c) + (dcoef / n) * x.col(c).dot(g.col(c)) * x.col(c);
            }
            break;
        default:
            throw Error("no Jacobian for op " + std::string(graph::op_name(op.tag)));
    }
    return ungroup(out, x_full.rows());
}

Chain Chain::from_graph(const ExecutionGraph& g, const ExecutionGraph& original) {
    Chain chain;
    const auto& order = g.topo_order();
    for (std::size_t k = 0; k < order.size(); ++k) {
        const GraphNode& n = g.nodes()[order[k]];
        if (n.inputs.size() > 1 || g.consumers(n.id).size() > 1) {
            throw Error("fine-tuning needs a single-path graph; '" + n.id + "' branches");
        }
        Stage s;
        if (n.is_neon_internal()) {
            if (!chain.stages_.empty() && chain.stages_.back().kind == Stage::Kind::neon &&
                chain.stages_.back().id == n.neon_owner) {
                continue;
            }
            s.kind = Stage::Kind::neon;
            s.id = n.neon_owner;
            s.op = original.node(n.neon_owner).op;
            s.neon = extract_neon_net(g, n.neon_owner, s.op);
        } else if (n.op.tag == OpTag::matmul) {
            s.kind = Stage::Kind::dense;
            s.id = n.id;
            const auto fan_out = static_cast<Eigen::Index>(n.output_shape.last());
            const auto fan_in = static_cast<Eigen::Index>(n.fan_in());
            s.layer.weight.resize(fan_out, fan_in);
            for (Eigen::Index i = 0; i < fan_in; ++i) {
                for (Eigen::Index j = 0; j < fan_out; ++j) {
                    s.layer.weight(j, i) = n.weights[static_cast<std::size_t>(i * fan_out + j)];
                }
            }
            s.layer.bias = Eigen::VectorXd::Zero(fan_out);
            if (k + 1 < order.size()) {
                const GraphNode& next = g.nodes()[order[k + 1]];
                if (next.op.tag == OpTag::bias_add && !next.is_neon_internal()) {
                    s.bias_id = next.id;
                    s.layer.bias = Eigen::Map<const Eigen::VectorXd>(next.weights.data(), fan_out);
                    ++k;
                }
            }
        } else if (n.op.tag == OpTag::bias_add || n.op.tag == OpTag::reshape || n.op.tag == OpTag::mul_elementwise) {
            throw Error("fine-tuning cannot treat '" + n.id + "' as a chain stage");
        } else {
            s.kind = Stage::Kind::op;
            s.id = n.id;
            s.op = n.op;
        }
        chain.stages_.push_back(std::move(s));
    }
    return chain;
}

ExecutionGraph Chain::write_back(const ExecutionGraph& g) const {
    std::vector<GraphNode> nodes = g.nodes();
    auto find = [&](const std::string& id) -> GraphNode& { return nodes[g.index_of(id)]; };
    for (const auto& s : stages_) {
        if (s.kind != Stage::Kind::dense) continue;
        GraphNode& m = find(s.id);
        const auto fan_out = s.layer.weight.rows();
        for (Eigen::Index i = 0; i < s.layer.weight.cols(); ++i) {
            for (Eigen::Index j = 0; j < fan_out; ++j) {
                m.weights[static_cast<std::size_t>(i * fan_out + j)] = s.layer.weight(j, i);
            }
        }
        if (!s.bias_id.empty()) {
            find(s.bias_id).weights.assign(s.layer.bias.data(), s.layer.bias.data() + s.layer.bias.size());
        }
    }
    return ExecutionGraph::build(std::move(nodes), g.entry(), g.exit());
}

Eigen::MatrixXd Chain::forward(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd a = x;
    for (const auto& s : stages_) a = run_stage(s, a);
    return a;
}

double Chain::accuracy(const LabeledData& data) const {
    const Eigen::MatrixXd y = forward(data.inputs);
    Eigen::Index hits = 0;
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
        Eigen::Index best = 0;
        y.col(c).maxCoeff(&best);
        hits += best == data.labels[static_cast<std::size_t>(c)];
    }
    return data.size() ? static_cast<double>(hits) / static_cast<double>(data.size()) : 0.0;
}

std::vector<std::size_t> Chain::neighbours_of_neon() const {
    std::vector<std::size_t> out;
    auto add = [&](std::size_t i) {
        if (std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
    };
    for (std::size_t k = 0; k < stages_.size(); ++k) {
        if (stages_[k].kind != Stage::Kind::neon) continue;
        for (std::size_t i = k; i-- > 0;) {
            if (stages_[i].kind == Stage::Kind::dense) {
                add(i);
                break;
            }
        }
        for (std::size_t i = k + 1; i < stages_.size(); ++i) {
            if (stages_[i].kind == Stage::Kind::dense) {
                add(i);
                break;
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> Chain::train(const LabeledData& data, const std::vector<bool>& trainable, int epochs,
                                 const nn::TrainConfig& cfg) {
    if (trainable.size() != stages_.size()) {
        throw DimensionError("trainable mask does not match the chain");
    }
    std::vector<std::size_t> dense;
    nn::FcNet params;
    for (std::size_t k = 0; k < stages_.size(); ++k) {
        if (stages_[k].kind != Stage::Kind::dense) continue;
        dense.push_back(k);
        params.layers.push_back(stages_[k].layer);
        params.layers.back().frozen = !trainable[k];
    }
    auto state = nn::AdamState::for_net(params);
    const Eigen::Index classes = forward(data.inputs.leftCols(1)).rows();
    const Eigen::MatrixXd targets = data.one_hot(classes);

    Rng rng(derive_seed(cfg.seed, "fine-tune"));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(data.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto batch = std::min<Eigen::Index>(cfg.batch_size, data.size());
    std::vector<double> losses;
    std::vector<Eigen::MatrixXd> acts(stages_.size() + 1);
    for (int e = 0; e < epochs; ++e) {
        rng.shuffle(order);
        double total = 0.0;
        for (Eigen::Index lo = 0; lo < data.size(); lo += batch) {
            const Eigen::Index hi = std::min(data.size(), lo + batch);
            const std::vector<Eigen::Index> cols(order.begin() + lo, order.begin() + hi);
            acts[0] = data.inputs(Eigen::all, cols);
            for (std::size_t k = 0; k < stages_.size(); ++k) acts[k + 1] = run_stage(stages_[k], acts[k]);
            const Eigen::MatrixXd t = targets(Eigen::all, cols);
            total += nn::mse(acts.back(), t) * static_cast<double>(hi - lo);

            auto grads = nn::Gradients::zeros_like(params);
            Eigen::MatrixXd g = nn::mse_gradient(acts.back(), t);
            std::size_t p = dense.size();
            for (std::size_t k = stages_.size(); k-- > 0;) {
                const auto& s = stages_[k];
                if (s.kind == Stage::Kind::dense) {
                    --p;
                    grads.weight[p] = g * acts[k].transpose();
                    grads.bias[p] = g.rowwise().sum();
                    g = s.layer.weight.transpose() * g;
                } else {
                    // NEON stages backpropagate through the op they replace.
                    g = op_vjp(s.op, acts[k], g);
                }
            }
            nn::adam_step(params, grads, state, cfg.learning_rate, cfg.weight_decay);
            for (std::size_t i = 0; i < dense.size(); ++i) {
                stages_[dense[i]].layer.weight = params.layers[i].weight;
                stages_[dense[i]].layer.bias = params.layers[i].bias;
            }
        }
        losses.push_back(total / static_cast<double>(data.size()));
    }
    return losses;
}

FineTuneResult fine_tune(const ExecutionGraph& transformed, const ExecutionGraph& original,
                         const LabeledData& train_data, const LabeledData& eval, int epochs,
                         const nn::TrainConfig& cfg) {
    FineTuneResult r;
    r.accuracy_baseline = Chain::from_graph(original, original).accuracy(eval);
    Chain chain = Chain::from_graph(transformed, original);
    r.accuracy_before = chain.accuracy(eval);
    std::vector<bool> mask(chain.stages().size(), false);
    for (auto k : chain.neighbours_of_neon()) {
        mask[k] = true;
        r.unfrozen.push_back(chain.stages()[k].id);
    }
    if (!r.unfrozen.empty()) {
        chain.train(train_data, mask, epochs, cfg);
    }
    r.accuracy_after = chain.accuracy(eval);
    r.graph = chain.write_back(transformed);
    return r;
}

ToyTask make_toy_classifier(std::uint64_t seed) {
    using graph::make_matmul;
    using graph::make_node;
    ToyTask task;
    task.train = gaussian_blobs(200, 3, 0.9, derive_seed(seed, "train"));
    task.test = gaussian_blobs(200, 3, 0.9, derive_seed(seed, "test"));

    std::vector<GraphNode> nodes;
    nodes.push_back(make_matmul("fc0", {}, {1, 8}, 2, seed));
    nodes.push_back(make_node("fc0_b", OpKind::of(OpTag::bias_add), {"fc0"}, {1, 8}));
    nodes.back().weights.assign(8, 0.0);
    nodes.push_back(make_node("act0", OpKind::of(OpTag::tanh), {"fc0_b"}, {1, 8}));
    nodes.push_back(make_matmul("fc1", {"act0"}, {1, 8}, 8, seed));
    nodes.push_back(make_node("fc1_b", OpKind::of(OpTag::bias_add), {"fc1"}, {1, 8}));
    nodes.back().weights.assign(8, 0.0);
    nodes.push_back(make_node("squash", OpKind::squash(8), {"fc1_b"}, {1, 8}));
    nodes.push_back(make_matmul("fc2", {"squash"}, {1, 3}, 8, seed));
    nodes.push_back(make_node("fc2_b", OpKind::of(OpTag::bias_add), {"fc2"}, {1, 3}));
    nodes.back().weights.assign(3, 0.0);
    nodes.push_back(make_node("softmax", OpKind::softmax(3), {"fc2_b"}, {1, 3}));
    const auto untrained = ExecutionGraph::build(std::move(nodes), "fc0", "softmax");

    Chain chain = Chain::from_graph(untrained, untrained);
    nn::TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.batch_size = 32;
    cfg.weight_decay = 0.0;
    cfg.seed = seed;
    chain.train(task.train, std::vector<bool>(chain.stages().size(), true), 150, cfg);
    task.graph = chain.write_back(untrained);
    return task;
}

}  // namespace neon::transform
