// Acceptance criteria, one PASS/FAIL line each. Exit status is the number
// of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>

#include "neon/common/rng.hpp"
#include "neon/cost/cost_model.hpp"
#include "neon/graph/fixtures.hpp"
#include "neon/nn/fc_net.hpp"
#include "neon/rram/mapping.hpp"
#include "neon/transform/fine_tune.hpp"
#include "neon/transform/transform.hpp"

using namespace neon;
using namespace neon::graph;
using Clock = std::chrono::steady_clock;

namespace {

const rram::HardwareConfig hw;
const cost::ComponentCatalog catalog = cost::ComponentCatalog::defaults();
const cost::LatencyModel model;
constexpr std::uint64_t kSeed = 2024;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, const char* title, const std::function<Outcome()>& check) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("threw: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct Fixture {
    std::string name;
    ExecutionGraph original;
    ExecutionGraph transformed;
};

std::vector<Fixture> transformed_fixtures() {
    transform::TransformOptions opts;
    opts.seed = kSeed;
    opts.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::vector<Fixture> out;
    for (auto [name, g] : {std::pair{"capsule-mini", capsule_mini()}, std::pair{"attn-mini", attn_mini()}}) {
        out.push_back({name, g, transform::transform_graph(g, hw, opts).graph});
    }
    return out;
}

Outcome dlc_static_power() {
    auto g = ExecutionGraph::build({make_node("sm", OpKind::softmax(1152), {}, {1, 1152})}, "sm", "sm");
    auto wide = model;
    wide.dlc_lanes = 576;
    const auto r = cost::evaluate(cost::plan_config(cost::Arch::dlc, g, g, hw), hw, catalog, wide);
    const double w = r.unit_power_mw / 1e3;
    return {std::abs(w - 19.76) <= 0.01, fmt("%.5f W from 576 exp + 576 div units, target 19.76 +- 0.01 W", w)};
}

Outcome lut_footprint() {
    const auto fp = rram::lut_footprint(1, hw);
    const double per_lut = 2880.0 * 1024 * 1024 / 23040;
    return {fp.bytes == 131072.0 && per_lut == 131072.0 && fp.feasible,
            fmt("%.0f bytes, 2880 MB / 23040 LUTs = %.0f bytes", fp.bytes, per_lut)};
}

Outcome structure_reproduction() {
    bool ok = true;
    std::string detail;
    for (const auto& op : {OpKind::softmax(64), OpKind::leaky_relu(0.1), OpKind::squash(8)}) {
        const auto data = transform::synthesize_dataset(op, 50000, transform::default_mixture(op),
                                                        derive_seed(kSeed, op_name(op.tag)));
        auto cfg = transform::op_profile(op);
        cfg.seed = kSeed;
        const auto n = transform::grow_structure(data, cfg);
        const auto width = n.net.layers.front().weight.rows();
        const bool pass = n.report.converged && n.report.hidden_layers == 1 && width == 128 &&
                          n.report.validation_mse <= cfg.epsilon && n.report.seconds <= 600.0;
        ok = ok && pass;
        detail += fmt("%s%s: %zu x %ld, MSE %.3g <= %.0e in %.0f s", detail.empty() ? "" : "; ",
                      std::string(op_name(op.tag)).c_str(), n.report.hidden_layers, static_cast<long>(width),
                      n.report.validation_mse, cfg.epsilon, n.report.seconds);
    }
    return {ok, detail};
}

Outcome grid_search_ordering() {
    const auto op = OpKind::softmax(64);
    const auto data = transform::synthesize_dataset(op, 50000, transform::default_mixture(op),
                                                    derive_seed(kSeed, "grid"));
    auto cfg = nn::TrainConfig::desk();
    cfg.seed = kSeed;
    const auto t0 = Clock::now();
    const auto scores = transform::activation_grid_search(
        data, {nn::Activation::tanh, nn::Activation::relu, nn::Activation::sigmoid}, cfg);
    std::map<nn::Activation, double> mse;
    for (const auto& s : scores) mse[s.activation] = s.validation_mse;
    const double t = seconds_since(t0);
    const auto tanh = mse.at(nn::Activation::tanh), relu = mse.at(nn::Activation::relu),
               sigm = mse.at(nn::Activation::sigmoid);
    return {tanh < relu && relu < sigm && t <= 900.0,
            fmt("tanh %.3g, relu %.3g, sigmoid %.3g, expected tanh < relu < sigmoid", tanh, relu, sigm)};
}

Outcome operator_scaling() {
    std::vector<std::size_t> counts;
    for (std::size_t n = 1; n <= 512; n *= 2) counts.push_back(n);
    const auto s = cost::operator_scaling_sweep(hw, catalog, model, counts);
    double worst_dlc = 0.0, worst_neon = 0.0;
    for (std::size_t i = 1; i < s.points.size(); ++i) {
        worst_dlc = std::max(worst_dlc, std::abs(s.points[i].dlc_edp / s.points[i - 1].dlc_edp / 2.0 - 1.0));
        if (s.points[i].count <= 128) {
            worst_neon = std::max(worst_neon, s.points[i].neon_edp / s.points[i - 1].neon_edp);
        }
    }
    const bool pass = worst_dlc <= 0.01 && worst_neon < 2.0 && s.neon_breaks == std::vector<std::size_t>{128};
    std::string breaks;
    for (auto b : s.neon_breaks) breaks += (breaks.empty() ? "" : ",") + std::to_string(b);
    return {pass, fmt("DLC doubling off by %.2g, NEON max doubling ratio below 128 = %.3f, NEON slope breaks {%s}",
                      worst_dlc, worst_neon, breaks.c_str())};
}

Outcome sigmoid_identity() {
    auto node = make_node("s", OpKind::of(OpTag::sigmoid), {}, {1, 100000});
    const auto g = ExecutionGraph::build({node}, "s", "s");
    const auto rewritten = transform::rewrite_sigmoid(g);
    Rng rng(derive_seed(kSeed, "sigmoid"));
    std::vector<double> x(100000);
    for (auto& v : x) v = rng.uniform(-20.0, 20.0);
    const auto y = run_graph(rewritten, Tensor({1, 100000}, x));
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        worst = std::max(worst, std::abs(y.values[i] - 1.0 / (1.0 + std::exp(-x[i]))));
    }
    return {worst <= 1e-12, fmt("max |rewrite - sigmoid| = %.3g over 1e5 points", worst)};
}

Outcome fine_tune_recovery() {
    auto task = transform::make_toy_classifier(kSeed);
    const auto& g = task.graph;
    const auto pool = transform::gaussian_blobs(5000, 3, 0.9, derive_seed(kSeed, "capture"));
    std::vector<Tensor> inputs;
    for (Eigen::Index i = 0; i < pool.size(); ++i) {
        inputs.emplace_back(TensorShape{1, 2}, std::vector<double>{pool.inputs(0, i), pool.inputs(1, i)});
    }
    auto cfg = nn::TrainConfig::desk();
    cfg.seed = kSeed;
    ExecutionGraph t = g, squash_only;
    double squash_mse = 0.0;
    for (const auto& id : transform::delineate(g, hw)) {
        const auto neon = transform::grow_structure(transform::capture(g, id, inputs), cfg);
        t = transform::apply_replacement(t, id, neon);
        if (id == "squash") {
            squash_only = transform::apply_replacement(g, id, neon);
            squash_mse = neon.report.validation_mse;
        }
    }
    auto ft = cfg;
    ft.learning_rate = 1e-3;
    ft.batch_size = 32;
    const auto r = transform::fine_tune(t, g, task.train, task.test, 10, ft);
    const double squash_acc = transform::Chain::from_graph(squash_only, g).accuracy(task.test);
    const bool pass = std::abs(r.accuracy_after - r.accuracy_baseline) <= 0.02 && squash_acc == r.accuracy_baseline;
    return {pass, fmt("baseline %.4f, transformed %.4f, fine-tuned %.4f; squash alone (MSE %.2g) %.4f",
                      r.accuracy_baseline, r.accuracy_before, r.accuracy_after, squash_mse, squash_acc)};
}

Outcome init_energy(const std::vector<Fixture>& fixtures) {
    bool ok = true;
    std::string detail;
    for (const auto& f : fixtures) {
        const auto r = cost::evaluate(cost::plan_config(cost::Arch::neon, f.original, f.transformed, hw), hw,
                                      catalog, model);
        const double share = r.init_energy_uj / r.energy_uj;
        ok = ok && r.init_energy_uj > 0.0 && share < 0.10;
        detail += fmt("%s%s %.2f%%", detail.empty() ? "" : ", ", f.name.c_str(), 100.0 * share);
    }
    return {ok, "init / inference energy: " + detail + ", bound 10%"};
}

Outcome directions(const std::vector<Fixture>& fixtures) {
    bool ok = true;
    std::string detail;
    for (const auto& f : fixtures) {
        const auto c = cost::compare_configs(f.original, f.transformed, hw, catalog, model);
        const auto& n = c.ratios.at("neon");
        const bool pass = c.neon.latency_cycles < c.dlc.latency_cycles && c.neon.area_um2 > c.dlc.area_um2 &&
                          c.neon.average_power_mw > c.dlc.average_power_mw && c.lut.area_um2 > c.neon.area_um2;
        ok = ok && pass;
        detail += fmt("%s%s NEON/DLC speedup %.2fx area %.2fx power %.2fx energy %.2fx, LUT/NEON area %.2fx",
                      detail.empty() ? "" : "; ", f.name.c_str(), 1.0 / n.at("latency"), n.at("area"),
                      n.at("average_power"), n.at("energy"), c.lut.area_um2 / c.neon.area_um2);
    }
    return {ok, detail};
}

Outcome properties(const std::vector<Fixture>& fixtures) {
    std::vector<std::string> bad;
    // Gradient against central differences.
    {
        auto net = nn::FcNet::xavier({3, 5, 2}, nn::Activation::tanh, nn::Activation::linear, kSeed);
        Rng rng(kSeed);
        Eigen::MatrixXd x(3, 4), y(2, 4);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
        for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
        auto loss = [&](const nn::FcNet& n) { return nn::mse(nn::forward_batch(n, x).output, y); };
        const auto cache = nn::forward_batch(net, x);
        const auto grads = nn::backward(net, cache, nn::mse_gradient(cache.output, y));
        double worst = 0.0;
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            for (Eigen::Index k = 0; k < net.layers[l].weight.size(); ++k) {
                auto p = net, m = net;
                const double h = 1e-6;
                p.layers[l].weight.data()[k] += h;
                m.layers[l].weight.data()[k] -= h;
                const double fd = (loss(p) - loss(m)) / (2 * h);
                const double an = grads.weight[l].data()[k];
                worst = std::max(worst, std::abs(fd - an) / std::max(1e-3, std::abs(an)));
            }
        }
        if (worst > 1e-6) bad.push_back(fmt("gradient rel err %.2g", worst));
    }
    for (const auto& f : fixtures) {
        // Fixpoint: a transformed graph has nothing left to transform.
        if (!transform::delineate(f.transformed, hw).empty()) bad.push_back(f.name + " not a fixpoint");
        // Bit-slice round trip.
        const auto plan = rram::map_graph(f.transformed, hw);
        rram::check_plan(plan, hw);
        for (const auto& [id, nm] : plan.nodes) {
            const auto& node = f.transformed.node(id);
            const GraphNode* bias = nm.bias_node.empty() ? nullptr : &f.transformed.node(nm.bias_node);
            if (rram::reconstruct_kernels(plan, id, hw) !=
                rram::quantize_kernels(rram::unroll_kernels(node, bias), nm.frac_bits, hw.value_bits)) {
                bad.push_back(f.name + ":" + id + " round trip");
            }
        }
        // Clamp idempotence on every NEON-Net.
        for (const auto& n : f.transformed.nodes()) {
            if (n.op.tag != OpTag::clamp) continue;
            for (double v : {-1e3, -1.0, 0.0, 0.3, 1e3}) {
                const double once = std::clamp(v, n.op.lo, n.op.hi);
                if (std::clamp(once, n.op.lo, n.op.hi) != once) bad.push_back(n.id + " clamp");
            }
        }
        for (auto a : {cost::Arch::dlc, cost::Arch::lut, cost::Arch::neon}) {
            const auto p = cost::plan_config(a, f.original, f.transformed, hw);
            cost::check_schedule(cost::schedule(p, hw, catalog, model), p.graph);
            const auto r = cost::evaluate(p, hw, catalog, model);
            double sum = 0.0;
            for (const auto& n : r.nodes) sum += n.energy_uj;
            if (std::abs(sum - r.energy_uj) > 1e-9 * r.energy_uj) bad.push_back(f.name + " energy additivity");
            if (cost::report_to_json(r) != cost::report_to_json(cost::evaluate(p, hw, catalog, model))) {
                bad.push_back(f.name + " report determinism");
            }
        }
    }
    std::string detail = "gradient, bit-slice round trip, clamp idempotence, fixpoint, energy additivity, "
                         "schedule correctness, determinism";
    for (const auto& b : bad) detail += "; broken: " + b;
    return {bad.empty(), detail};
}

}  // namespace

int main() {
    report(1, "DLC static power", dlc_static_power);
    report(2, "LUT footprint", lut_footprint);
    report(3, "NEON-Net structure", structure_reproduction);
    report(4, "activation grid search", grid_search_ordering);
    report(5, "operator scaling", operator_scaling);
    report(6, "sigmoid identity", sigmoid_identity);
    report(7, "fine-tuning recovery", fine_tune_recovery);
    const auto t0 = Clock::now();
    const auto fixtures = transformed_fixtures();
    std::printf("(fixtures transformed in %.1f s)\n", seconds_since(t0));
    report(8, "initialization energy", [&] { return init_energy(fixtures); });
    report(9, "directional ratios", [&] { return directions(fixtures); });
    report(10, "property suites", [&] { return properties(fixtures); });
    return failures;
}
