// neon: transform, map and cost graphs with unsupported nonlinear ops.
//
// Exit codes: 0 on success, including flagged results (not_converged,
// infeasible LUT); 1 on a hard error; CLI11's codes on bad usage.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "neon/cli/run_config.hpp"
#include "neon/common/error.hpp"
#include "neon/common/rng.hpp"
#include "neon/cost/cost_model.hpp"
#include "neon/graph/fixtures.hpp"
#include "neon/graph/serialize.hpp"
#include "neon/transform/transform.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace neon;

namespace {

struct Common {
    std::string config;
    std::string out = "out";
    std::uint64_t seed = 0;
    int jobs = 1;
    std::optional<double> epsilon;
    std::optional<std::size_t> xbar_size;
};

void add_common(CLI::App* cmd, Common& c, bool training) {
    cmd->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
    cmd->add_option("--xbar-size", c.xbar_size, "Square crossbar size (overrides config)")->check(CLI::PositiveNumber);
    if (training) {
        cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
        cmd->add_option("--jobs", c.jobs, "Concurrent NEON-Net trainings")->check(CLI::PositiveNumber);
        cmd->add_option("--epsilon", c.epsilon, "Target validation MSE (overrides config)")
            ->check(CLI::PositiveNumber);
    }
}

// Flags win over the config file.
cli::RunConfig resolve(const Common& c) {
    auto j = c.config.empty() ? json::object() : [&] {
        std::ifstream in(c.config);
        return json::parse(in);
    }();
    if (c.xbar_size) {
        j["hardware"]["xbar_rows"] = *c.xbar_size;
        j["hardware"]["xbar_cols"] = *c.xbar_size;
        j["train"]["xbar_size"] = *c.xbar_size;
    }
    if (c.epsilon) j["train"]["epsilon"] = *c.epsilon;
    auto cfg = cli::RunConfig::from_json(j);
    cfg.transform.seed = c.seed;
    cfg.transform.jobs = c.jobs;
    return cfg;
}

class Output {
public:
    Output(const fs::path& dir, cli::RunManifest m) : dir_(dir), manifest_(std::move(m)), hash_(manifest_.hash()) {
        fs::create_directories(dir_);
        auto j = manifest_.to_json();
        j["hash"] = hash_;
        write_text("manifest.json", j.dump(2) + "\n");
    }

    const fs::path& dir() const { return dir_; }
    const std::string& hash() const { return hash_; }

    void write_json(const std::string& name, json j) const {
        j["manifest_hash"] = hash_;
        write_text(name, j.dump(2) + "\n");
    }

    // CSV files open with a comment naming the manifest.
    void write_csv(const std::string& name, const std::string& body) const {
        write_text(name, "# manifest " + hash_ + "\n" + body);
    }

    // Adds the hash to a JSON document some other writer produced.
    void stamp(const fs::path& path) const {
        json j;
        {
            std::ifstream in(path);
            j = json::parse(in);
        }
        j["manifest_hash"] = hash_;
        std::ofstream(path, std::ios::trunc) << j.dump(2) << '\n';
    }

    void write_text(const std::string& name, const std::string& body) const {
        std::ofstream os(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot write " + (dir_ / name).string());
        os << body;
    }

private:
    fs::path dir_;
    cli::RunManifest manifest_;
    std::string hash_;
};

cli::RunManifest manifest(const std::string& sub, std::map<std::string, std::string> inputs, std::uint64_t seed,
                          const cli::RunConfig& cfg, json extra = json::object()) {
    cli::RunManifest m;
    m.subcommand = sub;
    m.inputs = std::move(inputs);
    m.seed = seed;
    m.config = cfg.to_json();
    for (const auto& [k, v] : extra.items()) m.config[k] = v;
    m.version = cli::tool_version();
    return m;
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

int cmd_transform(const std::string& graph_path, const Common& c) {
    const auto cfg = resolve(c);
    const auto g = graph::load_graph(graph_path);
    Output out(c.out, manifest("transform", {{"graph", graph_path}}, c.seed, cfg));
    const auto r = transform::transform_graph(g, cfg.hw, cfg.transform);

    graph::save_graph(r.graph, out.dir() / "transformed.json");
    out.stamp(out.dir() / "transformed.json");
    if (!r.candidates.empty()) fs::create_directories(out.dir() / "neon");
    for (const auto& cand : r.candidates) {
        const auto path = out.dir() / "neon" / (cand.node_id + ".json");
        transform::save_neon_net(cand.neon, path);
        out.stamp(path);
    }
    out.write_json("transform_report.json", transform::transform_report(r));
    // Wall-clock timings differ run to run; kept out of the report.
    out.write_json("timings.json", transform::timings_to_json(r));

    std::size_t flagged = 0;
    for (const auto& cand : r.candidates) {
        std::printf("%-16s %-10s layers %zu  mse %.3g  %s\n", cand.node_id.c_str(),
                    std::string(graph::op_name(cand.neon.replaced_op.tag)).c_str(), cand.neon.report.hidden_layers,
                    cand.neon.report.validation_mse, cand.neon.report.converged ? "converged" : "NOT_CONVERGED");
        flagged += cand.neon.report.converged ? 0 : 1;
    }
    std::printf("%zu candidate(s), %zu not converged; manifest %s\n", r.candidates.size(), flagged,
                out.hash().c_str());
    return 0;
}

int cmd_simulate(const std::string& graph_path, const std::string& original_path, const std::string& arch,
                 const Common& c) {
    const auto cfg = resolve(c);
    const auto g = graph::load_graph(graph_path);
    const auto original = original_path.empty() ? g : graph::load_graph(original_path);
    std::map<std::string, std::string> inputs{{"graph", graph_path}};
    if (!original_path.empty()) inputs["original"] = original_path;
    Output out(c.out, manifest("simulate", inputs, 0, cfg, {{"arch", arch}}));

    if (arch == "all") {
        const auto cmp = cost::compare_configs(original, g, cfg.hw, cfg.catalog, cfg.latency);
        for (auto a : {cost::Arch::dlc, cost::Arch::lut, cost::Arch::neon}) {
            const std::string name(cost::to_string(a));
            out.write_json("cost_" + name + ".json", cost::report_to_json(cmp.of(a)));
            out.write_csv("cost_" + name + ".csv", cost::report_to_csv(cmp.of(a)));
        }
        out.write_json("comparison.json", cost::comparison_to_json(cmp));
        out.write_csv("comparison.csv", cost::comparison_to_csv(cmp));
        std::cout << cost::comparison_to_csv(cmp);
        return 0;
    }
    const auto a = cost::parse_arch(arch);
    const auto r = cost::evaluate(cost::plan_config(a, original, g, cfg.hw), cfg.hw, cfg.catalog, cfg.latency);
    out.write_json("cost_" + arch + ".json", cost::report_to_json(r));
    out.write_csv("cost_" + arch + ".csv", cost::report_to_csv(r));
    std::printf("%s: %ld cycles, %.6g uJ, area %.6g um2, peak %.6g mW, avg %.6g mW\n", arch.c_str(),
                r.latency_cycles, r.energy_uj, r.area_um2, r.peak_power_mw, r.average_power_mw);
    return 0;
}

int cmd_compare(const std::vector<std::string>& graphs, const Common& c) {
    const auto cfg = resolve(c);
    std::map<std::string, std::string> inputs;
    for (std::size_t i = 0; i < graphs.size(); ++i) inputs["graph" + std::to_string(i)] = graphs[i];
    Output out(c.out, manifest("compare", inputs, c.seed, cfg));

    std::vector<cost::Comparison> all;
    json per_graph = json::object();
    std::ostringstream csv;
    csv << "graph,arch,latency_ratio,area_ratio,peak_power_ratio,average_power_ratio,energy_ratio,edp_ratio\n";
    csv.precision(17);
    std::size_t flagged = 0;
    for (const auto& path : graphs) {
        const auto g = graph::load_graph(path);
        const auto r = transform::transform_graph(g, cfg.hw, cfg.transform);
        for (const auto& cand : r.candidates) flagged += cand.neon.report.converged ? 0 : 1;
        auto cmp = cost::compare_configs(g, r.graph, cfg.hw, cfg.catalog, cfg.latency);
        per_graph[stem(path)] = {{"comparison", cost::comparison_to_json(cmp)},
                                 {"transform", transform::transform_report(r)}};
        for (const auto& [arch, row] : cmp.ratios) {
            csv << stem(path) << ',' << arch << ',' << row.at("latency") << ',' << row.at("area") << ','
                << row.at("peak_power") << ',' << row.at("average_power") << ',' << row.at("energy") << ','
                << row.at("edp") << '\n';
        }
        all.push_back(std::move(cmp));
    }
    const auto gm = cost::geomean_ratios(all);
    for (const auto& [arch, row] : gm) {
        csv << "geomean," << arch << ',' << row.at("latency") << ',' << row.at("area") << ','
            << row.at("peak_power") << ',' << row.at("average_power") << ',' << row.at("energy") << ','
            << row.at("edp") << '\n';
    }
    out.write_json("comparison.json", {{"graphs", per_graph}, {"geomean_ratios_vs_dlc", gm},
                                       {"not_converged", flagged}});
    out.write_csv("comparison.csv", csv.str());
    std::cout << csv.str();
    if (gm.contains("neon")) {
        std::printf("geomean NEON speedup over DLC: %.3fx\n", 1.0 / gm.at("neon").at("latency"));
    }
    return 0;
}

int cmd_scaling(const std::vector<std::size_t>& counts, const Common& c) {
    const auto cfg = resolve(c);
    Output out(c.out, manifest("scaling", {}, 0, cfg, {{"counts", counts}}));
    const auto s = cost::operator_scaling_sweep(cfg.hw, cfg.catalog, cfg.latency, counts);
    out.write_json("scaling.json", cost::scaling_to_json(s));
    out.write_csv("scaling.csv", cost::scaling_to_csv(s));
    std::cout << cost::scaling_to_csv(s);
    for (auto b : s.neon_breaks) std::printf("NEON slope break at %zu\n", b);
    return 0;
}

int cmd_gridsearch(const std::string& dataset, const std::string& op_name, std::size_t dim, double alpha,
                   std::size_t samples, const std::vector<std::string>& activations, const Common& c) {
    const auto cfg = resolve(c);
    transform::CaptureDataset data;
    std::map<std::string, std::string> inputs;
    json extra = {{"activations", activations}};
    if (!dataset.empty()) {
        data = transform::load_capture(dataset);
        inputs["dataset"] = dataset;
    } else {
        const auto tag = graph::parse_op(op_name);
        if (!tag) throw Error("unknown op '" + op_name + "'");
        graph::OpKind op{.tag = *tag, .dim = graph::is_grouped(*tag) ? dim : 1, .alpha = alpha};
        data = transform::synthesize_dataset(op, samples, transform::default_mixture(op), derive_seed(c.seed, "grid"));
        extra["dataset"] = {{"op", op_name}, {"attrs", graph::op_attrs_to_json(op)}, {"samples", samples}};
    }
    Output out(c.out, manifest("gridsearch", inputs, c.seed, cfg, extra));
    std::vector<nn::Activation> acts;
    for (const auto& a : activations) acts.push_back(nn::parse_activation(a));
    auto train = cfg.transform.train;
    train.seed = c.seed;
    const auto scores = transform::activation_grid_search(data, acts, train);
    json ranking = json::array();
    std::printf("rank  activation  validation_mse\n");
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const std::string name(nn::to_string(scores[i].activation));
        ranking.push_back({{"rank", i + 1}, {"activation", name}, {"validation_mse", scores[i].validation_mse}});
        std::printf("%4zu  %-10s  %.6g\n", i + 1, name.c_str(), scores[i].validation_mse);
    }
    out.write_json("gridsearch.json", {{"ranking", ranking}});
    return 0;
}

int cmd_fixtures(const std::string& dir, std::uint64_t seed) {
    fs::create_directories(dir);
    graph::save_graph(graph::capsule_mini(seed ? seed : 7), fs::path(dir) / "capsule-mini.json");
    graph::save_graph(graph::attn_mini(seed ? seed + 4 : 11), fs::path(dir) / "attn-mini.json");
    std::printf("wrote capsule-mini and attn-mini to %s\n", dir.c_str());
    return 0;
}

std::vector<std::size_t> parse_counts(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        if (const auto dots = item.find(".."); dots != std::string::npos) {
            // lo..hi expands to the powers of two in between.
            const auto lo = std::stoul(item.substr(0, dots)), hi = std::stoul(item.substr(dots + 2));
            if (lo == 0) throw Error("counts must be positive");
            for (std::size_t n = lo; n <= hi; n *= 2) out.push_back(n);
        } else {
            out.push_back(std::stoul(item));
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NEON: replace unsupported nonlinear ops with crossbar-mapped networks and cost the result"};
    app.require_subcommand(1);
    app.set_version_flag("--version", cli::tool_version());

    Common common;
    std::string graph_path, original_path, arch = "all", dataset, op_name = "softmax", counts = "1..512";
    std::vector<std::string> graphs;
    std::vector<std::string> activations{"tanh", "relu", "sigmoid"};
    std::size_t dim = 64, samples = 50000;
    double alpha = 0.1;
    std::uint64_t fixture_seed = 0;

    auto* t = app.add_subcommand("transform", "Replace every transform candidate with a trained NEON-Net");
    t->add_option("--graph", graph_path, "Graph JSON")->required()->check(CLI::ExistingFile);
    add_common(t, common, true);

    auto* s = app.add_subcommand("simulate", "Map and cost a graph under dlc, lut, neon or all");
    s->add_option("--graph", graph_path, "Graph JSON (transformed for neon)")->required()->check(CLI::ExistingFile);
    s->add_option("--original", original_path, "Untransformed graph for dlc/lut (defaults to --graph)")
        ->check(CLI::ExistingFile);
    s->add_option("--arch", arch, "Configuration")->check(CLI::IsMember({"dlc", "lut", "neon", "all"}));
    add_common(s, common, false);

    auto* c = app.add_subcommand("compare", "Transform, then compare all configurations normalized to dlc");
    c->add_option("--graph", graphs, "Graph JSON (repeatable)")->required()->check(CLI::ExistingFile);
    add_common(c, common, true);

    auto* sc = app.add_subcommand("scaling", "EDP against operator input count");
    sc->add_option("--counts", counts, "Comma list; lo..hi expands to powers of two")->capture_default_str();
    add_common(sc, common, false);

    auto* gs = app.add_subcommand("gridsearch", "Rank hidden activations on one dataset");
    gs->add_option("--dataset", dataset, "Capture manifest (otherwise synthesized)")->check(CLI::ExistingFile);
    gs->add_option("--op", op_name, "Op to synthesize data for")->capture_default_str();
    gs->add_option("--dim", dim, "Invocation width for grouped ops")->capture_default_str();
    gs->add_option("--alpha", alpha, "leaky_relu slope")->capture_default_str();
    gs->add_option("--samples", samples, "Synthesized samples")->capture_default_str();
    gs->add_option("--activations", activations, "Hidden activations to try")->delimiter(',');
    add_common(gs, common, true);

    auto* fx = app.add_subcommand("fixtures", "Write the built-in fixture graphs");
    fx->add_option("--out", common.out, "Output directory")->capture_default_str();
    fx->add_option("--seed", fixture_seed, "Weight seed (0 keeps the defaults)");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*t) return cmd_transform(graph_path, common);
        if (*s) return cmd_simulate(graph_path, original_path, arch, common);
        if (*c) return cmd_compare(graphs, common);
        if (*sc) return cmd_scaling(parse_counts(counts), common);
        if (*gs) return cmd_gridsearch(dataset, op_name, dim, alpha, samples, activations, common);
        if (*fx) return cmd_fixtures(common.out, fixture_seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
