#include "neon/cost/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "neon/common/error.hpp"
#include "neon/transform/transform.hpp"

namespace neon::cost {

using graph::ExecutionGraph;
using graph::GraphNode;
using graph::OpTag;
using nlohmann::json;

std::string_view to_string(Arch a) {
    switch (a) {
        case Arch::dlc: return "dlc";
        case Arch::lut: return "lut";
        case Arch::neon: return "neon";
    }
    return "unknown";
}

Arch parse_arch(std::string_view s) {
    if (s == "dlc") return Arch::dlc;
    if (s == "lut") return Arch::lut;
    if (s == "neon") return Arch::neon;
    throw Error("unknown architecture '" + std::string(s) + "' (expected dlc, lut or neon)");
}

ComponentCatalog ComponentCatalog::defaults() {
    ComponentCatalog c;
    c.entries = {
        {"subarray", {24.08, 13120.0}},
        {"bank", {360.79, 484940.0}},
        {"exp_unit", {7.424, 5017.0}},
        {"div_sqrt_unit", {26.88, 23869.0}},
        {"multiplier", {0.0047, 236.0}},
        // No published figure: stands in with the exponent unit's numbers.
        {"tanh_unit", {7.424, 5017.0}},
    };
    return c;
}

const ComponentSpec& ComponentCatalog::at(const std::string& name) const {
    auto it = entries.find(name);
    if (it == entries.end()) {
        throw Error("component catalog has no entry '" + name + "'");
    }
    return it->second;
}

void ComponentCatalog::validate() const {
    for (const char* name : {"subarray", "bank", "exp_unit", "div_sqrt_unit", "multiplier", "tanh_unit"}) {
        const auto& e = at(name);
        if (!(e.power_mw > 0.0) || !(e.area_um2 > 0.0)) {
            throw Error(std::string("component '") + name + "' needs positive power and area");
        }
    }
}

json ComponentCatalog::to_json() const {
    json j = json::object();
    for (const auto& [name, e] : entries) j[name] = {{"power_mw", e.power_mw}, {"area_um2", e.area_um2}};
    return j;
}

ComponentCatalog ComponentCatalog::from_json(const json& j) {
    ComponentCatalog c = defaults();
    for (const auto& [name, e] : j.items()) {
        auto& slot = c.entries[name];
        slot.power_mw = e.value("power_mw", slot.power_mw);
        slot.area_um2 = e.value("area_um2", slot.area_um2);
    }
    c.validate();
    return c;
}

double ComponentCatalog::fixed_function_mean_mw() const {
    return (at("exp_unit").power_mw + at("div_sqrt_unit").power_mw + at("multiplier").power_mw) / 3.0;
}

long LatencyModel::crossbar_op_cycles(std::size_t active_cols, std::size_t slices, const rram::HardwareConfig& hw) const {
    const auto adc = static_cast<long>((active_cols + hw.adc_per_subarray - 1) / hw.adc_per_subarray);
    return hw.input_cycles() + adc + static_cast<long>(slices) * shift_add_per_slice;
}

long LatencyModel::lut_access_cycles(std::size_t table_subarrays) const {
    return lut_base_cycles + lut_per_subarray_cycles * static_cast<long>(table_subarrays > 0 ? table_subarrays - 1 : 0);
}

void LatencyModel::validate() const {
    for (int v : {exp_cycles, div_cycles, sqrt_cycles, mul_cycles, tanh_cycles, clamp_cycles, lut_base_cycles,
                  dlc_lanes, vector_lanes, subarrays_per_bank}) {
        if (v < 1) throw Error("latency model entries must be at least 1");
    }
    if (shift_add_per_slice < 0 || lut_per_subarray_cycles < 0) {
        throw Error("latency model entries must be non-negative");
    }
}

#define NEON_LATENCY_FIELDS(X)                                                                                    \
    X(shift_add_per_slice) X(exp_cycles) X(div_cycles) X(sqrt_cycles) X(mul_cycles) X(tanh_cycles) X(clamp_cycles) \
        X(lut_base_cycles) X(lut_per_subarray_cycles) X(dlc_lanes) X(vector_lanes) X(subarrays_per_bank)

json LatencyModel::to_json() const {
    json j;
#define X(f) j[#f] = f;
    NEON_LATENCY_FIELDS(X)
#undef X
    return j;
}

LatencyModel LatencyModel::from_json(const json& j) {
    LatencyModel m;
#define X(f) m.f = j.value(#f, m.f);
    NEON_LATENCY_FIELDS(X)
#undef X
    m.validate();
    return m;
}

#undef NEON_LATENCY_FIELDS

ConfigPlan plan_config(Arch arch, const ExecutionGraph& original, const ExecutionGraph& transformed,
                       const rram::HardwareConfig& hw) {
    ConfigPlan p;
    p.arch = arch;
    if (arch == Arch::neon) {
        p.graph = transformed;
        p.mapping = rram::map_graph(p.graph, hw);
    } else {
        p.graph = transform::identity_rewrites(original, hw).empty() ? original : transform::rewrite_sigmoid(original);
        p.mapping = rram::map_graph(p.graph, hw, true);
    }
    return p;
}

namespace {

struct Phase {
    std::vector<std::string> resources;
    long cycles = 0;
};

// Builds resources lazily and the per-node phase lists.
class Router {
public:
    Router(const ConfigPlan& plan, const rram::HardwareConfig& hw, const ComponentCatalog& cat, const LatencyModel& m)
        : plan_(plan), hw_(hw), cat_(cat), m_(m) {
        for (const auto& t : plan.mapping.tiles) {
            add("tile:" + std::to_string(t.id), "subarray", 1.0, 1.0);
        }
        subarrays_ = plan.mapping.tiles.size();
        const auto& ns = plan.graph.nodes();
        // Every configuration carries the multiplier; NEON-Nets add one tanh unit.
        if (!ns.empty()) shared("multiplier");
        if (plan.arch == Arch::neon &&
            std::any_of(ns.begin(), ns.end(), [](const GraphNode& n) { return n.is_neon_internal(); })) {
            shared("tanh_unit");
        }
    }

    std::vector<Phase> route(const GraphNode& n) {
        const std::size_t elems = n.output_shape.element_count();
        const std::size_t width = graph::is_grouped(n.op.tag) ? n.op.dim : 1;
        const std::size_t calls = elems / width;
        const long vl = m_.vector_lanes;
        auto vec = [&](std::size_t count, long cycles) { return static_cast<long>((count + vl - 1) / vl) * cycles; };

        if (plan_.mapping.fused_bias.contains(n.id)) {
            return {};
        }
        if (auto it = plan_.mapping.nodes.find(n.id); it != plan_.mapping.nodes.end()) {
            Phase p;
            long per_mvm = 0;
            for (auto t : it->second.tiles) {
                p.resources.push_back("tile:" + std::to_string(t));
                per_mvm = std::max(per_mvm, m_.crossbar_op_cycles(plan_.mapping.tiles[t].occupied_cols,
                                                                  it->second.slices, hw_));
            }
            const std::size_t fan_out = n.output_shape.last();
            p.cycles = static_cast<long>(elems / fan_out) * per_mvm;
            return {p};
        }
        const auto cls = graph::classify(n.op, hw_);
        if (cls != graph::SupportClass::transform_candidate || n.is_neon_internal()) {
            switch (n.op.tag) {
                case OpTag::tanh:
                    return {{{shared("tanh_unit")}, vec(elems, m_.tanh_cycles)}};
                case OpTag::affine:
                case OpTag::mul_elementwise:
                    return {{{shared("multiplier")}, vec(elems, m_.mul_cycles)}};
                case OpTag::clamp:
                    return {{{shared("multiplier")}, vec(elems, m_.clamp_cycles)}};
                case OpTag::identity:
                case OpTag::reshape:
                    return {};
                default:
                    break;
            }
            if (cls == graph::SupportClass::dlc_native && n.op.tag != OpTag::matmul && n.op.tag != OpTag::bias_add) {
                // A supported op without a dedicated cost entry runs on the multiplier.
                return {{{shared("multiplier")}, vec(elems, m_.mul_cycles)}};
            }
            throw Error("node '" + n.id + "' (" + std::string(graph::op_name(n.op.tag)) + ") is not routable");
        }
        if (plan_.arch == Arch::neon) {
            throw Error("node '" + n.id + "' (" + std::string(graph::op_name(n.op.tag)) +
                        ") is not routable under neon: no NEON-Net replaces it");
        }
        return plan_.arch == Arch::dlc ? route_dlc(n, elems, calls) : route_lut(n, elems, calls);
    }

    const std::vector<Resource>& resources() const { return resources_; }
    std::size_t subarrays() const { return subarrays_; }

private:
    void add(const std::string& id, const std::string& kind, double count, double active_count) {
        if (index_.contains(id)) return;
        const auto& e = cat_.at(kind);
        index_.insert(id);
        resources_.push_back({id, kind, e.power_mw * active_count, e.area_um2 * count, e.power_mw * count});
    }

    std::string shared(const std::string& kind) {
        add(kind, kind, 1.0, 1.0);
        return kind;
    }

    std::string unit(const GraphNode& n, const std::string& kind) {
        const std::string id = "dlc:" + n.id + ":" + kind;
        add(id, kind, m_.dlc_lanes, m_.dlc_lanes);
        return id;
    }

    long lanes(std::size_t count, long cycles) const {
        return static_cast<long>((count + m_.dlc_lanes - 1) / m_.dlc_lanes) * cycles;
    }

    std::vector<Phase> route_dlc(const GraphNode& n, std::size_t elems, std::size_t calls) {
        switch (n.op.tag) {
            case OpTag::softmax:
            case OpTag::sigmoid:
                return {{{unit(n, "exp_unit")}, lanes(elems, m_.exp_cycles)},
                        {{unit(n, "div_sqrt_unit")}, lanes(elems, m_.div_cycles)}};
            case OpTag::squash:
                return {{{unit(n, "multiplier")}, lanes(elems, m_.mul_cycles)},
                        {{unit(n, "div_sqrt_unit")}, lanes(calls, m_.sqrt_cycles)},
                        {{unit(n, "div_sqrt_unit")}, lanes(calls, m_.div_cycles)},
                        {{unit(n, "multiplier")}, lanes(elems, m_.mul_cycles)}};
            case OpTag::relu:
            case OpTag::leaky_relu:
                return {{{unit(n, "multiplier")}, lanes(elems, m_.mul_cycles)}};
            case OpTag::sqrt_elementwise:
                return {{{unit(n, "div_sqrt_unit")}, lanes(elems, m_.sqrt_cycles)}};
            default:
                throw Error("no digital logic decomposition for '" + n.id + "'");
        }
    }

    std::string table(const GraphNode& n, const std::string& fn) {
        const std::string id = "lut:" + n.id + ":" + fn;
        if (!index_.contains(id)) {
            const auto s = static_cast<std::size_t>(rram::lut_footprint(1, hw_).subarrays);
            // The whole table is powered; a lookup walks one subarray at a time.
            add(id, "subarray", static_cast<double>(s), 1.0);
            table_size_[id] = s;
            subarrays_ += s;
        }
        return id;
    }

    Phase lookup(const GraphNode& n, const std::string& fn, std::size_t count) {
        const std::string id = table(n, fn);
        return {{id}, static_cast<long>(count) * m_.lut_access_cycles(table_size_.at(id))};
    }

    std::vector<Phase> route_lut(const GraphNode& n, std::size_t elems, std::size_t calls) {
        const long vl = m_.vector_lanes;
        const Phase mul{{shared("multiplier")}, static_cast<long>((elems + vl - 1) / vl) * m_.mul_cycles};
        switch (n.op.tag) {
            case OpTag::softmax:
                return {lookup(n, "exp", elems), lookup(n, "recip", calls), mul};
            case OpTag::squash:
                return {mul, lookup(n, "sqrt", calls), lookup(n, "recip", calls), mul};
            case OpTag::relu:
            case OpTag::leaky_relu:
            case OpTag::sqrt_elementwise:
            case OpTag::sigmoid:
                return {lookup(n, std::string(graph::op_name(n.op.tag)), elems)};
            default:
                throw Error("no lookup-table decomposition for '" + n.id + "'");
        }
    }

    const ConfigPlan& plan_;
    const rram::HardwareConfig& hw_;
    const ComponentCatalog& cat_;
    const LatencyModel& m_;
    std::vector<Resource> resources_;
    std::set<std::string> index_;
    std::map<std::string, std::size_t> table_size_;
    std::size_t subarrays_ = 0;
};

double interval_energy_uj(double power_mw, long cycles, const rram::HardwareConfig& hw) {
    return power_mw * static_cast<double>(cycles) * hw.cycle_ns * 1e-6;  // mW * ns = pJ
}

}  // namespace

Schedule schedule(const ConfigPlan& plan, const rram::HardwareConfig& hw, const ComponentCatalog& catalog,
                  const LatencyModel& model) {
    hw.validate();
    catalog.validate();
    model.validate();
    Schedule s;
    const auto& g = plan.graph;
    if (g.empty()) {
        return s;
    }
    Router router(plan, hw, catalog, model);
    std::map<std::string, long> free_at;
    std::map<std::string, long> done;
    for (auto i : g.topo_order()) {
        const auto& n = g.nodes()[i];
        const auto phases = router.route(n);
        long start = 0;
        for (const auto& in : n.inputs) start = std::max(start, done.at(in));
        for (const auto& p : phases) {
            for (const auto& r : p.resources) start = std::max(start, free_at[r]);
        }
        long t = start;
        for (const auto& p : phases) {
            for (const auto& r : p.resources) {
                if (p.cycles > 0) s.intervals.push_back({r, n.id, t, t + p.cycles});
            }
            t += p.cycles;
        }
        for (const auto& p : phases) {
            for (const auto& r : p.resources) free_at[r] = t;
        }
        done[n.id] = t;
        s.nodes.push_back({n.id, start, t});
        s.makespan = std::max(s.makespan, t);
    }
    s.resources = router.resources();
    const std::size_t banks = (router.subarrays() + model.subarrays_per_bank - 1) / model.subarrays_per_bank;
    for (std::size_t b = 0; b < banks; ++b) {
        const auto& e = catalog.at("bank");
        const std::string id = "bank:" + std::to_string(b);
        s.resources.push_back({id, "bank", e.power_mw, e.area_um2, e.power_mw});
        if (s.makespan > 0) s.intervals.push_back({id, "<bank>", 0, s.makespan});
    }
    return s;
}

void check_schedule(const Schedule& s, const ExecutionGraph& g) {
    std::map<std::string, std::vector<std::pair<long, long>>> by_resource;
    for (const auto& iv : s.intervals) {
        if (iv.end < iv.start) throw Error("interval on '" + iv.resource + "' ends before it starts");
        by_resource[iv.resource].emplace_back(iv.start, iv.end);
    }
    for (auto& [r, ivs] : by_resource) {
        std::sort(ivs.begin(), ivs.end());
        for (std::size_t i = 1; i < ivs.size(); ++i) {
            if (ivs[i].first < ivs[i - 1].second) {
                throw Error("resource '" + r + "' is double-booked at cycle " + std::to_string(ivs[i].first));
            }
        }
    }
    std::map<std::string, NodeTiming> t;
    for (const auto& n : s.nodes) t[n.node] = n;
    for (const auto& n : g.nodes()) {
        for (const auto& in : n.inputs) {
            if (t.at(n.id).start < t.at(in).end) {
                throw Error("node '" + n.id + "' starts before its input '" + in + "' finishes");
            }
        }
    }
}

double init_energy(const rram::MappingPlan& plan, const rram::HardwareConfig& hw, const ComponentCatalog& catalog) {
    const double cells = static_cast<double>(hw.xbar_rows * hw.xbar_cols);
    const double read_uj = interval_energy_uj(catalog.at("subarray").power_mw, 1, hw) / cells;
    return static_cast<double>(plan.occupied_cells(rram::TileRole::neon_net)) * read_uj * hw.write_read_energy_ratio;
}

CostReport evaluate(const ConfigPlan& plan, const rram::HardwareConfig& hw, const ComponentCatalog& catalog,
                    const LatencyModel& model) {
    const Schedule s = schedule(plan, hw, catalog, model);
    CostReport r;
    r.arch = plan.arch;
    r.latency_cycles = s.makespan;
    r.latency_s = static_cast<double>(s.makespan) * hw.cycle_ns * 1e-9;

    std::map<std::string, const Resource*> res;
    for (const auto& x : s.resources) {
        res[x.id] = &x;
        r.area_um2 += x.area_um2;
        r.instantiated_power_mw += x.static_mw;
        if (x.kind == "subarray") {
            r.subarrays += static_cast<std::size_t>(std::llround(x.area_um2 / catalog.at("subarray").area_um2));
        } else if (x.kind == "bank") {
            ++r.banks;
        } else {
            r.unit_power_mw += x.static_mw;
        }
        r.components[x.kind] += x.kind == "subarray"
                                    ? static_cast<std::size_t>(std::llround(x.area_um2 / catalog.at("subarray").area_um2))
                                    : static_cast<std::size_t>(std::llround(x.static_mw / catalog.at(x.kind).power_mw));
    }

    std::map<std::string, double> node_energy;
    std::vector<std::pair<long, double>> events;
    for (const auto& iv : s.intervals) {
        const double p = res.at(iv.resource)->power_mw;
        node_energy[iv.node] += interval_energy_uj(p, iv.end - iv.start, hw);
        events.emplace_back(iv.start, p);
        events.emplace_back(iv.end, -p);
    }
    // Ends sort before starts at the same cycle: back-to-back use is not overlap.
    std::sort(events.begin(), events.end());
    double live = 0.0;
    for (const auto& [t, dp] : events) {
        live += dp;
        r.peak_power_mw = std::max(r.peak_power_mw, live);
    }

    for (const auto& nt : s.nodes) {
        const auto& n = plan.graph.node(nt.node);
        r.nodes.push_back({nt.node, std::string(graph::op_name(n.op.tag)), nt.start, nt.end, node_energy[nt.node]});
    }
    if (node_energy.contains("<bank>")) {
        r.nodes.push_back({"<bank>", "bank", 0, s.makespan, node_energy["<bank>"]});
    }
    for (const auto& nc : r.nodes) r.energy_uj += nc.energy_uj;
    r.average_power_mw = r.latency_s > 0 ? r.energy_uj * 1e-6 / r.latency_s * 1e3 : 0.0;
    r.edp_uj_s = r.energy_uj * r.latency_s;
    if (plan.arch == Arch::neon) {
        r.init_energy_uj = init_energy(plan.mapping, hw, catalog);
    }
    return r;
}

const CostReport& Comparison::of(Arch a) const {
    switch (a) {
        case Arch::dlc: return dlc;
        case Arch::lut: return lut;
        case Arch::neon: return neon;
    }
    return dlc;
}

namespace {

std::map<std::string, double> metrics(const CostReport& r) {
    return {{"latency", static_cast<double>(r.latency_cycles)},
            {"area", r.area_um2},
            {"peak_power", r.peak_power_mw},
            {"average_power", r.average_power_mw},
            {"energy", r.energy_uj},
            {"edp", r.edp_uj_s}};
}

double ratio(double a, double b) {
    if (a == b) return 1.0;  // includes 0 / 0 for an empty graph
    return b != 0.0 ? a / b : std::numeric_limits<double>::infinity();
}

}  // namespace

Comparison compare_configs(const ExecutionGraph& original, const ExecutionGraph& transformed,
                           const rram::HardwareConfig& hw, const ComponentCatalog& catalog, const LatencyModel& model) {
    Comparison c;
    c.dlc = evaluate(plan_config(Arch::dlc, original, transformed, hw), hw, catalog, model);
    c.lut = evaluate(plan_config(Arch::lut, original, transformed, hw), hw, catalog, model);
    c.neon = evaluate(plan_config(Arch::neon, original, transformed, hw), hw, catalog, model);
    c.fixed_function_mean_mw = catalog.fixed_function_mean_mw();
    const auto base = metrics(c.dlc);
    for (Arch a : {Arch::dlc, Arch::lut, Arch::neon}) {
        auto& row = c.ratios[std::string(to_string(a))];
        for (const auto& [k, v] : metrics(c.of(a))) row[k] = ratio(v, base.at(k));
    }
    return c;
}

std::map<std::string, std::map<std::string, double>> geomean_ratios(const std::vector<Comparison>& cs) {
    std::map<std::string, std::map<std::string, double>> out;
    if (cs.empty()) return out;
    for (const auto& c : cs) {
        for (const auto& [arch, row] : c.ratios) {
            for (const auto& [k, v] : row) out[arch][k] += std::log(v);
        }
    }
    for (auto& [arch, row] : out) {
        for (auto& [k, v] : row) v = std::exp(v / static_cast<double>(cs.size()));
    }
    return out;
}

std::vector<std::size_t> slope_breaks(const std::vector<std::size_t>& counts, const std::vector<double>& edp,
                                      double tol) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < counts.size(); ++i) {
        const double before = edp[i] / edp[i - 1];
        const double after = edp[i + 1] / edp[i];
        if (after > before * (1.0 + tol)) out.push_back(counts[i]);
    }
    return out;
}

ScalingCurve operator_scaling_sweep(const rram::HardwareConfig& hw, const ComponentCatalog& catalog,
                                    const LatencyModel& model, const std::vector<std::size_t>& counts) {
    hw.validate();
    catalog.validate();
    model.validate();
    if (!std::is_sorted(counts.begin(), counts.end()) || (!counts.empty() && counts.front() == 0)) {
        throw Error("operator counts must be positive and ascending");
    }
    const double cyc_s = hw.cycle_ns * 1e-9;
    const auto& sub = catalog.at("subarray");
    ScalingCurve curve;
    for (std::size_t n : counts) {
        ScalingPoint p;
        p.count = n;
        // N exp + N div units side by side: delay fixed, energy linear in N.
        const long dlc_cycles = model.exp_cycles + model.div_cycles;
        const double dlc_e = static_cast<double>(n) *
                             (interval_energy_uj(catalog.at("exp_unit").power_mw, model.exp_cycles, hw) +
                              interval_energy_uj(catalog.at("div_sqrt_unit").power_mw, model.div_cycles, hw));
        p.dlc_edp = dlc_e * static_cast<double>(dlc_cycles) * cyc_s;

        // N wordlines: one more subarray each time the rows run out.
        const auto subs = static_cast<double>((n + hw.xbar_rows - 1) / hw.xbar_rows);
        const long mvm = model.crossbar_op_cycles(std::min<std::size_t>(hw.xbar_cols, hw.columns_per_kernel()),
                                                  static_cast<std::size_t>(hw.columns_per_kernel()), hw);
        const long neon_cycles = mvm + model.tanh_cycles;
        const double neon_e = subs * interval_energy_uj(sub.power_mw, mvm, hw) +
                              interval_energy_uj(catalog.at("tanh_unit").power_mw, model.tanh_cycles, hw);
        p.neon_edp = neon_e * static_cast<double>(neon_cycles) * cyc_s;

        const auto fp = rram::lut_footprint(n, hw);
        p.lut_bytes = fp.bytes;
        if (fp.feasible) {
            const long lut_cycles = model.lut_access_cycles(static_cast<std::size_t>(fp.subarrays));
            p.lut_edp = interval_energy_uj(sub.power_mw, lut_cycles, hw) * static_cast<double>(lut_cycles) * cyc_s;
        }
        curve.points.push_back(p);
    }
    std::vector<double> dlc, neon;
    for (const auto& p : curve.points) {
        dlc.push_back(p.dlc_edp);
        neon.push_back(p.neon_edp);
    }
    curve.dlc_breaks = slope_breaks(counts, dlc);
    curve.neon_breaks = slope_breaks(counts, neon);
    return curve;
}

json report_to_json(const CostReport& r) {
    json nodes = json::array();
    for (const auto& n : r.nodes) {
        nodes.push_back({{"node", n.node}, {"op", n.op}, {"start_cycle", n.start}, {"end_cycle", n.end},
                         {"energy_uj", n.energy_uj}});
    }
    return {{"arch", to_string(r.arch)},
            {"latency_cycles", r.latency_cycles},
            {"latency_s", r.latency_s},
            {"area_um2", r.area_um2},
            {"peak_power_mw", r.peak_power_mw},
            {"average_power_mw", r.average_power_mw},
            {"instantiated_power_mw", r.instantiated_power_mw},
            {"unit_power_mw", r.unit_power_mw},
            {"energy_uj", r.energy_uj},
            {"edp_uj_s", r.edp_uj_s},
            {"init_energy_uj", r.init_energy_uj},
            {"subarrays", r.subarrays},
            {"banks", r.banks},
            {"components", r.components},
            {"nodes", nodes}};
}

std::string report_to_csv(const CostReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << "node,op,start_cycle,end_cycle,energy_uj\n";
    for (const auto& n : r.nodes) {
        os << n.node << ',' << n.op << ',' << n.start << ',' << n.end << ',' << n.energy_uj << '\n';
    }
    return os.str();
}

json comparison_to_json(const Comparison& c) {
    return {{"reports", {report_to_json(c.dlc), report_to_json(c.lut), report_to_json(c.neon)}},
            {"ratios_vs_dlc", c.ratios},
            {"catalog_fixed_function_mean_mw", c.fixed_function_mean_mw}};
}

std::string comparison_to_csv(const Comparison& c) {
    std::ostringstream os;
    os.precision(17);
    os << "arch,latency_cycles,area_um2,peak_power_mw,average_power_mw,energy_uj,edp_uj_s,init_energy_uj\n";
    for (Arch a : {Arch::dlc, Arch::lut, Arch::neon}) {
        const auto& r = c.of(a);
        os << to_string(a) << ',' << r.latency_cycles << ',' << r.area_um2 << ',' << r.peak_power_mw << ','
           << r.average_power_mw << ',' << r.energy_uj << ',' << r.edp_uj_s << ',' << r.init_energy_uj << '\n';
    }
    return os.str();
}

json scaling_to_json(const ScalingCurve& s) {
    json pts = json::array();
    for (const auto& p : s.points) {
        pts.push_back({{"count", p.count},
                       {"dlc_edp_uj_s", p.dlc_edp},
                       {"neon_edp_uj_s", p.neon_edp},
                       {"lut_edp_uj_s", p.lut_edp ? json(*p.lut_edp) : json(nullptr)},
                       {"lut_bytes", p.lut_bytes},
                       {"lut_feasible", p.lut_edp.has_value()}});
    }
    return {{"points", pts}, {"dlc_slope_breaks", s.dlc_breaks}, {"neon_slope_breaks", s.neon_breaks}};
}

std::string scaling_to_csv(const ScalingCurve& s) {
    std::ostringstream os;
    os.precision(17);
    os << "count,arch,edp_uj_s,feasible\n";
    for (const auto& p : s.points) {
        os << p.count << ",dlc," << p.dlc_edp << ",1\n";
        os << p.count << ",neon," << p.neon_edp << ",1\n";
        os << p.count << ",lut,";
        if (p.lut_edp) {
            os << *p.lut_edp << ",1\n";
        } else {
            os << ",0\n";
        }
    }
    return os.str();
}

}  // namespace neon::cost
