#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "neon/graph/graph.hpp"
#include "neon/rram/hardware_config.hpp"
#include "neon/rram/mapping.hpp"

namespace neon::cost {

enum class Arch { dlc, lut, neon };

std::string_view to_string(Arch a);
Arch parse_arch(std::string_view s);

struct ComponentSpec {
    double power_mw = 0.0;
    double area_um2 = 0.0;
};

/// Power and area per component. Names: subarray, bank, exp_unit,
/// div_sqrt_unit, multiplier, tanh_unit.
struct ComponentCatalog {
    std::map<std::string, ComponentSpec> entries;

    static ComponentCatalog defaults();
    const ComponentSpec& at(const std::string& name) const;
    /// Throws neon::Error unless every entry is strictly positive.
    void validate() const;
    /// Mean power of the exponent, division/sqrt and multiplier units.
    double fixed_function_mean_mw() const;

    nlohmann::json to_json() const;
    static ComponentCatalog from_json(const nlohmann::json& j);
};

/// Cycle counts. None of these are measured values; they are configuration.
struct LatencyModel {
    int shift_add_per_slice = 1;
    int exp_cycles = 10;
    int div_cycles = 20;
    int sqrt_cycles = 20;
    int mul_cycles = 4;
    int tanh_cycles = 8;
    int clamp_cycles = 1;
    int lut_base_cycles = 2;
    int lut_per_subarray_cycles = 2;
    // Scalar lanes per fixed-function unit the DLC baseline gives each op.
    int dlc_lanes = 1;
    // Width of the shared vector units (tanh, multiplier/comparator).
    int vector_lanes = 16;
    int subarrays_per_bank = 64;

    /// One matrix-vector product on one tile: input cycles, ADC cycles for
    /// the active columns, shift-and-add per slice.
    long crossbar_op_cycles(std::size_t active_cols, std::size_t slices, const rram::HardwareConfig& hw) const;
    long lut_access_cycles(std::size_t table_subarrays) const;

    void validate() const;
    nlohmann::json to_json() const;
    static LatencyModel from_json(const nlohmann::json& j);
};

/// One instantiated hardware component.
struct Resource {
    std::string id;
    std::string kind;      // catalog name
    double power_mw = 0;   // while active
    double area_um2 = 0;
    double static_mw = 0;  // instantiated (all-on) power
};

struct Interval {
    std::string resource;
    std::string node;
    long start = 0;
    long end = 0;
};

struct NodeTiming {
    std::string node;
    long start = 0;
    long end = 0;
};

struct Schedule {
    std::vector<Resource> resources;
    std::vector<Interval> intervals;  // component activations
    std::vector<NodeTiming> nodes;    // topological order
    long makespan = 0;
};

struct ConfigPlan {
    Arch arch = Arch::neon;
    graph::ExecutionGraph graph;  // what executes: transformed for NEON, sigmoid-rewritten otherwise
    rram::MappingPlan mapping;
};

/// DLC and LUT execute `original` (after the sigmoid identity rewrite)
/// with candidates on fixed-function units or LUT tiles; NEON executes
/// `transformed`. Throws if NEON is asked for and `transformed` still has
/// candidates.
ConfigPlan plan_config(Arch arch, const graph::ExecutionGraph& original, const graph::ExecutionGraph& transformed,
                       const rram::HardwareConfig& hw);

/// Dependency-respecting list schedule in topological order; a node starts
/// once its inputs are done and every resource it needs is free.
/// Throws neon::Error for an op the configuration cannot route.
Schedule schedule(const ConfigPlan& plan, const rram::HardwareConfig& hw, const ComponentCatalog& catalog,
                  const LatencyModel& model);

/// Throws if a resource is double-booked or a node starts before an input ends.
void check_schedule(const Schedule& s, const graph::ExecutionGraph& g);

struct NodeCost {
    std::string node;
    std::string op;
    long start = 0;
    long end = 0;
    double energy_uj = 0.0;
};

struct CostReport {
    Arch arch = Arch::neon;
    long latency_cycles = 0;
    double latency_s = 0.0;
    double area_um2 = 0.0;
    double peak_power_mw = 0.0;
    double average_power_mw = 0.0;
    double instantiated_power_mw = 0.0;  // every component on
    double unit_power_mw = 0.0;          // fixed-function units only
    double energy_uj = 0.0;
    double edp_uj_s = 0.0;
    double init_energy_uj = 0.0;
    std::size_t subarrays = 0;
    std::size_t banks = 0;
    std::vector<NodeCost> nodes;  // plus one "<bank>" row for bank energy
    std::map<std::string, std::size_t> components;
};

CostReport evaluate(const ConfigPlan& plan, const rram::HardwareConfig& hw, const ComponentCatalog& catalog,
                    const LatencyModel& model);

/// Occupied NEON-Net cells times the per-cell write energy, where a cell
/// read costs subarray power * cycle / cells and a write costs
/// write_read_energy_ratio reads.
double init_energy(const rram::MappingPlan& plan, const rram::HardwareConfig& hw, const ComponentCatalog& catalog);

struct Comparison {
    CostReport dlc, lut, neon;
    // NEON and LUT over DLC for each metric; DLC over DLC is 1 by construction.
    std::map<std::string, std::map<std::string, double>> ratios;
    double fixed_function_mean_mw = 0.0;
    const CostReport& of(Arch a) const;
};

Comparison compare_configs(const graph::ExecutionGraph& original, const graph::ExecutionGraph& transformed,
                           const rram::HardwareConfig& hw, const ComponentCatalog& catalog, const LatencyModel& model);

/// Geometric mean of each ratio over a set of comparisons.
std::map<std::string, std::map<std::string, double>> geomean_ratios(const std::vector<Comparison>& cs);

struct ScalingPoint {
    std::size_t count = 0;
    double dlc_edp = 0.0;
    double neon_edp = 0.0;
    std::optional<double> lut_edp;  // empty when the LUT is infeasible
    double lut_bytes = 0.0;
};

struct ScalingCurve {
    std::vector<ScalingPoint> points;
    std::vector<std::size_t> dlc_breaks;
    std::vector<std::size_t> neon_breaks;
};

/// One N-input operator: DLC replicates N exp + N div units (constant
/// delay); NEON drives N wordlines of ceil(N / xbar_rows) subarrays plus
/// the tanh unit; LUT uses the 2^N footprint rule.
ScalingCurve operator_scaling_sweep(const rram::HardwareConfig& hw, const ComponentCatalog& catalog,
                                    const LatencyModel& model, const std::vector<std::size_t>& counts);

/// Counts N at which EDP(next) / EDP(N) rises more than `tol` above the
/// previous step's ratio.
std::vector<std::size_t> slope_breaks(const std::vector<std::size_t>& counts, const std::vector<double>& edp,
                                      double tol = 0.05);

nlohmann::json report_to_json(const CostReport& r);
/// One row per node: node,op,start_cycle,end_cycle,energy_uj
std::string report_to_csv(const CostReport& r);
nlohmann::json comparison_to_json(const Comparison& c);
/// One row per arch: arch,latency_cycles,area_um2,peak_power_mw,average_power_mw,energy_uj,edp_uj_s,init_energy_uj
std::string comparison_to_csv(const Comparison& c);
nlohmann::json scaling_to_json(const ScalingCurve& s);
/// One row per count and arch: count,arch,edp_uj_s,feasible
std::string scaling_to_csv(const ScalingCurve& s);

}  // namespace neon::cost
