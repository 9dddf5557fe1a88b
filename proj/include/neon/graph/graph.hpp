#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "neon/graph/op_kind.hpp"
#include "neon/graph/tensor.hpp"

namespace neon::rram {
struct HardwareConfig;
}

namespace neon::graph {

struct GraphNode {
    std::string id;
    OpKind op;
    std::vector<std::string> inputs;
    TensorShape output_shape;
    // matmul: fan_in x fan_out row-major; bias_add: one value per output.
    std::vector<double> weights;
    // Non-empty on layers generated for a NEON-Net; names the replaced node.
    std::string neon_owner;
    // Executes on subarrays not shared with the workload.
    bool dedicated_subarray = false;

    bool is_neon_internal() const noexcept { return !neon_owner.empty(); }
    /// matmul fan-in derived from the weight payload.
    std::size_t fan_in() const;
};

/// Validated, immutable DAG. Nodes are stored in their document order;
/// topological order is computed once at build time.
class ExecutionGraph {
public:
    ExecutionGraph() = default;

    /// Validates ids, edges, acyclicity, arity and shapes. Throws GraphError.
    static ExecutionGraph build(std::vector<GraphNode> nodes, std::string entry, std::string exit);

    const std::vector<GraphNode>& nodes() const noexcept { return nodes_; }
    const std::vector<std::size_t>& topo_order() const noexcept { return topo_; }
    const std::string& entry() const noexcept { return entry_; }
    const std::string& exit() const noexcept { return exit_; }
    const TensorShape& input_shape() const noexcept { return input_shape_; }
    bool empty() const noexcept { return nodes_.empty(); }
    std::size_t size() const noexcept { return nodes_.size(); }

    bool contains(const std::string& id) const { return index_.contains(id); }
    std::size_t index_of(const std::string& id) const;
    const GraphNode& node(const std::string& id) const { return nodes_[index_of(id)]; }
    /// Input tensor shapes of a node (the graph input for the entry node).
    std::vector<TensorShape> input_shapes(const GraphNode& n) const;
    std::vector<std::string> consumers(const std::string& id) const;

private:
    std::vector<GraphNode> nodes_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::size_t> topo_;
    std::string entry_;
    std::string exit_;
    TensorShape input_shape_;
};

enum class SupportClass { crossbar_native, dlc_native, identity_rewrite, transform_candidate };

std::string_view to_string(SupportClass c);

SupportClass classify(const OpKind& op, const rram::HardwareConfig& hw);
std::map<std::string, SupportClass> classify_nodes(const ExecutionGraph& g, const rram::HardwareConfig& hw);

struct NodeTrace {
    std::vector<Tensor> inputs;
    Tensor output;
};

/// Evaluates one op on concrete inputs in double precision.
Tensor evaluate_op(const GraphNode& n, const std::vector<const Tensor*>& inputs);

/// Exact forward pass recording every node's input/output pair.
/// Throws GraphError(numerical) when a non-finite value appears.
std::map<std::string, NodeTrace> execute_reference(const ExecutionGraph& g, const Tensor& input);

/// Forward pass returning only the exit tensor.
Tensor run_graph(const ExecutionGraph& g, const Tensor& input);

// Scalar reference math shared by the evaluator and the rewrites.
void softmax_inplace(std::vector<double>& v, std::size_t offset, std::size_t width);
void squash_inplace(std::vector<double>& v, std::size_t offset, std::size_t width);

}  // namespace neon::graph
