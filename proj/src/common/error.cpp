#include "neon/common/error.hpp"

namespace neon {

const char* to_string(GraphErrorKind kind) {
    switch (kind) {
        case GraphErrorKind::schema: return "schema violation";
        case GraphErrorKind::cycle: return "cycle detected";
        case GraphErrorKind::dangling_input: return "dangling input";
        case GraphErrorKind::shape_mismatch: return "shape mismatch";
        case GraphErrorKind::unknown_op: return "unknown op kind";
        case GraphErrorKind::numerical: return "numerical overflow";
    }
    return "graph error";
}

GraphError::GraphError(GraphErrorKind kind, std::string node_id, const std::string& detail)
    : Error(std::string(to_string(kind)) + " at node '" + node_id + "': " + detail),
      kind_(kind),
      node_id_(std::move(node_id)) {}

}  // namespace neon
