#pragma once

#include <stdexcept>
#include <string>

namespace neon {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class GraphErrorKind {
    schema,
    cycle,
    dangling_input,
    shape_mismatch,
    unknown_op,
    numerical,
};

const char* to_string(GraphErrorKind kind);

/// Graph load/validation/execution failure. `node_id` names the offending
/// node (for cycles, every node on the cycle, comma separated).
class GraphError : public Error {
public:
    GraphError(GraphErrorKind kind, std::string node_id, const std::string& detail);

    GraphErrorKind kind() const noexcept { return kind_; }
    const std::string& node_id() const noexcept { return node_id_; }

private:
    GraphErrorKind kind_;
    std::string node_id_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

}  // namespace neon
