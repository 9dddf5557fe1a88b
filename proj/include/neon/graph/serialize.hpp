#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "neon/graph/graph.hpp"

namespace neon::graph {

inline constexpr int kGraphSchemaVersion = 1;

/// Graph document layout:
///
///   { "version": 1, "weights_file": "x.bin", "entry": id, "exit": id,
///     "nodes": [ { "id", "op", "attrs": {...}, "inputs": [...],
///                  "output_shape": [...], "weights_ref": {"offset", "count"},
///                  "neon_owner"?, "dedicated_subarray"? } ] }
///
/// weights_ref offsets and counts are in float32 elements of the sidecar.
ExecutionGraph parse_graph(const nlohmann::json& doc, std::span<const float> weights);

/// Reads the document and its sidecar (resolved relative to the document).
ExecutionGraph load_graph(const std::filesystem::path& path);

/// Serializes to a document plus an appended float32 sidecar payload.
nlohmann::json graph_to_json(const ExecutionGraph& g, std::vector<unsigned char>& sidecar,
                             const std::string& weights_file);

/// Writes `<path>` and `<path stem>.bin` next to it.
void save_graph(const ExecutionGraph& g, const std::filesystem::path& path);

nlohmann::json op_attrs_to_json(const OpKind& op);
/// Reads "op" and "attrs" from a node-like object; `id` labels errors.
OpKind parse_op_kind(const nlohmann::json& node, const std::string& id);

}  // namespace neon::graph
