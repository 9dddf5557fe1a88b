#include "neon/graph/serialize.hpp"

#include <fstream>

#include "neon/common/binary_io.hpp"
#include "neon/common/error.hpp"

namespace neon::graph {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& id, const std::string& detail) {
    throw GraphError(GraphErrorKind::schema, id, detail);
}

const json& field(const json& obj, const char* key, const std::string& id) {
    if (!obj.is_object() || !obj.contains(key)) {
        schema_error(id, std::string("missing field '") + key + "'");
    }
    return obj.at(key);
}

}  // namespace

OpKind parse_op_kind(const json& node, const std::string& id) {
    const auto& op_field = field(node, "op", id);
    if (!op_field.is_string()) {
        schema_error(id, "'op' must be a string");
    }
    const auto tag = parse_op(op_field.get<std::string>());
    if (!tag) {
        throw GraphError(GraphErrorKind::unknown_op, id, "unknown op '" + op_field.get<std::string>() + "'");
    }
    OpKind op = OpKind::of(*tag);
    const json attrs = node.value("attrs", json::object());
    if (!attrs.is_object()) {
        schema_error(id, "'attrs' must be an object");
    }
    try {
        if (attrs.contains("dim")) {
            const auto d = attrs.at("dim").get<long long>();
            if (d <= 0) {
                schema_error(id, "dim must be positive");
            }
            op.dim = static_cast<std::size_t>(d);
        }
        op.alpha = attrs.value("alpha", op.alpha);
        op.scale = attrs.value("scale", op.scale);
        op.shift = attrs.value("shift", op.shift);
        op.lo = attrs.value("lo", op.lo);
        op.hi = attrs.value("hi", op.hi);
    } catch (const json::exception& e) {
        schema_error(id, std::string("bad attribute: ") + e.what());
    }
    return op;
}

json op_attrs_to_json(const OpKind& op) {
    json attrs = json::object();
    switch (op.tag) {
        case OpTag::softmax:
        case OpTag::squash:
        case OpTag::reshape:
            attrs["dim"] = op.dim;
            break;
        case OpTag::relu:
        case OpTag::sqrt_elementwise:
            if (op.dim != 1) attrs["dim"] = op.dim;
            break;
        case OpTag::leaky_relu:
            attrs["alpha"] = op.alpha;
            if (op.dim != 1) attrs["dim"] = op.dim;
            break;
        case OpTag::affine:
            attrs["scale"] = op.scale;
            attrs["shift"] = op.shift;
            break;
        case OpTag::clamp:
            attrs["lo"] = op.lo;
            attrs["hi"] = op.hi;
            break;
        default:
            break;
    }
    return attrs;
}

ExecutionGraph parse_graph(const json& doc, std::span<const float> weights) {
    if (!doc.is_object()) {
        schema_error("", "graph document must be a JSON object");
    }
    const auto version = doc.value("version", -1);
    if (version != kGraphSchemaVersion) {
        schema_error("", "unsupported graph version " + std::to_string(version));
    }
    const auto& nodes_json = field(doc, "nodes", "");
    if (!nodes_json.is_array()) {
        schema_error("", "'nodes' must be an array");
    }
    std::vector<GraphNode> nodes;
    nodes.reserve(nodes_json.size());
    for (std::size_t k = 0; k < nodes_json.size(); ++k) {
        const auto& nj = nodes_json[k];
        const std::string fallback = "#" + std::to_string(k);
        const auto& id_field = field(nj, "id", fallback);
        if (!id_field.is_string()) {
            schema_error(fallback, "'id' must be a string");
        }
        GraphNode n;
        n.id = id_field.get<std::string>();
        n.op = parse_op_kind(nj, n.id);
        try {
            n.inputs = nj.value("inputs", std::vector<std::string>{});
            const auto dims = field(nj, "output_shape", n.id).get<std::vector<long long>>();
            std::vector<std::size_t> udims;
            for (auto d : dims) {
                if (d <= 0) {
                    schema_error(n.id, "output_shape dims must be positive");
                }
                udims.push_back(static_cast<std::size_t>(d));
            }
            n.output_shape = TensorShape(std::move(udims));
            n.neon_owner = nj.value("neon_owner", std::string{});
            n.dedicated_subarray = nj.value("dedicated_subarray", false);
        } catch (const json::exception& e) {
            schema_error(n.id, e.what());
        }
        if (nj.contains("weights_ref") && !nj.at("weights_ref").is_null()) {
            const auto& ref = nj.at("weights_ref");
            const auto offset = field(ref, "offset", n.id).get<long long>();
            const auto count = field(ref, "count", n.id).get<long long>();
            if (offset < 0 || count < 0 ||
                static_cast<unsigned long long>(offset + count) > weights.size()) {
                schema_error(n.id, "weights_ref [" + std::to_string(offset) + ", +" + std::to_string(count) +
                                       ") exceeds sidecar of " + std::to_string(weights.size()) + " floats");
            }
            n.weights.assign(weights.begin() + offset, weights.begin() + offset + count);
        } else if (n.op.tag == OpTag::matmul || n.op.tag == OpTag::bias_add) {
            schema_error(n.id, "op requires weights_ref");
        }
        nodes.push_back(std::move(n));
    }
    std::string entry;
    std::string exit;
    if (!nodes.empty()) {
        entry = field(doc, "entry", "").get<std::string>();
        exit = field(doc, "exit", "").get<std::string>();
    }
    return ExecutionGraph::build(std::move(nodes), std::move(entry), std::move(exit));
}

ExecutionGraph load_graph(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw Error("cannot open graph document " + path.string());
    }
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        schema_error("", std::string("invalid JSON: ") + e.what());
    }
    std::vector<float> weights;
    if (doc.is_object() && doc.contains("weights_file") && doc.at("weights_file").is_string()) {
        weights = read_f32_le(path.parent_path() / doc.at("weights_file").get<std::string>());
    }
    return parse_graph(doc, weights);
}

json graph_to_json(const ExecutionGraph& g, std::vector<unsigned char>& sidecar, const std::string& weights_file) {
    json doc;
    doc["version"] = kGraphSchemaVersion;
    doc["weights_file"] = weights_file;
    doc["entry"] = g.entry();
    doc["exit"] = g.exit();
    doc["nodes"] = json::array();
    for (const auto& n : g.nodes()) {
        json nj;
        nj["id"] = n.id;
        nj["op"] = std::string(op_name(n.op.tag));
        nj["attrs"] = op_attrs_to_json(n.op);
        nj["inputs"] = n.inputs;
        nj["output_shape"] = n.output_shape.dims();
        if (!n.weights.empty()) {
            nj["weights_ref"] = {{"offset", sidecar.size() / 4}, {"count", n.weights.size()}};
            append_f32_le(sidecar, n.weights);
        } else {
            nj["weights_ref"] = nullptr;
        }
        if (n.is_neon_internal()) {
            nj["neon_owner"] = n.neon_owner;
        }
        if (n.dedicated_subarray) {
            nj["dedicated_subarray"] = true;
        }
        doc["nodes"].push_back(std::move(nj));
    }
    return doc;
}

void save_graph(const ExecutionGraph& g, const std::filesystem::path& path) {
    std::vector<unsigned char> sidecar;
    auto bin_path = path;
    bin_path.replace_extension(".bin");
    const auto doc = graph_to_json(g, sidecar, bin_path.filename().string());
    std::ofstream os(path, std::ios::trunc);
    if (!os) {
        throw Error("cannot write " + path.string());
    }
    os << doc.dump(2) << '\n';
    std::ofstream bs(bin_path, std::ios::binary | std::ios::trunc);
    bs.write(reinterpret_cast<const char*>(sidecar.data()), static_cast<std::streamsize>(sidecar.size()));
}

}  // namespace neon::graph
