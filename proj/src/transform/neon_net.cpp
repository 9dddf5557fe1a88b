#include "neon/transform/neon_net.hpp"

#include <algorithm>
#include <fstream>

#include "neon/common/binary_io.hpp"
#include "neon/common/error.hpp"
#include "neon/graph/serialize.hpp"

namespace neon::transform {

using nlohmann::json;

namespace {

constexpr double kDegenerateWidening = 1e-6;

std::pair<double, double> range_of(const Eigen::MatrixXd& m) {
    double lo = m.minCoeff();
    double hi = m.maxCoeff();
    if (lo == hi) {
        lo -= kDegenerateWidening;
        hi += kDegenerateWidening;
    }
    return {lo, hi};
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void write_json(const json& doc, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << doc.dump(2) << '\n';
}

std::filesystem::path sidecar_for(const std::filesystem::path& path) {
    auto p = path;
    return p.replace_extension(".bin");
}

}  // namespace

Eigen::VectorXd NeonNet::operator()(const Eigen::VectorXd& x) const {
    return clamp(nn::forward(net, clamp(x, bounds, BoundSide::input)), bounds, BoundSide::output);
}

BoundSpec extract_bounds(const CaptureDataset& data) {
    if (data.size() == 0) {
        throw Error("cannot extract bounds from an empty dataset");
    }
    BoundSpec b;
    std::tie(b.input_min, b.input_max) = range_of(data.inputs);
    std::tie(b.output_min, b.output_max) = range_of(data.outputs);
    return b;
}

double clamp(double v, const BoundSpec& b, BoundSide side) {
    return side == BoundSide::input ? std::clamp(v, b.input_min, b.input_max)
                                    : std::clamp(v, b.output_min, b.output_max);
}

Eigen::VectorXd clamp(const Eigen::VectorXd& x, const BoundSpec& b, BoundSide side) {
    return x.unaryExpr([&](double v) { return clamp(v, b, side); });
}

json bounds_to_json(const BoundSpec& b) {
    return {{"input", {b.input_min, b.input_max}}, {"output", {b.output_min, b.output_max}}};
}

BoundSpec bounds_from_json(const json& j) {
    BoundSpec b;
    b.input_min = j.at("input").at(0).get<double>();
    b.input_max = j.at("input").at(1).get<double>();
    b.output_min = j.at("output").at(0).get<double>();
    b.output_max = j.at("output").at(1).get<double>();
    if (!(b.input_min < b.input_max) || !(b.output_min < b.output_max)) {
        throw Error("bounds must satisfy min < max");
    }
    return b;
}

void save_neon_net(const NeonNet& n, const std::filesystem::path& path) {
    std::vector<double> flat;
    json layers = json::array();
    for (const auto& l : n.net.layers) {
        layers.push_back({{"in", l.in_dim()}, {"out", l.out_dim()}, {"activation", nn::to_string(l.activation)}});
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) flat.push_back(l.weight(r, c));
        }
        flat.insert(flat.end(), l.bias.data(), l.bias.data() + l.bias.size());
    }
    json op = graph::op_attrs_to_json(n.replaced_op);
    json doc = {
        {"version", 1},
        {"weights_file", sidecar_for(path).filename().string()},
        {"replaced_op", {{"op", graph::op_name(n.replaced_op.tag)}, {"attrs", op}}},
        {"bounds", bounds_to_json(n.bounds)},
        {"layers", layers},
        {"report",
         {{"hidden_layers", n.report.hidden_layers},
          {"validation_mse", n.report.validation_mse},
          {"epochs_run", n.report.epochs_run},
          {"converged", n.report.converged}}},
    };
    write_json(doc, path);
    write_f32_le(sidecar_for(path), flat);
}

NeonNet load_neon_net(const std::filesystem::path& path) {
    const json doc = read_json(path);
    try {
        NeonNet n;
        n.replaced_op = graph::parse_op_kind(doc.at("replaced_op"), path.string());
        n.bounds = bounds_from_json(doc.at("bounds"));
        const auto values = read_f32_le(path.parent_path() / doc.at("weights_file").get<std::string>());
        std::size_t at = 0;
        auto take = [&]() {
            if (at >= values.size()) {
                throw Error(path.string() + ": weights sidecar is too short");
            }
            return static_cast<double>(values[at++]);
        };
        for (const auto& lj : doc.at("layers")) {
            nn::Layer l;
            const auto in = lj.at("in").get<Eigen::Index>();
            const auto out = lj.at("out").get<Eigen::Index>();
            l.activation = nn::parse_activation(lj.at("activation").get<std::string>());
            l.weight.resize(out, in);
            for (Eigen::Index r = 0; r < out; ++r) {
                for (Eigen::Index c = 0; c < in; ++c) l.weight(r, c) = take();
            }
            l.bias.resize(out);
            for (Eigen::Index r = 0; r < out; ++r) l.bias(r) = take();
            n.net.layers.push_back(std::move(l));
        }
        if (at != values.size()) {
            throw Error(path.string() + ": weights sidecar has trailing values");
        }
        n.net.validate();
        const auto& r = doc.at("report");
        n.report.hidden_layers = r.at("hidden_layers").get<std::size_t>();
        n.report.validation_mse = r.at("validation_mse").get<double>();
        n.report.epochs_run = r.at("epochs_run").get<int>();
        // Wall-clock time is not serialized; files must be reproducible.
        n.report.seconds = 0.0;
        n.report.converged = r.at("converged").get<bool>();
        return n;
    } catch (const json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void save_capture(const CaptureDataset& d, const std::filesystem::path& path) {
    std::vector<double> flat(d.inputs.data(), d.inputs.data() + d.inputs.size());
    flat.insert(flat.end(), d.outputs.data(), d.outputs.data() + d.outputs.size());
    json doc = {
        {"version", 1},
        {"source", d.source},
        {"op", {{"op", graph::op_name(d.op.tag)}, {"attrs", graph::op_attrs_to_json(d.op)}}},
        {"samples", d.size()},
        {"in_dim", d.inputs.rows()},
        {"out_dim", d.outputs.rows()},
        {"data_file", sidecar_for(path).filename().string()},
    };
    write_json(doc, path);
    write_f32_le(sidecar_for(path), flat);
}

CaptureDataset load_capture(const std::filesystem::path& path) {
    const json doc = read_json(path);
    try {
        CaptureDataset d;
        d.source = doc.at("source").get<std::string>();
        d.op = graph::parse_op_kind(doc.at("op"), d.source);
        const auto n = doc.at("samples").get<Eigen::Index>();
        const auto in = doc.at("in_dim").get<Eigen::Index>();
        const auto out = doc.at("out_dim").get<Eigen::Index>();
        const auto values = read_f32_le(path.parent_path() / doc.at("data_file").get<std::string>());
        if (static_cast<Eigen::Index>(values.size()) != n * (in + out)) {
            throw Error(path.string() + ": data file holds " + std::to_string(values.size()) + " values, expected " +
                        std::to_string(n * (in + out)));
        }
        d.inputs = Eigen::Map<const Eigen::MatrixXf>(values.data(), in, n).cast<double>();
        d.outputs = Eigen::Map<const Eigen::MatrixXf>(values.data() + in * n, out, n).cast<double>();
        return d;
    } catch (const json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

}  // namespace neon::transform
