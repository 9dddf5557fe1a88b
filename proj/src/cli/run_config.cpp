#include "neon/cli/run_config.hpp"

#include <cstdio>
#include <fstream>

#include "neon/common/error.hpp"
#include "neon/common/rng.hpp"

namespace neon::cli {

using nlohmann::json;

namespace {

template <class T>
void read(const json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

json hardware_to_json(const rram::HardwareConfig& hw) {
    json ops = json::array();
    for (auto t : hw.supported_dlc_ops) ops.push_back(graph::op_name(t));
    return {{"xbar_rows", hw.xbar_rows},
            {"xbar_cols", hw.xbar_cols},
            {"cell_bits", hw.cell_bits},
            {"value_bits", hw.value_bits},
            {"dac_bits", hw.dac_bits},
            {"adc_per_subarray", hw.adc_per_subarray},
            {"cycle_ns", hw.cycle_ns},
            {"write_read_energy_ratio", hw.write_read_energy_ratio},
            {"supported_dlc_ops", ops},
            {"lut_cap_bytes", hw.lut_cap_bytes}};
}

rram::HardwareConfig hardware_from_json(const json& j) {
    rram::HardwareConfig hw;
    read(j, "xbar_rows", hw.xbar_rows);
    read(j, "xbar_cols", hw.xbar_cols);
    if (j.contains("xbar_size")) hw.xbar_rows = hw.xbar_cols = j.at("xbar_size").get<std::size_t>();
    read(j, "cell_bits", hw.cell_bits);
    read(j, "value_bits", hw.value_bits);
    read(j, "dac_bits", hw.dac_bits);
    read(j, "adc_per_subarray", hw.adc_per_subarray);
    read(j, "cycle_ns", hw.cycle_ns);
    read(j, "write_read_energy_ratio", hw.write_read_energy_ratio);
    read(j, "lut_cap_bytes", hw.lut_cap_bytes);
    if (j.contains("supported_dlc_ops")) {
        hw.supported_dlc_ops.clear();
        for (const auto& name : j.at("supported_dlc_ops")) {
            auto tag = graph::parse_op(name.get<std::string>());
            if (!tag) throw Error("unknown op '" + name.get<std::string>() + "' in supported_dlc_ops");
            hw.supported_dlc_ops.insert(*tag);
        }
    }
    hw.validate();
    return hw;
}

json train_to_json(const nn::TrainConfig& c) {
    return {{"epsilon", c.epsilon},
            {"max_layers", c.max_layers},
            {"num_epochs", c.num_epochs},
            {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate},
            {"weight_decay", c.weight_decay},
            {"xbar_size", c.xbar_size},
            {"schedule", c.schedule == nn::LrSchedule::cosine ? "cosine" : "constant"},
            {"validation_fraction", c.validation_fraction}};
}

nn::TrainConfig train_from_json(const json& j, nn::TrainConfig c) {
    read(j, "epsilon", c.epsilon);
    read(j, "max_layers", c.max_layers);
    read(j, "num_epochs", c.num_epochs);
    read(j, "batch_size", c.batch_size);
    read(j, "learning_rate", c.learning_rate);
    read(j, "weight_decay", c.weight_decay);
    read(j, "xbar_size", c.xbar_size);
    read(j, "validation_fraction", c.validation_fraction);
    if (j.contains("schedule")) {
        const auto s = j.at("schedule").get<std::string>();
        if (s == "cosine") {
            c.schedule = nn::LrSchedule::cosine;
        } else if (s == "constant") {
            c.schedule = nn::LrSchedule::constant;
        } else {
            throw Error("unknown learning-rate schedule '" + s + "'");
        }
    }
    c.validate();
    return c;
}

RunConfig RunConfig::from_json(const json& j) {
    for (const auto& [key, _] : j.items()) {
        if (key != "hardware" && key != "catalog" && key != "latency" && key != "train" && key != "transform") {
            throw Error("unknown config section '" + key + "'");
        }
    }
    RunConfig c;
    c.hw = hardware_from_json(j.value("hardware", json::object()));
    c.catalog = cost::ComponentCatalog::from_json(j.value("catalog", json::object()));
    c.latency = cost::LatencyModel::from_json(j.value("latency", json::object()));
    c.transform.train = train_from_json(j.value("train", json::object()));
    c.transform.train.xbar_size = static_cast<int>(c.hw.xbar_cols);
    if (j.contains("train") && j["train"].contains("xbar_size")) {
        c.transform.train.xbar_size = j["train"]["xbar_size"].get<int>();
    }
    const auto t = j.value("transform", json::object());
    read(t, "capture_samples", c.transform.capture_samples);
    read(t, "input_std", c.transform.input_std);
    if (c.transform.capture_samples == 0 || !(c.transform.input_std > 0.0)) {
        throw Error("transform.capture_samples and transform.input_std must be positive");
    }
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    if (path.empty()) return from_json(json::object());
    std::ifstream in(path);
    if (!in) throw Error("cannot open config '" + path.string() + "'");
    try {
        return from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw Error("config '" + path.string() + "': " + e.what());
    }
}

json RunConfig::to_json() const {
    return {{"hardware", hardware_to_json(hw)},
            {"catalog", catalog.to_json()},
            {"latency", latency.to_json()},
            {"train", train_to_json(transform.train)},
            {"transform", {{"capture_samples", transform.capture_samples}, {"input_std", transform.input_std}}}};
}

std::string tool_version() { return "0.1.0"; }

json RunManifest::to_json() const {
    return {{"subcommand", subcommand},
            {"inputs", inputs},
            {"seed", seed},
            {"config", config},
            {"version", version}};
}

std::string RunManifest::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json().dump())));
    return buf;
}

}  // namespace neon::cli
