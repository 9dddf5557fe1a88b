#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "neon/cost/cost_model.hpp"
#include "neon/nn/train.hpp"
#include "neon/rram/hardware_config.hpp"
#include "neon/transform/transform.hpp"

namespace neon::cli {

nlohmann::json hardware_to_json(const rram::HardwareConfig& hw);
/// Missing keys keep their defaults; the result is validated.
rram::HardwareConfig hardware_from_json(const nlohmann::json& j);

nlohmann::json train_to_json(const nn::TrainConfig& c);
nn::TrainConfig train_from_json(const nlohmann::json& j, nn::TrainConfig base = nn::TrainConfig::desk());

/// Everything a run reads besides its graph:
///
///   { "hardware": {...}, "catalog": {...}, "latency": {...},
///     "train": {...}, "transform": {"capture_samples", "input_std"} }
struct RunConfig {
    rram::HardwareConfig hw;
    cost::ComponentCatalog catalog = cost::ComponentCatalog::defaults();
    cost::LatencyModel latency;
    transform::TransformOptions transform;

    static RunConfig from_json(const nlohmann::json& j);
    /// Defaults when `path` is empty.
    static RunConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

/// Inputs, seed, subcommand and resolved configuration of one run.
struct RunManifest {
    std::string subcommand;
    std::map<std::string, std::string> inputs;  // role -> path as given
    std::uint64_t seed = 0;
    nlohmann::json config;
    std::string version;

    nlohmann::json to_json() const;
    /// 16 hex digits of FNV-1a over the canonical JSON (hash field excluded).
    std::string hash() const;
};

std::string tool_version();

}  // namespace neon::cli
