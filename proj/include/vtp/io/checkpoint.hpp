#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "vtp/flow/model.hpp"

namespace vtp::io {

inline constexpr int kCheckpointVersion = 1;

/// Versioned JSON: layout, spline shape, layer orders, row-major weights,
/// normalization, frame origin, seed, plus a free-form "training" block.
nlohmann::json model_to_json(const flow::CnfModel& model, const nlohmann::json& training = nlohmann::json::object());
flow::CnfModel model_from_json(const nlohmann::json& j, const std::string& source = "checkpoint");

void save_checkpoint(const std::filesystem::path& path, const flow::CnfModel& model,
                     const nlohmann::json& training = nlohmann::json::object());

struct LoadedCheckpoint {
    flow::CnfModel model;
    nlohmann::json training;
    /// SHA-256 of the file bytes.
    std::string digest;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vtp::io
