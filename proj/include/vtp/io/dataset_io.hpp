#pragma once

#include <filesystem>

#include "json.hpp"
#include "vtp/core/types.hpp"

namespace vtp::io {

/// Sidecar path of a dataset CSV: "<stem>.json" next to it.
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

/// CSV header traj_id,t,p0..p{d-1}[,psi0..]; the sidecar carries d, n_psi,
/// units, and whatever the caller put into `extra` (seed, scenario config).
void write_dataset(const std::filesystem::path& csv, const TrajectoryDataset& dataset, const nlohmann::json& extra);

/// Throws DataError on malformed files, naming the offending line.
TrajectoryDataset read_dataset(const std::filesystem::path& csv);

}  // namespace vtp::io
