#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace vtp::io {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// One per CLI invocation; records what went in and what came out.
struct RunManifest {
    std::string subcommand;
    nlohmann::json config;
    std::vector<std::uint64_t> seeds;
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;
    double wall_seconds = 0.0;

    /// Adds config digest, artifact hashes, hardware string and thread count.
    nlohmann::json to_json() const;
    void write(const std::filesystem::path& path) const;
};

std::string hardware_description();

}  // namespace vtp::io
