#include "vtp/io/manifest.hpp"

#include <openssl/evp.h>
#include <sys/utsname.h>

#include <fstream>
#include <iomanip>
#include <sstream>

#include "vtp/core/error.hpp"
#include "vtp/core/parallel.hpp"
#include "vtp/io/csv.hpp"

namespace vtp::io {

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return out.str();
}

std::string sha256_file(const std::filesystem::path& path) {
    return sha256_hex(read_file(path));
}

std::string hardware_description() {
    std::string cpu = "unknown cpu";
    std::ifstream info("/proc/cpuinfo");
    for (std::string line; std::getline(info, line);) {
        if (line.rfind("model name", 0) == 0) {
            const auto colon = line.find(':');
            if (colon != std::string::npos) cpu = line.substr(colon + 2);
            break;
        }
    }
    utsname u{};
    std::string os = "unknown os";
    if (uname(&u) == 0) os = std::string(u.sysname) + " " + u.release + " " + u.machine;
    return cpu + "; " + os;
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["config"] = config;
    j["config_digest"] = sha256_hex(config.dump());
    j["seeds"] = seeds;
    nlohmann::json in = nlohmann::json::array(), out = nlohmann::json::array();
    for (const auto& p : inputs) in.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    for (const auto& p : outputs) out.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    j["inputs"] = in;
    j["outputs"] = out;
    j["wall_seconds"] = wall_seconds;
    j["hardware"] = hardware_description();
    j["threads"] = max_threads();
    return j;
}

void RunManifest::write(const std::filesystem::path& path) const {
    write_file(path, to_json().dump(2) + "\n");
}

}  // namespace vtp::io
