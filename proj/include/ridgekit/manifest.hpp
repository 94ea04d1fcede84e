#pragma once

#include "ridgekit/io.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ridgekit {

inline constexpr const char* kVersion = "0.1.0";

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Everything needed to rerun a command: its configuration, seeds, worker
/// count, tool version and digests of the files it read and wrote.
struct RunManifest {
    std::string command;
    Json config = Json::object();
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;

    /// Digests are taken when this is called, so write outputs first.
    [[nodiscard]] Json to_json() const;
    void write(const std::filesystem::path& path) const;
};

/// "<output>.manifest.json".
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

}  // namespace ridgekit
