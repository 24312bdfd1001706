#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace babelkit {

inline constexpr const char* kToolVersion = "0.1.0";

// Provenance written next to each subcommand's primary output as "<output>.manifest.json".
struct RunManifest {
    std::string subcommand;
    nlohmann::json parameters = nlohmann::json::object();  // fully resolved, defaults included
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    double wall_seconds = 0.0;
    nlohmann::json counters = nlohmann::json::object();
};

nlohmann::json manifest_to_json(const RunManifest& manifest);
std::filesystem::path manifest_path_for(const std::filesystem::path& primary_output);
void write_run_manifest(const RunManifest& manifest, const std::filesystem::path& primary_output);

}  // namespace babelkit
