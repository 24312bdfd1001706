#include "babelkit/run_manifest.hpp"

#include "babelkit/error.hpp"

#include <fstream>

namespace babelkit {

nlohmann::json manifest_to_json(const RunManifest& m) {
    return {{"subcommand", m.subcommand},
            {"parameters", m.parameters},
            {"inputs", m.inputs},
            {"outputs", m.outputs},
            {"seed", m.seed ? nlohmann::json(*m.seed) : nlohmann::json(nullptr)},
            {"threads", m.threads},
            {"tool_version", kToolVersion},
            {"wall_seconds", m.wall_seconds},
            {"counters", m.counters}};
}

std::filesystem::path manifest_path_for(const std::filesystem::path& primary_output) {
    return primary_output.string() + ".manifest.json";
}

void write_run_manifest(const RunManifest& m, const std::filesystem::path& primary_output) {
    const auto path = manifest_path_for(primary_output);
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path.string());
    out << manifest_to_json(m).dump(2) << '\n';
}

}  // namespace babelkit
