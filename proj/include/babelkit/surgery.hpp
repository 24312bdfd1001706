#pragma once

#include "babelkit/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace babelkit {

enum class InsertStrategy { AmongLayers, AfterModel };

enum class InitKind { Duplicate, DuplicateNoise, Zeros };

struct InitMethod {
    InitKind kind = InitKind::Duplicate;
    double noise_mean = 0.0;  // DuplicateNoise only; the noise standard deviation equals the mean

    static InitMethod duplicate() { return {InitKind::Duplicate, 0.0}; }
    static InitMethod noise(double mean) { return {InitKind::DuplicateNoise, mean}; }
    static InitMethod zeros() { return {InitKind::Zeros, 0.0}; }

    std::string describe() const;
};

struct ExtensionPlan {
    InsertStrategy strategy = InsertStrategy::AmongLayers;
    std::vector<int> positions;  // AmongLayers: original layer indices, strictly increasing
    int count = 0;               // AfterModel: number of appended layers
    InitMethod init;
    std::uint64_t seed = 0;

    std::vector<std::string> violations(const ModelConfig& config) const;
    int inserted_count() const {
        return strategy == InsertStrategy::AmongLayers ? static_cast<int>(positions.size()) : count;
    }
};

void to_json(nlohmann::json& j, const ExtensionPlan& plan);
void from_json(const nlohmann::json& j, ExtensionPlan& plan);

// k layers in the second half at stride 2: {L/2, L/2 + 2, ..., L/2 + 2(k-1)}.
// Requires an even layer count and 4k <= L.
ExtensionPlan plan_extension(const ModelConfig& config, int k);

struct InsertedLayer {
    int source_layer;
    int new_layer;

    bool operator==(const InsertedLayer&) const = default;
};

struct SurgeryRecord {
    int old_num_layers = 0;
    int new_num_layers = 0;
    std::vector<InsertedLayer> inserted;
    std::string init;
    std::uint64_t seed = 0;
    ExtensionPlan plan;
};
nlohmann::json record_to_json(const SurgeryRecord& record);

struct ExtensionResult {
    Checkpoint checkpoint;
    SurgeryRecord record;
};

// AmongLayers places a copy of layer p directly after p (positions refer to original indices);
// AfterModel appends copies of the last layer. Everything outside the layer stack is untouched.
ExtensionResult apply_extension(const Checkpoint& ckpt, const ExtensionPlan& plan);

// Closed-form parameter counts.
std::uint64_t per_layer_parameters(const ModelConfig& config);
std::uint64_t count_parameters(const ModelConfig& config);

}  // namespace babelkit
