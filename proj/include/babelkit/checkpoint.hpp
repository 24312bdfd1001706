#pragma once

#include "babelkit/dtype.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace babelkit {

struct ModelConfig {
    int num_layers = 0;
    int hidden_size = 0;
    int num_attention_heads = 0;
    int num_kv_heads = 0;
    int intermediate_size = 0;
    int vocab_size = 0;
    double rms_norm_eps = 1e-6;
    double rope_theta = 10000.0;

    int head_dim() const { return hidden_size / num_attention_heads; }
    int kv_dim() const { return head_dim() * num_kv_heads; }

    // Empty when the config is well formed.
    std::vector<std::string> violations() const;
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

struct Tensor {
    DType dtype = DType::F32;
    std::vector<std::int64_t> shape;
    std::vector<std::uint8_t> data;

    std::int64_t numel() const;
    std::size_t expected_bytes() const { return static_cast<std::size_t>(numel()) * dtype_width(dtype); }

    bool operator==(const Tensor&) const = default;
};

// Name -> tensor, iterated in insertion order (which is also the packed data order on disk).
class TensorMap {
public:
    using Entry = std::pair<std::string, Tensor>;

    void insert(std::string name, Tensor tensor);
    bool contains(std::string_view name) const;
    const Tensor& at(std::string_view name) const;
    Tensor& at(std::string_view name);

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }
    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }

    bool operator==(const TensorMap& other) const { return entries_ == other.entries_; }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct Checkpoint {
    ModelConfig config;
    TensorMap tensors;
    // Free-form "__metadata__" string map carried through the container header.
    std::map<std::string, std::string> metadata;

    bool operator==(const Checkpoint&) const = default;
};

// Per-layer tensor suffixes, relative to "model.layers.{i}.".
inline constexpr std::array<std::string_view, 9> kLayerTensorSuffixes = {
    "self_attn.q_proj.weight", "self_attn.k_proj.weight",  "self_attn.v_proj.weight",
    "self_attn.o_proj.weight", "mlp.gate_proj.weight",     "mlp.up_proj.weight",
    "mlp.down_proj.weight",    "input_layernorm.weight",   "post_attention_layernorm.weight",
};
inline constexpr std::string_view kEmbedTokens = "model.embed_tokens.weight";
inline constexpr std::string_view kFinalNorm = "model.norm.weight";
inline constexpr std::string_view kLmHead = "lm_head.weight";

std::string layer_tensor_name(int layer, std::string_view suffix);

struct LayerTensorName {
    int layer;
    std::string suffix;
};
// Splits "model.layers.{i}.{suffix}"; nullopt for non-layer tensors.
std::optional<LayerTensorName> parse_layer_tensor_name(std::string_view name);

// Shape the config implies for a known tensor name; nullopt for names outside the scheme.
std::optional<std::vector<std::int64_t>> expected_shape(const ModelConfig& config, std::string_view name);

// All invariant violations of a checkpoint (config, layer coverage, shapes, byte lengths).
std::vector<std::string> checkpoint_violations(const Checkpoint& ckpt);

// Sibling config path: "dir/name.safetensors" -> "dir/name.config.json".
std::filesystem::path config_path_for(const std::filesystem::path& checkpoint_path);

// In-memory container encoding, exactly the bytes save_checkpoint writes.
std::vector<std::uint8_t> encode_container(const Checkpoint& ckpt);
// Parses container bytes into tensors + metadata; config is left default. Throws ValidationErrors.
Checkpoint decode_container(std::span<const std::uint8_t> bytes);

Checkpoint load_checkpoint(const std::filesystem::path& path);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

}  // namespace babelkit
