#pragma once

#include "babelkit/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace babelkit {

using TokenSequence = std::vector<std::int32_t>;

struct LogitMatrix {
    std::size_t rows = 0;  // sequence length
    std::size_t cols = 0;  // vocab size
    std::vector<float> values;

    float operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    bool operator==(const LogitMatrix&) const = default;
};

// Decoder-only transformer over a checkpoint, f32 throughout:
//   x <- x + Attn(RMSNorm(x));  x <- x + MLP(RMSNorm(x));  logits = lm_head(RMSNorm(x))
// Attention is causal with rotary position encoding (rotate-half layout) and grouped-query
// sharing; the MLP is down(silu(gate(x)) * up(x)).
//
// Evaluation order is fixed: every dot product accumulates left to right in f32 starting
// from 0.0f; rotary angles are computed in double and rounded to f32; softmax subtracts
// the row max and normalizes by the left-to-right f32 sum.
class ReferenceModel {
public:
    explicit ReferenceModel(const Checkpoint& ckpt, std::size_t max_context = 4096);

    LogitMatrix forward(std::span<const std::int32_t> tokens) const;
    const ModelConfig& config() const { return config_; }

private:
    struct Layer {
        std::vector<float> q, k, v, o, gate, up, down, input_norm, post_norm;
    };

    ModelConfig config_;
    std::size_t max_context_;
    std::vector<float> embed_, final_norm_, lm_head_;
    std::vector<Layer> layers_;
};

LogitMatrix forward(const Checkpoint& ckpt, std::span<const std::int32_t> tokens);

// Deterministic pseudo-random weights, N(0, 1/hidden) for matrices and 1 + N(0, 0.01) for norms.
Checkpoint make_toy_checkpoint(const ModelConfig& config, std::uint64_t seed, DType dtype = DType::F32);

struct PromptDeviation {
    double mean_abs = 0.0;
    double max_abs = 0.0;
};

struct DeviationStats {
    double mean_abs = 0.0;  // over every logit of every prompt
    double max_abs = 0.0;
    std::vector<PromptDeviation> per_prompt;
};
nlohmann::json deviation_to_json(const DeviationStats& stats);

DeviationStats compare_outputs(const Checkpoint& a, const Checkpoint& b, std::span<const TokenSequence> prompts);

// Uniform random prompts for harnesses that have no tokenized text.
std::vector<TokenSequence> random_prompts(int vocab_size, std::size_t count, std::size_t length, std::uint64_t seed);

}  // namespace babelkit
