#include "babelkit/reference_model.hpp"

#include "babelkit/error.hpp"
#include "babelkit/text.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace babelkit {

namespace {

std::vector<float> weights(const Checkpoint& ckpt, std::string_view name) {
    const Tensor& t = ckpt.tensors.at(name);
    auto values = decode_f32(t.dtype, t.data);
    for (float v : values)
        if (!std::isfinite(v)) throw validation_error("non-finite weight in " + std::string(name));
    return values;
}

// out[r] = sum_c W[r, c] * x[c], W row-major [rows, cols].
void matvec(const std::vector<float>& w, std::span<const float> x, std::span<float> out) {
    const std::size_t cols = x.size();
    for (std::size_t r = 0; r < out.size(); ++r) {
        float acc = 0.0f;
        const float* row = w.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        out[r] = acc;
    }
}

void rms_norm(std::span<const float> x, const std::vector<float>& w, float eps, std::span<float> out) {
    float ss = 0.0f;
    for (float v : x) ss += v * v;
    const float inv = 1.0f / std::sqrt(ss / static_cast<float>(x.size()) + eps);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * inv * w[i];
}

void apply_rope(std::span<float> head, std::size_t position, double theta) {
    const std::size_t d = head.size(), half = d / 2;
    for (std::size_t i = 0; i < half; ++i) {
        const double inv_freq = std::pow(theta, -2.0 * static_cast<double>(i) / static_cast<double>(d));
        const double angle = static_cast<double>(position) * inv_freq;
        const float c = static_cast<float>(std::cos(angle)), s = static_cast<float>(std::sin(angle));
        const float x1 = head[i], x2 = head[i + half];
        head[i] = x1 * c - x2 * s;
        head[i + half] = x2 * c + x1 * s;
    }
}

float silu(float x) { return x / (1.0f + std::exp(-x)); }

}  // namespace

ReferenceModel::ReferenceModel(const Checkpoint& ckpt, std::size_t max_context)
    : config_(ckpt.config), max_context_(max_context) {
    if (auto v = checkpoint_violations(ckpt); !v.empty()) throw ValidationErrors(std::move(v));
    embed_ = weights(ckpt, kEmbedTokens);
    final_norm_ = weights(ckpt, kFinalNorm);
    lm_head_ = weights(ckpt, kLmHead);
    for (int i = 0; i < config_.num_layers; ++i) {
        auto w = [&](std::string_view suffix) { return weights(ckpt, layer_tensor_name(i, suffix)); };
        layers_.push_back({w("self_attn.q_proj.weight"), w("self_attn.k_proj.weight"), w("self_attn.v_proj.weight"),
                           w("self_attn.o_proj.weight"), w("mlp.gate_proj.weight"), w("mlp.up_proj.weight"),
                           w("mlp.down_proj.weight"), w("input_layernorm.weight"),
                           w("post_attention_layernorm.weight")});
    }
}

LogitMatrix ReferenceModel::forward(std::span<const std::int32_t> tokens) const {
    if (tokens.empty()) throw validation_error("empty token sequence");
    if (tokens.size() > max_context_)
        throw validation_error("sequence length " + std::to_string(tokens.size()) + " exceeds context bound " +
                               std::to_string(max_context_));
    for (auto id : tokens)
        if (id < 0 || id >= config_.vocab_size)
            throw validation_error("token id " + std::to_string(id) + " out of range [0, " +
                                   std::to_string(config_.vocab_size) + ")");

    const std::size_t T = tokens.size(), h = config_.hidden_size, hd = config_.head_dim();
    const std::size_t heads = config_.num_attention_heads, kv_dim = config_.kv_dim();
    const std::size_t group = heads / config_.num_kv_heads, inter = config_.intermediate_size;
    const float eps = static_cast<float>(config_.rms_norm_eps);
    const float scale = 1.0f / std::sqrt(static_cast<float>(hd));

    std::vector<float> x(T * h);
    for (std::size_t t = 0; t < T; ++t)
        std::copy_n(embed_.begin() + static_cast<std::ptrdiff_t>(tokens[t] * h), h, x.begin() + t * h);

    std::vector<float> normed(T * h), q(T * h), k(T * kv_dim), v(T * kv_dim), ctx(h), proj(h);
    std::vector<float> scores(T), gate(inter), up(inter);
    auto row = [](std::vector<float>& m, std::size_t r, std::size_t width) {
        return std::span<float>(m.data() + r * width, width);
    };

    for (const Layer& layer : layers_) {
        for (std::size_t t = 0; t < T; ++t) {
            rms_norm(row(x, t, h), layer.input_norm, eps, row(normed, t, h));
            matvec(layer.q, row(normed, t, h), row(q, t, h));
            matvec(layer.k, row(normed, t, h), row(k, t, kv_dim));
            matvec(layer.v, row(normed, t, h), row(v, t, kv_dim));
            for (std::size_t head = 0; head < heads; ++head) apply_rope(row(q, t, h).subspan(head * hd, hd), t, config_.rope_theta);
            for (std::size_t kvh = 0; kvh < static_cast<std::size_t>(config_.num_kv_heads); ++kvh)
                apply_rope(row(k, t, kv_dim).subspan(kvh * hd, hd), t, config_.rope_theta);
        }
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t head = 0; head < heads; ++head) {
                const std::size_t kvh = head / group;
                const float* qh = q.data() + t * h + head * hd;
                float max_score = -INFINITY;
                for (std::size_t j = 0; j <= t; ++j) {
                    const float* kh = k.data() + j * kv_dim + kvh * hd;
                    float dot = 0.0f;
                    for (std::size_t d = 0; d < hd; ++d) dot += qh[d] * kh[d];
                    scores[j] = dot * scale;
                    max_score = std::max(max_score, scores[j]);
                }
                float denom = 0.0f;
                for (std::size_t j = 0; j <= t; ++j) {
                    scores[j] = std::exp(scores[j] - max_score);
                    denom += scores[j];
                }
                for (std::size_t d = 0; d < hd; ++d) {
                    float acc = 0.0f;
                    for (std::size_t j = 0; j <= t; ++j) acc += (scores[j] / denom) * v[j * kv_dim + kvh * hd + d];
                    ctx[head * hd + d] = acc;
                }
            }
            matvec(layer.o, ctx, proj);
            for (std::size_t i = 0; i < h; ++i) x[t * h + i] += proj[i];
        }
        for (std::size_t t = 0; t < T; ++t) {
            rms_norm(row(x, t, h), layer.post_norm, eps, row(normed, t, h));
            matvec(layer.gate, row(normed, t, h), gate);
            matvec(layer.up, row(normed, t, h), up);
            for (std::size_t i = 0; i < inter; ++i) gate[i] = silu(gate[i]) * up[i];
            matvec(layer.down, gate, proj);
            for (std::size_t i = 0; i < h; ++i) x[t * h + i] += proj[i];
        }
    }

    LogitMatrix logits{T, static_cast<std::size_t>(config_.vocab_size), {}};
    logits.values.resize(T * logits.cols);
    std::vector<float> final_row(h);
    for (std::size_t t = 0; t < T; ++t) {
        rms_norm(row(x, t, h), final_norm_, eps, final_row);
        matvec(lm_head_, final_row, row(logits.values, t, logits.cols));
    }
    return logits;
}

LogitMatrix forward(const Checkpoint& ckpt, std::span<const std::int32_t> tokens) {
    return ReferenceModel(ckpt).forward(tokens);
}

Checkpoint make_toy_checkpoint(const ModelConfig& config, std::uint64_t seed, DType dtype) {
    config.validate();
    Checkpoint ckpt;
    ckpt.config = config;
    const double matrix_std = 1.0 / std::sqrt(static_cast<double>(config.hidden_size));

    auto add = [&](const std::string& name) {
        Tensor t;
        t.dtype = dtype;
        t.shape = *expected_shape(config, name);
        std::mt19937_64 gen(mix64(seed ^ hash64(name)));
        const bool is_norm = t.shape.size() == 1;
        std::normal_distribution<double> dist(is_norm ? 1.0 : 0.0, is_norm ? 0.1 : matrix_std);
        std::vector<float> values(static_cast<std::size_t>(t.numel()));
        for (float& value : values) value = static_cast<float>(dist(gen));
        t.data = encode_f32(dtype, values);
        ckpt.tensors.insert(name, std::move(t));
    };

    add(std::string(kEmbedTokens));
    for (int i = 0; i < config.num_layers; ++i)
        for (auto suffix : kLayerTensorSuffixes) add(layer_tensor_name(i, suffix));
    add(std::string(kFinalNorm));
    add(std::string(kLmHead));
    return ckpt;
}

nlohmann::json deviation_to_json(const DeviationStats& s) {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& p : s.per_prompt) per.push_back({{"mean_abs", p.mean_abs}, {"max_abs", p.max_abs}});
    return {{"mean_abs", s.mean_abs}, {"max_abs", s.max_abs}, {"per_prompt", per}};
}

DeviationStats compare_outputs(const Checkpoint& a, const Checkpoint& b, std::span<const TokenSequence> prompts) {
    if (a.config.vocab_size != b.config.vocab_size)
        throw validation_error("vocab mismatch: " + std::to_string(a.config.vocab_size) + " vs " +
                               std::to_string(b.config.vocab_size));
    const ReferenceModel ma(a), mb(b);
    DeviationStats stats;
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& prompt : prompts) {
        const auto la = ma.forward(prompt), lb = mb.forward(prompt);
        PromptDeviation p;
        double sum = 0.0;
        for (std::size_t i = 0; i < la.values.size(); ++i) {
            const double d = std::fabs(static_cast<double>(la.values[i]) - static_cast<double>(lb.values[i]));
            sum += d;
            p.max_abs = std::max(p.max_abs, d);
        }
        p.mean_abs = la.values.empty() ? 0.0 : sum / static_cast<double>(la.values.size());
        total += sum;
        count += la.values.size();
        stats.max_abs = std::max(stats.max_abs, p.max_abs);
        stats.per_prompt.push_back(p);
    }
    stats.mean_abs = count ? total / static_cast<double>(count) : 0.0;
    return stats;
}

std::vector<TokenSequence> random_prompts(int vocab_size, std::size_t count, std::size_t length, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<std::int32_t> dist(0, vocab_size - 1);
    std::vector<TokenSequence> prompts(count, TokenSequence(length));
    for (auto& p : prompts)
        for (auto& id : p) id = dist(gen);
    return prompts;
}

}  // namespace babelkit
