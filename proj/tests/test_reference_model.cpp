#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "babelkit/error.hpp"
#include "babelkit/reference_model.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace babelkit;

namespace {

Tensor f32_tensor(std::vector<std::int64_t> shape, std::vector<float> values) {
    return {DType::F32, std::move(shape), encode_f32(DType::F32, values)};
}

// One layer, hidden 2, one head, vocab 3. Weights match tests/oracles/tiny_forward_oracle.py.
Checkpoint tiny_checkpoint() {
    Checkpoint c;
    c.config = {1, 2, 1, 1, 2, 3, 1e-6, 10000.0};
    c.tensors.insert(std::string(kEmbedTokens), f32_tensor({3, 2}, {0.5f, -1.0f, 1.5f, 0.25f, -0.75f, 2.0f}));
    auto put = [&](std::string_view suffix, std::vector<std::int64_t> shape, std::vector<float> v) {
        c.tensors.insert(layer_tensor_name(0, suffix), f32_tensor(std::move(shape), std::move(v)));
    };
    put("self_attn.q_proj.weight", {2, 2}, {1.0f, 0.5f, -0.5f, 1.0f});
    put("self_attn.k_proj.weight", {2, 2}, {0.25f, -1.0f, 1.0f, 0.75f});
    put("self_attn.v_proj.weight", {2, 2}, {2.0f, 0.0f, 0.5f, -1.5f});
    put("self_attn.o_proj.weight", {2, 2}, {0.5f, 0.25f, -1.0f, 1.0f});
    put("mlp.gate_proj.weight", {2, 2}, {1.0f, -0.5f, 0.25f, 2.0f});
    put("mlp.up_proj.weight", {2, 2}, {-1.0f, 0.5f, 1.5f, 0.5f});
    put("mlp.down_proj.weight", {2, 2}, {0.75f, -0.25f, 0.5f, 1.25f});
    put("input_layernorm.weight", {2}, {1.0f, 0.5f});
    put("post_attention_layernorm.weight", {2}, {0.75f, 1.25f});
    c.tensors.insert(std::string(kFinalNorm), f32_tensor({2}, {1.25f, -0.5f}));
    c.tensors.insert(std::string(kLmHead), f32_tensor({3, 2}, {1.0f, 0.0f, 0.0f, 1.0f, 0.5f, -0.5f}));
    return c;
}

Checkpoint zero_layers(Checkpoint c) {
    for (auto& [name, t] : c.tensors)
        if (parse_layer_tensor_name(name)) std::fill(t.data.begin(), t.data.end(), 0);
    return c;
}

}  // namespace

TEST_CASE("tiny model matches the double-precision scalar transcript") {
    const double expected[3][3] = {
        {0.318356332, 0.69554557, -0.188594619},
        {-0.92964661, -0.60143243, -0.16410709},
        {1.28688867, 0.484795374, 0.401046648},
    };
    const TokenSequence tokens{0, 2, 1};
    const auto logits = forward(tiny_checkpoint(), tokens);
    REQUIRE(logits.rows == 3);
    REQUIRE(logits.cols == 3);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) CHECK(logits(r, c) == doctest::Approx(expected[r][c]).epsilon(1e-5));
}

TEST_CASE("forward is deterministic") {
    const auto ckpt = make_toy_checkpoint(testing::toy_config(4), 3);
    const ReferenceModel model(ckpt);
    for (const auto& p : random_prompts(ckpt.config.vocab_size, 5, 9, 4)) CHECK(model.forward(p) == model.forward(p));
}

TEST_CASE("causality: a prefix reproduces the leading rows bit for bit") {
    const auto ckpt = make_toy_checkpoint(testing::toy_config(3), 8);
    const ReferenceModel model(ckpt);
    const auto p = random_prompts(ckpt.config.vocab_size, 1, 10, 2)[0];
    const auto full = model.forward(p);
    for (std::size_t n = 1; n < p.size(); ++n) {
        const auto part = model.forward(std::span(p).first(n));
        CHECK(std::equal(part.values.begin(), part.values.end(), full.values.begin()));
    }
}

TEST_CASE("all-zero layers are an identity regardless of depth") {
    auto one = zero_layers(make_toy_checkpoint(testing::toy_config(1), 5));
    auto four = zero_layers(make_toy_checkpoint(testing::toy_config(4), 5));
    // Same embeddings and head so that only the depth differs.
    four.tensors.at(kEmbedTokens) = one.tensors.at(kEmbedTokens);
    four.tensors.at(kFinalNorm) = one.tensors.at(kFinalNorm);
    four.tensors.at(kLmHead) = one.tensors.at(kLmHead);
    for (const auto& p : random_prompts(one.config.vocab_size, 3, 6, 1)) CHECK(forward(one, p) == forward(four, p));
}

TEST_CASE("changing a later token does not change earlier rows") {
    const auto ckpt = make_toy_checkpoint(testing::toy_config(2), 1);
    TokenSequence a{1, 2, 3, 4}, b{1, 2, 3, 9};
    const auto la = forward(ckpt, a), lb = forward(ckpt, b);
    CHECK(std::equal(la.values.begin(), la.values.begin() + 3 * la.cols, lb.values.begin()));
    CHECK_FALSE(la == lb);
}

TEST_CASE("invalid inputs are rejected") {
    const auto ckpt = make_toy_checkpoint(testing::toy_config(2), 1);
    const ReferenceModel model(ckpt, 8);
    CHECK_THROWS_AS(model.forward(TokenSequence{}), Error);
    CHECK_THROWS_AS(model.forward(TokenSequence(9, 1)), Error);
    CHECK_THROWS_AS(model.forward(TokenSequence{1, 48}), Error);
    CHECK_THROWS_AS(model.forward(TokenSequence{-1}), Error);

    auto bad = ckpt;
    auto w = decode_f32(DType::F32, bad.tensors.at(kFinalNorm).data);
    w[0] = std::nanf("");
    bad.tensors.at(kFinalNorm).data = encode_f32(DType::F32, w);
    CHECK_THROWS_AS(ReferenceModel{bad}, Error);
}

TEST_CASE("compare_outputs") {
    const auto a = make_toy_checkpoint(testing::toy_config(2), 1);
    const auto b = make_toy_checkpoint(testing::toy_config(2), 2);
    const auto prompts = random_prompts(a.config.vocab_size, 3, 5, 7);
    const auto same = compare_outputs(a, a, prompts);
    CHECK(same.mean_abs == 0.0);
    CHECK(same.max_abs == 0.0);
    CHECK(same.per_prompt.size() == 3);
    const auto diff = compare_outputs(a, b, prompts);
    CHECK(diff.mean_abs > 0.0);
    CHECK(diff.max_abs >= diff.mean_abs);

    // Oracle: direct mean over all logits.
    double sum = 0;
    std::size_t n = 0;
    for (const auto& p : prompts) {
        const auto la = forward(a, p), lb = forward(b, p);
        for (std::size_t i = 0; i < la.values.size(); ++i, ++n)
            sum += std::abs(static_cast<double>(la.values[i]) - lb.values[i]);
    }
    CHECK(diff.mean_abs == doctest::Approx(sum / n).epsilon(1e-12));

    auto other = testing::toy_config(2);
    other.vocab_size = 50;
    CHECK_THROWS_AS(compare_outputs(a, make_toy_checkpoint(other, 1), prompts), Error);
}

TEST_CASE("toy checkpoints are seeded and valid in every dtype") {
    const auto cfg = testing::toy_config(2);
    CHECK(make_toy_checkpoint(cfg, 4) == make_toy_checkpoint(cfg, 4));
    CHECK_FALSE(make_toy_checkpoint(cfg, 4) == make_toy_checkpoint(cfg, 5));
    for (auto dt : {DType::F32, DType::F16, DType::BF16}) {
        const auto c = make_toy_checkpoint(cfg, 4, dt);
        CHECK(checkpoint_violations(c).empty());
        CHECK(c.tensors.at(kLmHead).dtype == dt);
        CHECK_NOTHROW(forward(c, TokenSequence{1, 2}));
    }
}

TEST_CASE("random prompts are in range and seeded") {
    const auto p = random_prompts(17, 4, 6, 3);
    CHECK(p.size() == 4);
    for (const auto& s : p) {
        CHECK(s.size() == 6);
        for (auto t : s) CHECK((t >= 0 && t < 17));
    }
    CHECK(p == random_prompts(17, 4, 6, 3));
    CHECK_FALSE(p == random_prompts(17, 4, 6, 4));
}
