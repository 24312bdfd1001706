#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "babelkit/checkpoint.hpp"
#include "babelkit/error.hpp"
#include "babelkit/reference_model.hpp"
#include "test_support.hpp"

#include <nlohmann/json.hpp>

using namespace babelkit;
using testing::TempDir;

namespace {

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
    return std::any_of(v.begin(), v.end(), [&](const auto& s) { return s.find(needle) != std::string::npos; });
}

std::vector<std::string> violations_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ValidationErrors& e) {
        return e.violations();
    }
    return {};
}

// Replace the container header while keeping the data section.
std::vector<std::uint8_t> with_header(const std::vector<std::uint8_t>& bytes, const nlohmann::json& header) {
    std::uint64_t n = 0;
    for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    std::string text = header.dump();
    std::vector<std::uint8_t> out(8);
    const std::uint64_t len = text.size();
    for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(len >> (8 * i));
    out.insert(out.end(), text.begin(), text.end());
    out.insert(out.end(), bytes.begin() + 8 + static_cast<std::ptrdiff_t>(n), bytes.end());
    return out;
}

nlohmann::json header_of(const std::vector<std::uint8_t>& bytes) {
    std::uint64_t n = 0;
    for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(n));
}

}  // namespace

TEST_CASE("toy checkpoint round-trips through save and load") {
    TempDir dir("ckpt");
    const auto ckpt = make_toy_checkpoint(testing::toy_config(2, 8), 3);
    save_checkpoint(ckpt, dir / "toy.safetensors");
    const auto loaded = load_checkpoint(dir / "toy.safetensors");
    CHECK(loaded == ckpt);
    CHECK(testing::read_bytes(dir / "toy.safetensors").size() == encode_container(ckpt).size());
}

TEST_CASE("round trip preserves f16 and bf16 bytes and metadata") {
    TempDir dir("ckpt16");
    for (auto dtype : {DType::F16, DType::BF16}) {
        auto ckpt = make_toy_checkpoint(testing::toy_config(2, 8), 9, dtype);
        ckpt.metadata["format"] = "pt";
        save_checkpoint(ckpt, dir / "m.safetensors");
        const auto first = testing::read_bytes(dir / "m.safetensors");
        const auto loaded = load_checkpoint(dir / "m.safetensors");
        CHECK(loaded == ckpt);
        save_checkpoint(loaded, dir / "m2.safetensors");
        CHECK(testing::read_bytes(dir / "m2.safetensors") == first);
    }
}

TEST_CASE("header is 8-byte aligned and describes packed extents") {
    const auto ckpt = make_toy_checkpoint(testing::toy_config(1, 8), 0);
    const auto bytes = encode_container(ckpt);
    std::uint64_t n = 0;
    for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    CHECK(n % 8 == 0);
    const auto header = header_of(bytes);
    CHECK(header["model.embed_tokens.weight"]["dtype"] == "F32");
    CHECK(header["model.embed_tokens.weight"]["data_offsets"][0] == 0);
}

TEST_CASE("out-of-bounds extent is reported") {
    const auto ckpt = make_toy_checkpoint(testing::toy_config(1, 8), 0);
    auto bytes = encode_container(ckpt);
    auto header = header_of(bytes);
    header["lm_head.weight"]["data_offsets"][1] = 1u << 30;
    const auto v = violations_of([&] { decode_container(with_header(bytes, header)); });
    CHECK(any_contains(v, "out-of-bounds extent"));
}

TEST_CASE("overlapping extents are reported") {
    const auto ckpt = make_toy_checkpoint(testing::toy_config(1, 8), 0);
    auto bytes = encode_container(ckpt);
    auto header = header_of(bytes);
    header["model.norm.weight"]["data_offsets"] = header["model.embed_tokens.weight"]["data_offsets"];
    header["model.norm.weight"]["shape"] = header["model.embed_tokens.weight"]["shape"];
    const auto v = violations_of([&] { decode_container(with_header(bytes, header)); });
    CHECK(any_contains(v, "overlapping extents"));
}

TEST_CASE("malformed header length") {
    std::vector<std::uint8_t> tiny{1, 2, 3};
    CHECK(any_contains(violations_of([&] { decode_container(tiny); }), "malformed header length"));

    std::vector<std::uint8_t> huge(16, 0);
    huge[0] = 0xFF;
    huge[1] = 0xFF;
    CHECK(any_contains(violations_of([&] { decode_container(huge); }), "malformed header length"));
}

TEST_CASE("quantized dtypes are refused") {
    const auto ckpt = make_toy_checkpoint(testing::toy_config(1, 8), 0);
    auto bytes = encode_container(ckpt);
    auto header = header_of(bytes);
    header["model.norm.weight"]["dtype"] = "I8";
    CHECK(any_contains(violations_of([&] { decode_container(with_header(bytes, header)); }), "unsupported dtype"));
}

TEST_CASE("non-contiguous layer indices") {
    auto config = testing::toy_config(3, 8);
    const auto full = make_toy_checkpoint(config, 1);
    Checkpoint gap;
    gap.config = config;
    gap.config.num_layers = 2;
    for (const auto& [name, t] : full.tensors) {
        auto parsed = parse_layer_tensor_name(name);
        if (parsed && parsed->layer == 1) continue;
        gap.tensors.insert(name, t);
    }
    const auto v = checkpoint_violations(gap);
    CHECK(any_contains(v, "non-contiguous layer indices {0,2}"));
}

TEST_CASE("validation enumerates every violation") {
    auto ckpt = make_toy_checkpoint(testing::toy_config(2, 8), 1);
    Checkpoint broken;
    broken.config = ckpt.config;
    for (const auto& [name, t] : ckpt.tensors) {
        if (name == layer_tensor_name(0, "mlp.up_proj.weight") || name == layer_tensor_name(1, "mlp.up_proj.weight"))
            continue;
        Tensor copy = t;
        if (name == std::string(kFinalNorm)) copy.shape = {4};
        broken.tensors.insert(name, copy);
    }
    const auto v = checkpoint_violations(broken);
    CHECK(any_contains(v, "missing tensor model.layers.0.mlp.up_proj.weight"));
    CHECK(any_contains(v, "missing tensor model.layers.1.mlp.up_proj.weight"));
    CHECK(any_contains(v, "byte length of model.norm.weight"));
    CHECK(v.size() >= 3);
}

TEST_CASE("config shape mismatch on load") {
    TempDir dir("cfg");
    auto ckpt = make_toy_checkpoint(testing::toy_config(1, 8), 0);
    save_checkpoint(ckpt, dir / "a.safetensors");
    auto cfg = ckpt.config;
    cfg.intermediate_size = 32;
    testing::write_bytes(dir / "a.config.json", nlohmann::json(cfg).dump());
    const auto v = violations_of([&] { load_checkpoint(dir / "a.safetensors"); });
    CHECK(any_contains(v, "shape mismatch for model.layers.0.mlp.gate_proj.weight"));
}

TEST_CASE("empty checkpoint is refused and nothing is written") {
    TempDir dir("empty");
    Checkpoint empty;
    empty.config = testing::toy_config(1, 8);
    const auto v = violations_of([&] { save_checkpoint(empty, dir / "e.safetensors"); });
    CHECK(any_contains(v, "empty checkpoint"));
    CHECK_FALSE(std::filesystem::exists(dir / "e.safetensors"));
}

TEST_CASE("invalid save leaves the destination untouched") {
    TempDir dir("atomic");
    testing::write_bytes(dir / "keep.safetensors", "previous contents");
    auto ckpt = make_toy_checkpoint(testing::toy_config(1, 8), 0);
    ckpt.tensors.at(kFinalNorm).data.pop_back();
    CHECK_THROWS_AS(save_checkpoint(ckpt, dir / "keep.safetensors"), ValidationErrors);
    CHECK(testing::read_bytes(dir / "keep.safetensors") == "previous contents");
    CHECK(std::distance(std::filesystem::directory_iterator(dir.path()), std::filesystem::directory_iterator{}) == 1);
}

TEST_CASE("missing config is an I/O error") {
    TempDir dir("nocfg");
    save_checkpoint(make_toy_checkpoint(testing::toy_config(1, 8), 0), dir / "x.safetensors");
    std::filesystem::remove(dir / "x.config.json");
    try {
        load_checkpoint(dir / "x.safetensors");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Io);
    }
}

TEST_CASE("model config invariants") {
    auto c = testing::toy_config();
    CHECK(c.violations().empty());
    c.num_attention_heads = 5;
    CHECK_FALSE(c.violations().empty());
    c = testing::toy_config();
    c.num_kv_heads = 3;
    CHECK_FALSE(c.violations().empty());
    c = testing::toy_config();
    c.num_layers = 0;
    CHECK_THROWS_AS(c.validate(), ValidationErrors);
}

TEST_CASE("layer tensor names parse") {
    auto p = parse_layer_tensor_name("model.layers.12.self_attn.q_proj.weight");
    REQUIRE(p);
    CHECK(p->layer == 12);
    CHECK(p->suffix == "self_attn.q_proj.weight");
    CHECK_FALSE(parse_layer_tensor_name("model.norm.weight"));
    CHECK_FALSE(parse_layer_tensor_name("model.layers.x.mlp.weight"));
}
