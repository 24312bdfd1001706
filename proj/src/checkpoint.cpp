#include "babelkit/checkpoint.hpp"

#include "babelkit/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace babelkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string shape_str(const std::vector<std::int64_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    in.seekg(0, std::ios::end);
    auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    std::vector<std::uint8_t> bytes(size);
    if (size && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size)))
        throw io_error("short read on " + path.string());
    return bytes;
}

fs::path temp_sibling(const fs::path& path) {
    std::random_device rd;
    return path.parent_path() / (path.filename().string() + ".tmp" + std::to_string(rd()));
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) throw io_error("write failed for " + path.string());
}

}  // namespace

std::vector<std::string> ModelConfig::violations() const {
    std::vector<std::string> v;
    auto positive = [&](int value, const char* name) {
        if (value <= 0) v.push_back(std::string(name) + " must be positive (got " + std::to_string(value) + ")");
    };
    if (num_layers < 1) v.push_back("num_layers must be >= 1 (got " + std::to_string(num_layers) + ")");
    positive(hidden_size, "hidden_size");
    positive(num_attention_heads, "num_attention_heads");
    positive(num_kv_heads, "num_kv_heads");
    positive(intermediate_size, "intermediate_size");
    positive(vocab_size, "vocab_size");
    if (!(rms_norm_eps > 0)) v.push_back("rms_norm_eps must be > 0");
    if (!(rope_theta > 0)) v.push_back("rope_theta must be > 0");
    if (hidden_size > 0 && num_attention_heads > 0 && hidden_size % num_attention_heads != 0)
        v.push_back("hidden_size not divisible by num_attention_heads");
    if (num_attention_heads > 0 && num_kv_heads > 0 && num_attention_heads % num_kv_heads != 0)
        v.push_back("num_attention_heads not divisible by num_kv_heads");
    return v;
}

void ModelConfig::validate() const {
    if (auto v = violations(); !v.empty()) throw ValidationErrors(std::move(v));
}

void to_json(json& j, const ModelConfig& c) {
    j = json{{"num_layers", c.num_layers},
             {"hidden_size", c.hidden_size},
             {"num_attention_heads", c.num_attention_heads},
             {"num_kv_heads", c.num_kv_heads},
             {"intermediate_size", c.intermediate_size},
             {"vocab_size", c.vocab_size},
             {"rms_norm_eps", c.rms_norm_eps},
             {"rope_theta", c.rope_theta}};
}

void from_json(const json& j, ModelConfig& c) {
    std::vector<std::string> missing;
    auto get = [&](const char* key, auto& field) {
        if (!j.contains(key) || !(j.at(key).is_number())) {
            missing.push_back(std::string("config field '") + key + "' missing or not a number");
            return;
        }
        j.at(key).get_to(field);
    };
    get("num_layers", c.num_layers);
    get("hidden_size", c.hidden_size);
    get("num_attention_heads", c.num_attention_heads);
    get("num_kv_heads", c.num_kv_heads);
    get("intermediate_size", c.intermediate_size);
    get("vocab_size", c.vocab_size);
    get("rms_norm_eps", c.rms_norm_eps);
    get("rope_theta", c.rope_theta);
    if (!missing.empty()) throw ValidationErrors(std::move(missing));
}

std::int64_t Tensor::numel() const {
    std::int64_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

void TensorMap::insert(std::string name, Tensor tensor) {
    if (index_.contains(name)) throw validation_error("duplicate tensor name " + name);
    index_.emplace(name, entries_.size());
    entries_.emplace_back(std::move(name), std::move(tensor));
}

bool TensorMap::contains(std::string_view name) const { return index_.contains(std::string(name)); }

const Tensor& TensorMap::at(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw validation_error("missing tensor " + std::string(name));
    return entries_[it->second].second;
}

Tensor& TensorMap::at(std::string_view name) {
    return const_cast<Tensor&>(static_cast<const TensorMap&>(*this).at(name));
}

std::string layer_tensor_name(int layer, std::string_view suffix) {
    return "model.layers." + std::to_string(layer) + "." + std::string(suffix);
}

std::optional<LayerTensorName> parse_layer_tensor_name(std::string_view name) {
    constexpr std::string_view prefix = "model.layers.";
    if (!name.starts_with(prefix)) return std::nullopt;
    name.remove_prefix(prefix.size());
    auto dot = name.find('.');
    if (dot == std::string_view::npos || dot == 0) return std::nullopt;
    int layer = 0;
    auto [ptr, ec] = std::from_chars(name.data(), name.data() + dot, layer);
    if (ec != std::errc() || ptr != name.data() + dot || layer < 0) return std::nullopt;
    return LayerTensorName{layer, std::string(name.substr(dot + 1))};
}

std::optional<std::vector<std::int64_t>> expected_shape(const ModelConfig& c, std::string_view name) {
    const std::int64_t h = c.hidden_size, kv = c.kv_dim(), inter = c.intermediate_size, vocab = c.vocab_size;
    if (name == kEmbedTokens || name == kLmHead) return std::vector<std::int64_t>{vocab, h};
    if (name == kFinalNorm) return std::vector<std::int64_t>{h};
    auto parsed = parse_layer_tensor_name(name);
    if (!parsed) return std::nullopt;
    const auto& s = parsed->suffix;
    if (s == "self_attn.q_proj.weight" || s == "self_attn.o_proj.weight") return std::vector<std::int64_t>{h, h};
    if (s == "self_attn.k_proj.weight" || s == "self_attn.v_proj.weight") return std::vector<std::int64_t>{kv, h};
    if (s == "mlp.gate_proj.weight" || s == "mlp.up_proj.weight") return std::vector<std::int64_t>{inter, h};
    if (s == "mlp.down_proj.weight") return std::vector<std::int64_t>{h, inter};
    if (s == "input_layernorm.weight" || s == "post_attention_layernorm.weight") return std::vector<std::int64_t>{h};
    return std::nullopt;
}

std::vector<std::string> checkpoint_violations(const Checkpoint& ckpt) {
    std::vector<std::string> v;
    if (ckpt.tensors.empty()) {
        v.push_back("empty checkpoint");
        return v;
    }
    for (const auto& [name, t] : ckpt.tensors) {
        bool bad_dim = std::any_of(t.shape.begin(), t.shape.end(), [](auto d) { return d < 0; });
        if (bad_dim) {
            v.push_back("negative dimension in " + name);
        } else if (t.data.size() != t.expected_bytes()) {
            v.push_back("byte length of " + name + " is " + std::to_string(t.data.size()) + ", expected " +
                        std::to_string(t.expected_bytes()) + " for shape " + shape_str(t.shape));
        }
    }

    auto config_issues = ckpt.config.violations();
    v.insert(v.end(), config_issues.begin(), config_issues.end());

    std::set<int> layers;
    for (const auto& [name, t] : ckpt.tensors)
        if (auto p = parse_layer_tensor_name(name)) layers.insert(p->layer);
    if (!layers.empty()) {
        bool contiguous = *layers.begin() == 0 && *layers.rbegin() == static_cast<int>(layers.size()) - 1;
        if (!contiguous) {
            std::string list;
            for (int l : layers) list += (list.empty() ? "" : ",") + std::to_string(l);
            v.push_back("non-contiguous layer indices {" + list + "}");
        }
    }
    if (!config_issues.empty()) return v;

    if (static_cast<int>(layers.size()) != ckpt.config.num_layers)
        v.push_back("config num_layers=" + std::to_string(ckpt.config.num_layers) + " but checkpoint has " +
                    std::to_string(layers.size()) + " layer indices");

    for (auto global : {kEmbedTokens, kFinalNorm, kLmHead})
        if (!ckpt.tensors.contains(global)) v.push_back("missing tensor " + std::string(global));
    for (int i = 0; i < ckpt.config.num_layers; ++i)
        for (auto suffix : kLayerTensorSuffixes)
            if (auto name = layer_tensor_name(i, suffix); !ckpt.tensors.contains(name))
                v.push_back("missing tensor " + name);

    for (const auto& [name, t] : ckpt.tensors) {
        auto want = expected_shape(ckpt.config, name);
        if (want && *want != t.shape)
            v.push_back("shape mismatch for " + name + ": " + shape_str(t.shape) + " vs config " + shape_str(*want));
    }
    return v;
}

fs::path config_path_for(const fs::path& checkpoint_path) {
    return checkpoint_path.parent_path() / (checkpoint_path.stem().string() + ".config.json");
}

std::vector<std::uint8_t> encode_container(const Checkpoint& ckpt) {
    json header = json::object();
    std::uint64_t offset = 0;
    for (const auto& [name, t] : ckpt.tensors) {
        header[name] = {{"dtype", dtype_name(t.dtype)},
                        {"shape", t.shape},
                        {"data_offsets", {offset, offset + t.data.size()}}};
        offset += t.data.size();
    }
    if (!ckpt.metadata.empty()) header["__metadata__"] = ckpt.metadata;

    std::string text = header.dump();
    // Pad with spaces to an 8-byte boundary so tensor data starts aligned.
    text.append((8 - text.size() % 8) % 8, ' ');

    std::vector<std::uint8_t> bytes(8 + text.size() + offset);
    std::uint64_t n = text.size();
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<std::uint8_t>(n >> (8 * i));
    std::copy(text.begin(), text.end(), bytes.begin() + 8);
    auto out = bytes.begin() + 8 + static_cast<std::ptrdiff_t>(text.size());
    for (const auto& [name, t] : ckpt.tensors) out = std::copy(t.data.begin(), t.data.end(), out);
    return bytes;
}

Checkpoint decode_container(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8) throw ValidationErrors({"malformed header length: file shorter than 8 bytes"});
    std::uint64_t n = 0;
    for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    if (n > bytes.size() - 8)
        throw ValidationErrors({"malformed header length: declares " + std::to_string(n) + " bytes, file has " +
                                std::to_string(bytes.size() - 8) + " after the length prefix"});

    json header;
    try {
        header = json::parse(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(n));
    } catch (const json::exception& e) {
        throw ValidationErrors({std::string("malformed header: ") + e.what()});
    }
    if (!header.is_object()) throw ValidationErrors({"malformed header: not a JSON object"});

    const auto data = bytes.subspan(8 + n);
    struct Extent {
        std::uint64_t begin, end;
        std::string name;
        Tensor tensor;
    };
    std::vector<Extent> extents;
    std::vector<std::string> v;
    Checkpoint ckpt;

    for (const auto& [name, entry] : header.items()) {
        if (name == "__metadata__") {
            if (!entry.is_object()) {
                v.push_back("__metadata__ must be an object");
                continue;
            }
            for (const auto& [k, val] : entry.items()) {
                if (val.is_string()) ckpt.metadata[k] = val.get<std::string>();
                else v.push_back("__metadata__ value for '" + k + "' is not a string");
            }
            continue;
        }
        try {
            Extent e;
            e.name = name;
            e.tensor.dtype = parse_dtype(entry.at("dtype").get<std::string>());
            e.tensor.shape = entry.at("shape").get<std::vector<std::int64_t>>();
            auto offs = entry.at("data_offsets").get<std::vector<std::uint64_t>>();
            if (offs.size() != 2 || offs[0] > offs[1]) {
                v.push_back("malformed data_offsets for " + name);
                continue;
            }
            e.begin = offs[0];
            e.end = offs[1];
            if (e.end > data.size()) {
                v.push_back("out-of-bounds extent for " + name + ": [" + std::to_string(e.begin) + ", " +
                            std::to_string(e.end) + ") exceeds data section of " + std::to_string(data.size()) +
                            " bytes");
                continue;
            }
            extents.push_back(std::move(e));
        } catch (const Error& e) {
            v.push_back(name + ": " + e.what());
        } catch (const json::exception& e) {
            v.push_back("malformed header entry for " + name + ": " + e.what());
        }
    }

    std::sort(extents.begin(), extents.end(),
              [](const Extent& a, const Extent& b) { return std::tie(a.begin, a.end) < std::tie(b.begin, b.end); });
    for (std::size_t i = 1; i < extents.size(); ++i)
        if (extents[i].begin < extents[i - 1].end)
            v.push_back("overlapping extents: " + extents[i - 1].name + " and " + extents[i].name);
    if (!v.empty()) throw ValidationErrors(std::move(v));

    for (auto& e : extents) {
        e.tensor.data.assign(data.begin() + static_cast<std::ptrdiff_t>(e.begin),
                             data.begin() + static_cast<std::ptrdiff_t>(e.end));
        ckpt.tensors.insert(std::move(e.name), std::move(e.tensor));
    }
    return ckpt;
}

Checkpoint load_checkpoint(const fs::path& path) {
    auto bytes = read_file(path);
    Checkpoint ckpt = decode_container(bytes);

    fs::path cfg = config_path_for(path);
    if (!fs::exists(cfg)) cfg = path.parent_path() / "config.json";
    if (!fs::exists(cfg)) throw io_error("config not found: " + config_path_for(path).string());
    auto cfg_bytes = read_file(cfg);
    try {
        ckpt.config = json::parse(cfg_bytes.begin(), cfg_bytes.end()).get<ModelConfig>();
    } catch (const json::exception& e) {
        throw ValidationErrors({"malformed config " + cfg.string() + ": " + e.what()});
    }

    if (auto v = checkpoint_violations(ckpt); !v.empty()) throw ValidationErrors(std::move(v));
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const fs::path& path) {
    if (auto v = checkpoint_violations(ckpt); !v.empty()) throw ValidationErrors(std::move(v));

    auto bytes = encode_container(ckpt);
    std::string cfg_text = json(ckpt.config).dump(2) + "\n";
    std::vector<std::uint8_t> cfg_bytes(cfg_text.begin(), cfg_text.end());

    const fs::path cfg_path = config_path_for(path);
    const fs::path tmp_data = temp_sibling(path), tmp_cfg = temp_sibling(cfg_path);
    try {
        write_file(tmp_data, bytes);
        write_file(tmp_cfg, cfg_bytes);
        fs::rename(tmp_data, path);
        fs::rename(tmp_cfg, cfg_path);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp_data, ec);
        fs::remove(tmp_cfg, ec);
        try {
            throw;
        } catch (const fs::filesystem_error& e) {
            throw io_error(e.what());
        }
    }
}

}  // namespace babelkit
