#include "babelkit/surgery.hpp"

#include "babelkit/error.hpp"
#include "babelkit/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace babelkit {

using nlohmann::json;

std::string InitMethod::describe() const {
    switch (kind) {
        case InitKind::Duplicate: return "duplicate";
        case InitKind::Zeros: return "zeros";
        case InitKind::DuplicateNoise: {
            std::ostringstream s;
            s << "duplicate+gaussian(mean=" << noise_mean << ",std=" << noise_mean << ")";
            return s.str();
        }
    }
    return "?";
}

std::vector<std::string> ExtensionPlan::violations(const ModelConfig& config) const {
    std::vector<std::string> v;
    if (strategy == InsertStrategy::AmongLayers) {
        if (positions.empty()) v.push_back("no insertion positions given");
        for (std::size_t i = 0; i < positions.size(); ++i) {
            if (positions[i] < 0 || positions[i] >= config.num_layers)
                v.push_back("position out of range: " + std::to_string(positions[i]) + " not in [0, " +
                            std::to_string(config.num_layers) + ")");
            if (i > 0 && positions[i] <= positions[i - 1])
                v.push_back("positions must be strictly increasing (" + std::to_string(positions[i - 1]) + ", " +
                            std::to_string(positions[i]) + ")");
        }
    } else if (count < 1) {
        v.push_back("append count must be positive");
    }
    if (init.kind == InitKind::DuplicateNoise && !(init.noise_mean > 0.0 && std::isfinite(init.noise_mean)))
        v.push_back("noise mean must be a finite value > 0");
    return v;
}

void to_json(json& j, const ExtensionPlan& p) {
    j = json{{"strategy", p.strategy == InsertStrategy::AmongLayers ? "among_layers" : "after_model"},
             {"init", p.init.kind == InitKind::Duplicate ? "duplicate"
                      : p.init.kind == InitKind::Zeros   ? "zeros"
                                                         : "noise"},
             {"seed", p.seed}};
    if (p.strategy == InsertStrategy::AmongLayers) j["positions"] = p.positions;
    else j["count"] = p.count;
    if (p.init.kind == InitKind::DuplicateNoise) j["noise_mean"] = p.init.noise_mean;
}

void from_json(const json& j, ExtensionPlan& p) {
    const auto strategy = j.value("strategy", std::string("among_layers"));
    if (strategy == "among_layers") {
        p.strategy = InsertStrategy::AmongLayers;
        p.positions = j.at("positions").get<std::vector<int>>();
    } else if (strategy == "after_model") {
        p.strategy = InsertStrategy::AfterModel;
        p.count = j.at("count").get<int>();
    } else {
        throw validation_error("unknown strategy '" + strategy + "'");
    }
    const auto init = j.value("init", std::string("duplicate"));
    if (init == "duplicate") p.init = InitMethod::duplicate();
    else if (init == "zeros") p.init = InitMethod::zeros();
    else if (init == "noise") p.init = InitMethod::noise(j.at("noise_mean").get<double>());
    else throw validation_error("unknown init '" + init + "'");
    p.seed = j.value("seed", std::uint64_t{0});
}

ExtensionPlan plan_extension(const ModelConfig& config, int k) {
    config.validate();
    if (config.num_layers % 2 != 0)
        throw validation_error("odd num_layers (" + std::to_string(config.num_layers) +
                               ") has no defined second-half placement");
    if (k < 1) throw validation_error("k must be positive");
    if (4 * k > config.num_layers)
        throw validation_error("k=" + std::to_string(k) + " does not fit at stride 2 in the second half of " +
                               std::to_string(config.num_layers) + " layers (max " +
                               std::to_string(config.num_layers / 4) + ")");
    ExtensionPlan plan;
    plan.strategy = InsertStrategy::AmongLayers;
    for (int j = 0; j < k; ++j) plan.positions.push_back(config.num_layers / 2 + 2 * j);
    return plan;
}

json record_to_json(const SurgeryRecord& r) {
    json inserted = json::array();
    for (const auto& i : r.inserted) inserted.push_back({{"source_layer", i.source_layer}, {"new_layer", i.new_layer}});
    return {{"old_num_layers", r.old_num_layers},
            {"new_num_layers", r.new_num_layers},
            {"inserted", inserted},
            {"init", r.init},
            {"seed", r.seed},
            {"plan", r.plan}};
}

ExtensionResult apply_extension(const Checkpoint& ckpt, const ExtensionPlan& plan) {
    if (auto v = checkpoint_violations(ckpt); !v.empty()) throw ValidationErrors(std::move(v));
    if (auto v = plan.violations(ckpt.config); !v.empty()) throw ValidationErrors(std::move(v));

    const int old_layers = ckpt.config.num_layers;

    struct NewLayer {
        int source;
        bool inserted;
    };
    std::vector<NewLayer> layout;
    if (plan.strategy == InsertStrategy::AmongLayers) {
        auto next = plan.positions.begin();
        for (int p = 0; p < old_layers; ++p) {
            layout.push_back({p, false});
            if (next != plan.positions.end() && *next == p) {
                layout.push_back({p, true});
                ++next;
            }
        }
    } else {
        for (int p = 0; p < old_layers; ++p) layout.push_back({p, false});
        for (int c = 0; c < plan.count; ++c) layout.push_back({old_layers - 1, true});
    }

    // Per-layer tensors in their original order; globals split by whether they precede the stack.
    std::map<int, std::vector<std::pair<std::string, const Tensor*>>> by_layer;
    std::vector<const TensorMap::Entry*> head, tail;
    for (const auto& entry : ckpt.tensors) {
        if (auto parsed = parse_layer_tensor_name(entry.first)) {
            by_layer[parsed->layer].emplace_back(parsed->suffix, &entry.second);
        } else {
            (by_layer.empty() ? head : tail).push_back(&entry);
        }
    }

    ExtensionResult result;
    Checkpoint& out = result.checkpoint;
    out.config = ckpt.config;
    out.config.num_layers = static_cast<int>(layout.size());
    out.metadata = ckpt.metadata;

    SurgeryRecord& record = result.record;
    record.old_num_layers = old_layers;
    record.new_num_layers = out.config.num_layers;
    record.init = plan.init.describe();
    record.seed = plan.seed;
    record.plan = plan;

    for (const auto* e : head) out.tensors.insert(e->first, e->second);
    std::vector<std::pair<std::string, std::uint64_t>> noisy;  // tensor name, stream seed
    for (int idx = 0; idx < static_cast<int>(layout.size()); ++idx) {
        const auto& nl = layout[idx];
        if (nl.inserted) record.inserted.push_back({nl.source, idx});
        for (const auto& [suffix, tensor] : by_layer.at(nl.source)) {
            Tensor t = *tensor;
            if (nl.inserted && plan.init.kind == InitKind::Zeros) std::fill(t.data.begin(), t.data.end(), 0);
            std::string name = layer_tensor_name(idx, suffix);
            if (nl.inserted && plan.init.kind == InitKind::DuplicateNoise)
                noisy.emplace_back(name, kernels::noise_stream_seed(plan.seed, idx, suffix));
            out.tensors.insert(std::move(name), std::move(t));
        }
    }
    for (const auto* e : tail) out.tensors.insert(e->first, e->second);

    if (!noisy.empty()) {
        std::vector<kernels::NoiseJob> jobs;
        for (const auto& [name, stream] : noisy) jobs.push_back({&out.tensors.at(name), stream});
        kernels::apply_noise_parallel(jobs, plan.init.noise_mean, plan.init.noise_mean);
    }
    return result;
}

std::uint64_t per_layer_parameters(const ModelConfig& c) {
    c.validate();
    const std::uint64_t h = c.hidden_size, inter = c.intermediate_size;
    const std::uint64_t kv = h * c.num_kv_heads / c.num_attention_heads;
    return 2 * h * h + 2 * h * kv + 3 * h * inter + 2 * h;
}

std::uint64_t count_parameters(const ModelConfig& c) {
    const std::uint64_t per_layer = per_layer_parameters(c);
    const std::uint64_t h = c.hidden_size, vocab = c.vocab_size;
    return 2 * vocab * h + h + static_cast<std::uint64_t>(c.num_layers) * per_layer;
}

}  // namespace babelkit
