#include "babelkit/ablation.hpp"

#include "babelkit/error.hpp"

#include <algorithm>
#include <cmath>

namespace babelkit {

using nlohmann::json;

const AblationCell* AblationReport::find(InsertStrategy strategy, InitKind kind, double noise_mean) const {
    for (const auto& c : cells)
        if (c.strategy == strategy && c.init.kind == kind && (kind != InitKind::DuplicateNoise || c.init.noise_mean == noise_mean))
            return &c;
    return nullptr;
}

json ablation_to_json(const AblationReport& r) {
    json cells = json::array();
    for (const auto& c : r.cells) {
        json cell = {{"strategy", c.strategy == InsertStrategy::AmongLayers ? "among_layers" : "after_model"},
                     {"init", c.init.describe()},
                     {"mean_abs", c.mean_abs},
                     {"max_abs", c.max_abs},
                     {"per_seed_mean_abs", c.per_seed_mean_abs}};
        if (c.init.kind == InitKind::DuplicateNoise) cell["noise_mean"] = c.init.noise_mean;
        cells.push_back(std::move(cell));
    }
    return {{"k", r.k}, {"positions", r.positions}, {"seeds", r.seeds}, {"num_prompts", r.num_prompts}, {"cells", cells}};
}

AblationReport ablation_grid(const Checkpoint& ckpt, int k, std::span<const double> means,
                             std::span<const std::uint64_t> seeds, std::span<const TokenSequence> prompts) {
    if (seeds.empty()) throw validation_error("ablation grid needs at least one seed");
    if (prompts.empty()) throw validation_error("ablation grid needs at least one prompt");

    AblationReport report;
    report.k = k;
    report.positions = plan_extension(ckpt.config, k).positions;
    report.seeds.assign(seeds.begin(), seeds.end());
    report.num_prompts = prompts.size();

    std::vector<InitMethod> inits{InitMethod::duplicate()};
    for (double m : means) inits.push_back(InitMethod::noise(m));

    auto run_cell = [&](InsertStrategy strategy, InitMethod init) {
        AblationCell cell{strategy, init, {}, 0.0, 0.0};
        for (auto seed : seeds) {
            ExtensionPlan plan;
            plan.strategy = strategy;
            plan.positions = report.positions;
            plan.count = k;
            plan.init = init;
            plan.seed = seed;
            const auto extended = apply_extension(ckpt, plan);
            const auto stats = compare_outputs(ckpt, extended.checkpoint, prompts);
            cell.per_seed_mean_abs.push_back(stats.mean_abs);
            cell.max_abs = std::max(cell.max_abs, stats.max_abs);
        }
        double sum = 0.0;
        for (double d : cell.per_seed_mean_abs) sum += d;
        cell.mean_abs = sum / static_cast<double>(cell.per_seed_mean_abs.size());
        report.cells.push_back(std::move(cell));
    };

    for (auto strategy : {InsertStrategy::AmongLayers, InsertStrategy::AfterModel})
        for (const auto& init : inits) run_cell(strategy, init);
    run_cell(InsertStrategy::AmongLayers, InitMethod::zeros());
    return report;
}

SignTestResult sign_test(std::span<const double> higher, std::span<const double> lower) {
    if (higher.size() != lower.size()) throw validation_error("sign test needs paired samples");
    SignTestResult r;
    for (std::size_t i = 0; i < higher.size(); ++i) {
        if (higher[i] > lower[i]) ++r.wins;
        else if (higher[i] < lower[i]) ++r.losses;
        else ++r.ties;
    }
    const int n = r.wins + r.losses;
    double p = 0.0;
    for (int x = r.wins; x <= n; ++x)
        p += std::exp(std::lgamma(n + 1.0) - std::lgamma(x + 1.0) - std::lgamma(n - x + 1.0) - n * std::log(2.0));
    r.p_value = n == 0 ? 1.0 : std::min(1.0, p);
    return r;
}

}  // namespace babelkit
