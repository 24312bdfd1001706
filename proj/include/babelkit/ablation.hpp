#pragma once

#include "babelkit/reference_model.hpp"
#include "babelkit/surgery.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace babelkit {

struct AblationCell {
    InsertStrategy strategy;
    InitMethod init;
    std::vector<double> per_seed_mean_abs;  // aligned with AblationReport::seeds
    double mean_abs = 0.0;                  // average of per_seed_mean_abs
    double max_abs = 0.0;                   // over all seeds and prompts
};

struct AblationReport {
    int k = 0;
    std::vector<int> positions;
    std::vector<std::uint64_t> seeds;
    std::size_t num_prompts = 0;
    std::vector<AblationCell> cells;

    const AblationCell* find(InsertStrategy strategy, InitKind kind, double noise_mean = 0.0) const;
};
nlohmann::json ablation_to_json(const AblationReport& report);

// Grid {AmongLayers, AfterModel} x {Duplicate, DuplicateNoise(mean) for each mean} plus one
// Zeros cell (AmongLayers), each measured as logit deviation from the unextended model.
AblationReport ablation_grid(const Checkpoint& ckpt, int k, std::span<const double> means,
                             std::span<const std::uint64_t> seeds, std::span<const TokenSequence> prompts);

// One-sided paired sign test of H1: higher[i] > lower[i]. Ties are dropped.
struct SignTestResult {
    int wins = 0;
    int losses = 0;
    int ties = 0;
    double p_value = 1.0;  // P(X >= wins), X ~ Binomial(wins + losses, 1/2)
};
SignTestResult sign_test(std::span<const double> higher, std::span<const double> lower);

}  // namespace babelkit
