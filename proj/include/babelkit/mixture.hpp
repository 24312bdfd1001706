#pragma once

#include "babelkit/corpus.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace babelkit {

inline constexpr std::array<std::string_view, 5> kCategories = {"web", "news", "wiki", "textbook", "other"};

using CellKey = std::pair<std::string, std::string>;  // (lang, category)

struct CorpusStats {
    std::string unit = "tokens";
    std::map<CellKey, std::uint64_t> available;

    std::map<std::string, std::uint64_t> language_totals() const;
    std::uint64_t total() const;
    void validate() const;
};

// {"unit": ..., "available": {lang: {category: count}}}
nlohmann::json stats_to_json(const CorpusStats& stats);
CorpusStats stats_from_json(const nlohmann::json& j);

// Token availability per (lang, category) for a corpus.
CorpusStats corpus_stats(std::span<const Document> docs);

struct MixturePlan {
    int stage = 1;
    std::uint64_t budget = 0;
    double low_boost = 1.0;
    double textbook_boost = 1.0;
    std::map<CellKey, std::uint64_t> allocations;

    std::uint64_t total() const;
    std::map<std::string, std::uint64_t> language_totals() const;
    bool operator==(const MixturePlan&) const = default;
};
nlohmann::json plan_to_json(const MixturePlan& plan);
MixturePlan plan_from_json(const nlohmann::json& j);

// Max-min fair allocation: s_i = min(a_i, c) with sum s_i = min(budget, sum a_i).
std::vector<double> water_fill(std::span<const double> availability, double budget);

// Integer water-filling; the leftover units below the water level go to the lowest indices.
std::vector<std::uint64_t> water_fill_integer(std::span<const std::uint64_t> availability, std::uint64_t budget);

// Largest-remainder rounding of real targets to integers summing to `total`, never exceeding caps.
// Ties are broken by index.
std::vector<std::uint64_t> largest_remainder(std::span<const long double> targets, std::uint64_t total,
                                             std::span<const std::uint64_t> caps);

// Stage 1: languages as equal as availability allows; within a language, categories in
// proportion to their availability.
MixturePlan stage1_allocation(const CorpusStats& stats, std::uint64_t budget);

// Stage 2: stage-1 shares re-weighted by low_boost (low-resource languages) and textbook_boost
// (textbook category), renormalized, and capped by availability with redistribution.
MixturePlan stage2_allocation(const CorpusStats& stats, std::uint64_t budget, double low_boost,
                              double textbook_boost);

// "150", "10K", "1.5M", "2B" (decimal multiples).
std::uint64_t parse_budget(std::string_view text);

struct ManifestCell {
    std::string lang;
    std::string category;
    std::uint64_t allocation = 0;
    std::uint64_t tokens = 0;  // sum over selected documents
    std::vector<std::string> ids;
};

struct SampleManifest {
    std::uint64_t seed = 0;
    std::vector<ManifestCell> cells;  // plan cell order
};
nlohmann::json manifest_to_json(const SampleManifest& manifest);

// Each cell draws documents in a seeded pseudo-random order (keyed by document id, so the
// order of the index does not matter) until its allocation is met.
SampleManifest sample_manifest(const MixturePlan& plan, std::span<const Document> index, std::uint64_t seed);

}  // namespace babelkit
