#pragma once

#include "babelkit/corpus.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace babelkit {

struct FilterRules {
    std::size_t min_chars = 100;
    double max_digit_ratio = 0.3;

    void validate() const;
};

enum class RejectReason { TooShort, TooManyDigits, Unscored, LowScore };
std::string_view reject_reason_name(RejectReason reason);

struct FilterVerdict {
    bool keep = true;
    RejectReason reason = RejectReason::TooShort;  // meaningful only when !keep
    std::string detail;

    static FilterVerdict accept() { return {}; }
    static FilterVerdict reject(RejectReason r, std::string detail) { return {false, r, std::move(detail)}; }
};

// Rule-based normalization check. Reports the first failed rule in the order
// TooShort, TooManyDigits. Throws a validation error on invalid UTF-8.
FilterVerdict normalize_filter(const Document& doc, const FilterRules& rules);

// id -> quality score, loaded from a JSONL sidecar of {"id", "score"} records.
using ScoreTable = std::unordered_map<std::string, double>;
ScoreTable read_score_sidecar(std::istream& in);

struct Rejection {
    std::string id;
    RejectReason reason;
    std::string detail;
};

struct FilterOutcome {
    std::vector<Document> kept;        // input order
    std::vector<Rejection> rejected;   // sorted by id
    std::map<std::string, std::size_t> counts;  // "kept" plus one entry per reason
};

// Keep iff score >= threshold. Sidecar scores take precedence over a document's own score;
// documents with neither are rejected as Unscored.
FilterOutcome score_gate(std::span<const Document> docs, double threshold, const ScoreTable* sidecar = nullptr);

struct CleanOptions {
    FilterRules rules;
    std::optional<double> score_threshold;  // gate disabled when empty
    const ScoreTable* sidecar = nullptr;
};

// normalize_filter over the whole corpus (parallel kernel), then the optional score gate.
FilterOutcome clean_corpus(std::span<const Document> docs, const CleanOptions& options);

void write_rejections(std::ostream& out, std::span<const Rejection> rejections);

}  // namespace babelkit
