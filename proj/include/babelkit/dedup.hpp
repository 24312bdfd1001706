#pragma once

#include "babelkit/corpus.hpp"
#include "babelkit/kernels.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace babelkit {

struct MinHashParams {
    int shingle_k = 5;  // word-level
    int num_perm = 256;
    int bands = 32;
    int rows = 8;
    double jaccard_threshold = 0.8;
    std::uint64_t seed = 0;

    void validate() const;
};
void to_json(nlohmann::json& j, const MinHashParams& p);

struct CandidatePair {
    std::string a;  // a < b
    std::string b;
    double estimate;

    bool operator==(const CandidatePair&) const = default;
};

struct DedupReport {
    std::vector<std::vector<std::string>> exact_groups;  // survivor first, then input order
    std::vector<CandidatePair> candidate_pairs;          // sorted by (a, b)
    std::vector<std::vector<std::string>> clusters;      // each sorted; ordered by first id
    std::vector<std::string> kept;                       // input order
    std::vector<std::pair<std::string, std::string>> removed;  // (id, kept representative), sorted by id
};
nlohmann::json report_to_json(const DedupReport& report);

// Text form hashed by exact dedup: NFC with whitespace runs collapsed.
std::string dedup_normal_form(std::string_view text);

struct ExactDedupResult {
    std::vector<std::size_t> survivors;  // indices into the input, input order
    std::vector<std::vector<std::string>> groups;
};
// Groups documents by 128-bit digest of dedup_normal_form(text). Throws on duplicate ids.
ExactDedupResult exact_dedup(std::span<const Document> docs);

// Sorted, unique hashes of the word k-shingles; empty when the text has fewer than k words.
std::vector<std::uint64_t> shingle_hashes(std::string_view text, int k);

kernels::Signature minhash_signature(const Document& doc, const MinHashParams& params);

// Fraction of matching signature positions.
double signature_match_fraction(const kernels::Signature& x, const kernels::Signature& y);

// Banded LSH: a pair is a candidate iff some band's row slices are equal. Candidates whose
// estimate falls below the threshold are dropped. Documents with empty signatures are skipped.
std::vector<CandidatePair> lsh_pairs(std::span<const std::string> ids, std::span<const kernels::Signature> signatures,
                                     const MinHashParams& params);

// Connected components (size >= 2) of the undirected pair graph.
std::vector<std::vector<std::string>> build_clusters(std::span<const CandidatePair> pairs);

struct DedupResult {
    std::vector<Document> kept;
    DedupReport report;
};
// exact_dedup -> per-language signatures -> lsh_pairs -> build_clusters -> keep smallest id per cluster.
DedupResult dedup(std::span<const Document> docs, const MinHashParams& params);

void write_pairs_tsv(std::ostream& out, std::span<const CandidatePair> pairs);

}  // namespace babelkit
