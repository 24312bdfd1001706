#include "babelkit/dedup.hpp"

#include "babelkit/error.hpp"
#include "babelkit/text.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace babelkit {

using nlohmann::json;

void MinHashParams::validate() const {
    if (shingle_k < 1) throw validation_error("shingle_k must be positive");
    if (num_perm < 1 || bands < 1 || rows < 1) throw validation_error("num_perm, bands and rows must be positive");
    if (bands * rows != num_perm)
        throw validation_error("bands * rows (" + std::to_string(bands * rows) + ") must equal num_perm (" +
                               std::to_string(num_perm) + ")");
    if (!(jaccard_threshold > 0.0 && jaccard_threshold <= 1.0))
        throw validation_error("jaccard_threshold must lie in (0, 1]");
}

void to_json(json& j, const MinHashParams& p) {
    j = json{{"shingle_k", p.shingle_k}, {"num_perm", p.num_perm},
             {"bands", p.bands},         {"rows", p.rows},
             {"jaccard_threshold", p.jaccard_threshold}, {"seed", p.seed}};
}

json report_to_json(const DedupReport& r) {
    json pairs = json::array();
    for (const auto& p : r.candidate_pairs) pairs.push_back({p.a, p.b, p.estimate});
    json removed = json::array();
    for (const auto& [id, rep] : r.removed) removed.push_back({{"id", id}, {"kept", rep}});
    return {{"exact_groups", r.exact_groups},
            {"candidate_pairs", pairs},
            {"clusters", r.clusters},
            {"kept", r.kept},
            {"removed", removed}};
}

std::string dedup_normal_form(std::string_view text) { return collapse_whitespace(text); }

ExactDedupResult exact_dedup(std::span<const Document> docs) {
    std::unordered_set<std::string> ids;
    for (const auto& d : docs)
        if (!ids.insert(d.id).second) throw validation_error("duplicate id '" + d.id + "'");

    std::vector<std::string> digests(docs.size());
    const auto n = static_cast<std::int64_t>(docs.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < n; ++i) digests[i] = to_hex(content_digest(dedup_normal_form(docs[i].text)));

    ExactDedupResult out;
    std::unordered_map<std::string, std::size_t> group_of;  // digest -> index in out.groups
    std::vector<std::size_t> first_index;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        auto [it, inserted] = group_of.emplace(digests[i], first_index.size());
        if (inserted) {
            first_index.push_back(i);
            out.groups.push_back({docs[i].id});
            out.survivors.push_back(i);
        } else {
            out.groups[it->second].push_back(docs[i].id);
        }
    }
    std::erase_if(out.groups, [](const auto& g) { return g.size() < 2; });
    return out;
}

std::vector<std::uint64_t> shingle_hashes(std::string_view text, int k) {
    const auto words = split_words(text);
    std::vector<std::uint64_t> out;
    if (words.size() < static_cast<std::size_t>(k)) return out;
    for (std::size_t i = 0; i + k <= words.size(); ++i) {
        std::string shingle = words[i];
        for (std::size_t j = 1; j < static_cast<std::size_t>(k); ++j) shingle += ' ' + words[i + j];
        out.push_back(hash64(shingle));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

kernels::Signature minhash_signature(const Document& doc, const MinHashParams& params) {
    params.validate();
    return kernels::minhash(shingle_hashes(doc.text, params.shingle_k),
                            kernels::MinHashFamily::from_seed(params.seed, params.num_perm));
}

double signature_match_fraction(const kernels::Signature& x, const kernels::Signature& y) {
    if (x.size() != y.size() || x.empty()) throw validation_error("signature length mismatch");
    std::size_t same = 0;
    for (std::size_t i = 0; i < x.size(); ++i) same += x[i] == y[i];
    return static_cast<double>(same) / static_cast<double>(x.size());
}

std::vector<CandidatePair> lsh_pairs(std::span<const std::string> ids, std::span<const kernels::Signature> sigs,
                                     const MinHashParams& params) {
    params.validate();
    if (ids.size() != sigs.size()) throw validation_error("ids and signatures differ in count");
    for (const auto& s : sigs)
        if (!s.empty() && s.size() != static_cast<std::size_t>(params.num_perm))
            throw validation_error("signature length mismatch: " + std::to_string(s.size()) + " vs num_perm " +
                                   std::to_string(params.num_perm));

    const auto rows = static_cast<std::size_t>(params.rows);
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> per_band(params.bands);

#pragma omp parallel for schedule(dynamic, 1)
    for (int band = 0; band < params.bands; ++band) {
        const std::size_t lo = band * rows;
        auto slice_equal = [&](std::uint32_t x, std::uint32_t y) {
            return std::equal(sigs[x].begin() + lo, sigs[x].begin() + lo + rows, sigs[y].begin() + lo);
        };
        std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
        for (std::uint32_t i = 0; i < sigs.size(); ++i) {
            if (sigs[i].empty()) continue;
            std::uint64_t key = mix64(static_cast<std::uint64_t>(band));
            for (std::size_t r = 0; r < rows; ++r) key = mix64(key ^ sigs[i][lo + r]);
            buckets[key].push_back(i);
        }
        auto& out = per_band[band];
        for (const auto& [key, members] : buckets)
            for (std::size_t x = 0; x < members.size(); ++x)
                for (std::size_t y = x + 1; y < members.size(); ++y)
                    if (slice_equal(members[x], members[y])) out.emplace_back(members[x], members[y]);
    }

    std::set<std::pair<std::uint32_t, std::uint32_t>> unique;
    for (const auto& band : per_band) unique.insert(band.begin(), band.end());

    std::vector<CandidatePair> pairs;
    for (auto [x, y] : unique) {
        const double estimate = signature_match_fraction(sigs[x], sigs[y]);
        if (estimate < params.jaccard_threshold) continue;
        const auto& [a, b] = std::minmax(ids[x], ids[y]);
        pairs.push_back({a, b, estimate});
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const CandidatePair& p, const CandidatePair& q) { return std::tie(p.a, p.b) < std::tie(q.a, q.b); });
    return pairs;
}

std::vector<std::vector<std::string>> build_clusters(std::span<const CandidatePair> pairs) {
    // Adjacency lists over string ids; components found by iterative depth-first search.
    std::map<std::string, std::vector<std::string>> adjacency;
    for (const auto& p : pairs) {
        adjacency[p.a].push_back(p.b);
        adjacency[p.b].push_back(p.a);
    }
    std::set<std::string> visited;
    std::vector<std::vector<std::string>> clusters;
    for (const auto& [start, _] : adjacency) {
        if (visited.contains(start)) continue;
        std::vector<std::string> component, stack{start};
        visited.insert(start);
        while (!stack.empty()) {
            std::string node = std::move(stack.back());
            stack.pop_back();
            for (const auto& next : adjacency[node])
                if (visited.insert(next).second) stack.push_back(next);
            component.push_back(std::move(node));
        }
        if (component.size() < 2) continue;
        std::sort(component.begin(), component.end());
        clusters.push_back(std::move(component));
    }
    std::sort(clusters.begin(), clusters.end());
    return clusters;
}

DedupResult dedup(std::span<const Document> docs, const MinHashParams& params) {
    params.validate();
    DedupResult result;
    ExactDedupResult exact = exact_dedup(docs);
    result.report.exact_groups = exact.groups;

    std::map<std::string, std::string> removed;  // id -> representative
    for (const auto& group : exact.groups)
        for (std::size_t i = 1; i < group.size(); ++i) removed[group[i]] = group[0];

    // Near-duplicate detection runs per language shard.
    std::map<std::string, std::vector<std::size_t>> shards;
    for (std::size_t idx : exact.survivors) shards[docs[idx].lang].push_back(idx);

    const auto family = kernels::MinHashFamily::from_seed(params.seed, params.num_perm);
    std::vector<CandidatePair> pairs;
    for (const auto& [lang, members] : shards) {
        std::vector<std::vector<std::uint64_t>> shingles(members.size());
        const auto n = static_cast<std::int64_t>(members.size());
#pragma omp parallel for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < n; ++i) shingles[i] = shingle_hashes(docs[members[i]].text, params.shingle_k);
        const auto sigs = kernels::signatures_parallel(shingles, family);

        std::vector<std::string> ids;
        for (std::size_t idx : members) ids.push_back(docs[idx].id);
        auto shard_pairs = lsh_pairs(ids, sigs, params);
        pairs.insert(pairs.end(), shard_pairs.begin(), shard_pairs.end());
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const CandidatePair& p, const CandidatePair& q) { return std::tie(p.a, p.b) < std::tie(q.a, q.b); });
    result.report.candidate_pairs = pairs;
    result.report.clusters = build_clusters(pairs);

    for (const auto& cluster : result.report.clusters)
        for (std::size_t i = 1; i < cluster.size(); ++i) removed[cluster[i]] = cluster[0];

    for (const auto& d : docs) {
        if (removed.contains(d.id)) continue;
        result.kept.push_back(d);
        result.report.kept.push_back(d.id);
    }
    result.report.removed.assign(removed.begin(), removed.end());
    return result;
}

void write_pairs_tsv(std::ostream& out, std::span<const CandidatePair> pairs) {
    for (const auto& p : pairs) out << p.a << '\t' << p.b << '\t' << json(p.estimate).dump() << '\n';
}

}  // namespace babelkit
