#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "babelkit/dedup.hpp"
#include "babelkit/error.hpp"
#include "test_support.hpp"

#include <random>
#include <set>

using namespace babelkit;

namespace {

Document doc(std::string id, std::string text, std::string lang = "en") {
    return {std::move(id), std::move(text), std::move(lang), "web", std::nullopt, std::nullopt};
}

double estimate(const std::string& a, const std::string& b, std::uint64_t seed = 0) {
    MinHashParams p;
    p.seed = seed;
    return signature_match_fraction(minhash_signature(doc("a", a), p), minhash_signature(doc("b", b), p));
}

}  // namespace

TEST_CASE("exact dedup groups whitespace variants and keeps the first") {
    std::vector<Document> docs{doc("z", "hello  world"), doc("a", "other"), doc("m", " hello world\n"),
                               doc("b", "hello\tworld")};
    const auto r = exact_dedup(docs);
    CHECK(r.survivors == std::vector<std::size_t>{0, 1});
    REQUIRE(r.groups.size() == 1);
    CHECK(r.groups[0] == std::vector<std::string>{"z", "m", "b"});
    CHECK(dedup_normal_form("  a \n b ") == "a b");
}

TEST_CASE("exact dedup matches canonically equivalent text") {
    std::vector<Document> docs{doc("x", "caf\xc3\xa9"), doc("y", "cafe\xcc\x81")};
    CHECK(exact_dedup(docs).survivors.size() == 1);
}

TEST_CASE("exact dedup refuses duplicate ids") {
    std::vector<Document> docs{doc("x", "a"), doc("x", "b")};
    CHECK_THROWS_AS(exact_dedup(docs), Error);
}

TEST_CASE("shingles") {
    CHECK(shingle_hashes("a b c d", 5).empty());
    CHECK(shingle_hashes("a b c d e", 5).size() == 1);
    CHECK(shingle_hashes("a b c d e a b c d e", 5).size() == 5);
    const auto h = shingle_hashes("one two three four five six seven", 5);
    CHECK(h.size() == 3);
    CHECK(std::is_sorted(h.begin(), h.end()));
}

TEST_CASE("signature estimates track the true Jaccard") {
    auto [a0, b0] = testing::constructed_pair("p0", 150, 0);
    auto [a5, b5] = testing::constructed_pair("p5", 150, 100);
    auto [a1, b1] = testing::constructed_pair("p1", 150, 150);
    CHECK(testing::exact_jaccard(testing::shingle_strings(a5), testing::shingle_strings(b5)) == 0.5);
    CHECK(std::abs(estimate(a0, b0) - 0.0) <= 0.1);
    CHECK(std::abs(estimate(a5, b5) - 0.5) <= 0.1);
    CHECK(estimate(a1, b1) == 1.0);
}

TEST_CASE("signatures depend on the seed but not on whitespace") {
    const std::string t = testing::constructed_pair("s", 40, 0).first;
    MinHashParams p;
    CHECK(minhash_signature(doc("a", t), p) == minhash_signature(doc("b", "  " + t + "\n"), p));
    MinHashParams q = p;
    q.seed = 1;
    CHECK_FALSE(minhash_signature(doc("a", t), p) == minhash_signature(doc("a", t), q));
    CHECK(minhash_signature(doc("a", "too few words"), p).empty());
}

TEST_CASE("parameter validation") {
    MinHashParams p;
    p.bands = 30;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.jaccard_threshold = 1.5;
    CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("lsh finds identical documents and drops unrelated ones") {
    MinHashParams p;
    auto [a, b] = testing::constructed_pair("l", 120, 0);
    auto [c, d] = testing::constructed_pair("m", 120, 116);  // Jaccard 116/124
    std::vector<std::string> ids{"a", "b", "c", "d", "e"};
    std::vector<kernels::Signature> sigs;
    for (const auto& t : {a, b, c, d, a}) sigs.push_back(minhash_signature(doc("?", t), p));
    const auto pairs = lsh_pairs(ids, sigs, p);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0] == CandidatePair{"a", "e", 1.0});
    CHECK(pairs[1].a == "c");
    CHECK(pairs[1].b == "d");
    CHECK(pairs[1].estimate >= 0.8);
}

TEST_CASE("clusters equal union-find components on random graphs") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(gen() % 40);
        const int m = static_cast<int>(gen() % 50);
        std::set<std::pair<std::string, std::string>> edges;
        testing::UnionFind uf;
        for (int e = 0; e < m; ++e) {
            auto x = "n" + std::to_string(gen() % n), y = "n" + std::to_string(gen() % n);
            if (x == y) continue;
            if (y < x) std::swap(x, y);
            edges.insert({x, y});
            uf.unite(x, y);
        }
        std::vector<CandidatePair> pairs;
        for (const auto& [x, y] : edges) pairs.push_back({x, y, 0.9});
        CHECK(build_clusters(pairs) == uf.components());
    }
}

TEST_CASE("pipeline partitions the corpus and is deterministic") {
    const auto corpus = testing::planted_corpus(3);
    MinHashParams p;
    p.seed = 42;
    const auto first = dedup(corpus.docs, p);
    const auto second = dedup(corpus.docs, p);
    CHECK(report_to_json(first.report).dump() == report_to_json(second.report).dump());

    std::set<std::string> kept, removed;
    for (const auto& d : first.kept) kept.insert(d.id);
    for (const auto& [id, rep] : first.report.removed) {
        removed.insert(id);
        CHECK(kept.count(rep));
        CHECK_FALSE(kept.count(id));
    }
    CHECK(kept.size() + removed.size() == corpus.docs.size());
    CHECK(first.report.kept.size() == first.kept.size());

    // Each near-duplicate cluster keeps its smallest id.
    for (const auto& cluster : first.report.clusters) {
        CHECK(kept.count(cluster.front()));
        for (std::size_t i = 1; i < cluster.size(); ++i) CHECK(removed.count(cluster[i]));
    }
}

TEST_CASE("documents in different languages are never near-duplicate candidates") {
    const auto t = testing::constructed_pair("x", 60, 0).first;
    std::vector<Document> docs{doc("a", t, "en"), doc("b", t + " tail", "sw")};
    const auto r = dedup(docs, MinHashParams{});
    CHECK(r.kept.size() == 2);
    CHECK(r.report.candidate_pairs.empty());
}

TEST_CASE("exact-only corpus produces no candidate pairs") {
    std::mt19937_64 gen(1);
    std::vector<Document> docs;
    for (int i = 0; i < 20; ++i) {
        const auto text = testing::random_words(gen, 80);
        docs.push_back(doc("u" + std::to_string(i), text));
        docs.push_back(doc("v" + std::to_string(i), text + "  "));
    }
    const auto r = dedup(docs, MinHashParams{});
    CHECK(r.kept.size() == 20);
    CHECK(r.report.candidate_pairs.empty());
    CHECK(r.report.exact_groups.size() == 20);
}
