#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "babelkit/dedup.hpp"
#include "babelkit/kernels.hpp"
#include "babelkit/parallel.hpp"
#include "babelkit/reference_model.hpp"
#include "test_support.hpp"

#include <cstdlib>

using namespace babelkit;

namespace {

const int kWidths[] = {1, 2, 8};

std::vector<std::vector<std::uint64_t>> shingle_sets() {
    const auto corpus = testing::planted_corpus(1);
    std::vector<std::vector<std::uint64_t>> sets;
    for (const auto& d : corpus.docs) sets.push_back(shingle_hashes(d.text, 5));
    sets.emplace_back();  // empty input
    return sets;
}

}  // namespace

TEST_CASE("minhash family is seeded and in range") {
    const auto f = kernels::MinHashFamily::from_seed(3, 64);
    CHECK(f.size() == 64);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(f.a[i] >= 1);
        CHECK(f.a[i] < kernels::kMersenne61);
        CHECK(f.b[i] < kernels::kMersenne61);
    }
    CHECK(kernels::MinHashFamily::from_seed(3, 64).a == f.a);
    CHECK_FALSE(kernels::MinHashFamily::from_seed(4, 64).a == f.a);
}

TEST_CASE("minhash matches a direct evaluation with 128-bit arithmetic") {
    const auto f = kernels::MinHashFamily::from_seed(7, 16);
    const std::vector<std::uint64_t> xs{1, 99, 0xFFFFFFFFFFFFFFFFull, 123456789012345ull};
    const auto sig = kernels::minhash(xs, f);
    for (std::size_t j = 0; j < f.size(); ++j) {
        std::uint64_t best = ~0ull;
        for (auto x : xs) {
            const unsigned __int128 v =
                (static_cast<unsigned __int128>(f.a[j]) * (x % kernels::kMersenne61) + f.b[j]) % kernels::kMersenne61;
            best = std::min(best, static_cast<std::uint64_t>(v));
        }
        CHECK(sig[j] == best);
    }
    CHECK(kernels::minhash({}, f).empty());
}

TEST_CASE("signature kernel: parallel equals serial at every width") {
    const auto sets = shingle_sets();
    const auto family = kernels::MinHashFamily::from_seed(1, 256);
    const auto reference = kernels::signatures_serial(sets, family);
    for (int w : kWidths) {
        ThreadScope scope(w);
        CHECK(kernels::signatures_parallel(sets, family) == reference);
    }
}

TEST_CASE("noise kernel: parallel equals serial at every width") {
    for (auto dtype : {DType::F32, DType::F16, DType::BF16}) {
        const auto base = make_toy_checkpoint(testing::toy_config(4), 5, dtype);
        auto run = [&](bool parallel) {
            auto ckpt = base;
            std::vector<kernels::NoiseJob> jobs;
            int i = 0;
            for (auto& [name, t] : ckpt.tensors) jobs.push_back({&t, kernels::noise_stream_seed(9, i++, name)});
            if (parallel) kernels::apply_noise_parallel(jobs, 0.01, 0.01);
            else kernels::apply_noise_serial(jobs, 0.01, 0.01);
            return ckpt;
        };
        const auto reference = run(false);
        CHECK_FALSE(reference == base);
        for (int w : kWidths) {
            ThreadScope scope(w);
            CHECK(run(true) == reference);
        }
    }
}

TEST_CASE("noise stream seeds separate layers and tensors") {
    CHECK(kernels::noise_stream_seed(1, 5, "mlp.up_proj.weight") != kernels::noise_stream_seed(1, 6, "mlp.up_proj.weight"));
    CHECK(kernels::noise_stream_seed(1, 5, "mlp.up_proj.weight") != kernels::noise_stream_seed(1, 5, "mlp.gate_proj.weight"));
    CHECK(kernels::noise_stream_seed(1, 5, "x") != kernels::noise_stream_seed(2, 5, "x"));
}

TEST_CASE("filter kernel: parallel equals serial at every width") {
    auto docs = testing::planted_corpus(2).docs;
    for (std::size_t i = 0; i < docs.size(); i += 3) docs[i].text = docs[i].text.substr(0, i % 150);
    for (std::size_t i = 1; i < docs.size(); i += 7) docs[i].text = testing::repeat("4", 90) + docs[i].text.substr(0, 120);
    const FilterRules rules;
    const auto reference = kernels::filter_serial(docs, rules);
    std::size_t rejected = 0;
    for (const auto& v : reference) rejected += !v.keep;
    CHECK(rejected > 0);
    for (int w : kWidths) {
        ThreadScope scope(w);
        const auto got = kernels::filter_parallel(docs, rules);
        REQUIRE(got.size() == reference.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].keep == reference[i].keep);
            CHECK(got[i].reason == reference[i].reason);
            CHECK(got[i].detail == reference[i].detail);
        }
    }
}

TEST_CASE("filter kernel propagates per-document errors") {
    std::vector<Document> docs(40, Document{"a", "fine text", "en", "web", std::nullopt, std::nullopt});
    docs[17].text = "bad \xff";
    ThreadScope scope(4);
    CHECK_THROWS(kernels::filter_parallel(docs, FilterRules{}));
}

TEST_CASE("thread configuration from the environment") {
    ::setenv("BABELKIT_THREADS", "3", 1);
    CHECK(configured_threads() == 3);
    ::unsetenv("BABELKIT_THREADS");
    CHECK(configured_threads() >= 1);
}
