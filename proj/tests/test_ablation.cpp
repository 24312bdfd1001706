#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "babelkit/ablation.hpp"
#include "babelkit/error.hpp"
#include "babelkit/reference_model.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace babelkit;

TEST_CASE("ablation grid has seven cells and a zero-deviation zeros cell") {
    const auto ckpt = make_toy_checkpoint(testing::toy_config(8), 1);
    const std::vector<double> means{0.01, 0.0001};
    const std::vector<std::uint64_t> seeds{1, 2, 3};
    const auto prompts = random_prompts(ckpt.config.vocab_size, 3, 6, 9);
    const auto report = ablation_grid(ckpt, 2, means, seeds, prompts);

    CHECK(report.cells.size() == 7);
    CHECK(report.positions == std::vector<int>{4, 6});
    const auto* zeros = report.find(InsertStrategy::AmongLayers, InitKind::Zeros);
    REQUIRE(zeros);
    CHECK(zeros->mean_abs == 0.0);
    CHECK(zeros->max_abs == 0.0);

    for (auto strategy : {InsertStrategy::AmongLayers, InsertStrategy::AfterModel}) {
        const auto* dup = report.find(strategy, InitKind::Duplicate);
        const auto* big = report.find(strategy, InitKind::DuplicateNoise, 0.01);
        const auto* small = report.find(strategy, InitKind::DuplicateNoise, 0.0001);
        REQUIRE(dup);
        REQUIRE(big);
        REQUIRE(small);
        CHECK(dup->mean_abs > 0.0);
        CHECK(big->per_seed_mean_abs.size() == 3);
        double avg = 0;
        for (double v : big->per_seed_mean_abs) avg += v;
        CHECK(big->mean_abs == doctest::Approx(avg / 3));
        // Duplicate cells do not depend on the seed.
        CHECK(dup->per_seed_mean_abs[0] == dup->per_seed_mean_abs[2]);
    }

    const auto j = ablation_to_json(report);
    CHECK(j["cells"].size() == 7);
}

TEST_CASE("ablation grid needs seeds and prompts") {
    const auto ckpt = make_toy_checkpoint(testing::toy_config(8), 1);
    const std::vector<double> means{0.01};
    const std::vector<std::uint64_t> seeds{1};
    const std::vector<TokenSequence> none;
    CHECK_THROWS_AS(ablation_grid(ckpt, 2, means, seeds, none), Error);
}

TEST_CASE("sign test p-values") {
    // 10 wins, 0 losses: 2^-10.
    std::vector<double> hi(10, 2.0), lo(10, 1.0);
    auto r = sign_test(hi, lo);
    CHECK(r.wins == 10);
    CHECK(r.p_value == doctest::Approx(1.0 / 1024));

    // 8 of 10: (C(10,8)+C(10,9)+C(10,10))/1024 = 56/1024.
    lo[0] = 3.0;
    lo[1] = 3.0;
    r = sign_test(hi, lo);
    CHECK(r.wins == 8);
    CHECK(r.losses == 2);
    CHECK(r.p_value == doctest::Approx(56.0 / 1024));

    // Ties are dropped.
    lo[0] = 2.0;
    r = sign_test(hi, lo);
    CHECK(r.ties == 1);
    CHECK(r.wins + r.losses == 9);
    CHECK(r.p_value == doctest::Approx(10.0 / 512));

    std::vector<double> eq(4, 1.0);
    CHECK(sign_test(eq, eq).p_value == 1.0);

    std::vector<double> shorter(3, 0.0);
    CHECK_THROWS_AS(sign_test(eq, shorter), Error);
}
