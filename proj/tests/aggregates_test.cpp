#include "doctest.h"

#include <algorithm>

#include "cpnet/aggregates.hpp"
#include "cpnet/generators.hpp"
#include "cpnet/oracles.hpp"

using namespace cpnet;

TEST_CASE("rank: values equal to new ids rank as themselves") {
    auto net = gen_cp(64, 1);
    CpRuntime rt(net, 1);
    std::vector<Word> values(static_cast<std::size_t>(net.n));
    for (NodeId v = 0; v < net.n; ++v) values[static_cast<std::size_t>(v)] = rt.new_id(v);
    auto res = rank_values(rt, values);
    for (NodeId v = 0; v < net.n; ++v)
        CHECK(res.rank[static_cast<std::size_t>(v)] == rt.new_id(v));
}

TEST_CASE("rank: all-equal values rank by holder id") {
    auto net = gen_cp(36, 2);
    CpRuntime rt(net, 2);
    std::vector<Word> values(static_cast<std::size_t>(net.n), 7);
    auto res = rank_values(rt, values);
    for (NodeId v = 0; v < net.n; ++v)
        CHECK(res.rank[static_cast<std::size_t>(v)] == v + 1);
}

TEST_CASE("rank: random values match the centralized argsort") {
    auto net = gen_cp(256, 3);
    CpRuntime rt(net, 3);
    Rng rng(42);
    std::vector<Word> values;
    for (int i = 0; i < net.n; ++i) values.push_back(static_cast<Word>(rng.below(64)) + 1);
    auto res = rank_values(rt, values);
    CHECK(res.rank == oracle::sort_ranks(values));
}

TEST_CASE("median: 1..n gives ceil(n/2), constants stay constant") {
    auto net = gen_cp(256, 4);
    CpRuntime rt(net, 4);
    std::vector<Word> values;
    for (int i = 1; i <= net.n; ++i) values.push_back(i);
    Rng shuffler(8);
    shuffler.shuffle(values);
    auto res = median_value(rt, values);
    CHECK(res.median == 128);

    std::vector<Word> flat(static_cast<std::size_t>(net.n), 5);
    auto net2 = gen_cp(256, 4);
    CpRuntime rt2(net2, 5);
    CHECK(median_value(rt2, flat).median == 5);
}

TEST_CASE("median: random multiset equals the oracle at both desk sizes") {
    for (int n : {64, 1024}) {
        auto net = gen_cp(n, 6);
        CpRuntime rt(net, 6);
        Rng rng(n);
        std::vector<Word> values;
        for (int i = 0; i < n; ++i) values.push_back(static_cast<Word>(rng.below(200)) + 1);
        auto res = median_value(rt, values);
        CHECK(res.median == oracle::median_c(values));
    }
}

TEST_CASE("mode: all distinct signals frequency one without error") {
    auto net = gen_cp(64, 7);
    CpRuntime rt(net, 7);
    std::vector<Word> values;
    for (int i = 1; i <= net.n; ++i) values.push_back(i);
    auto res = mode_values(rt, values);
    CHECK(res.frequency == 1);
    CHECK(res.values.empty());
    CHECK_FALSE(res.complete);
}

TEST_CASE("mode: a value repeated n/2 times dominates") {
    auto net = gen_cp(64, 8);
    CpRuntime rt(net, 8);
    std::vector<Word> values;
    for (int i = 0; i < net.n; ++i) values.push_back(i < 32 ? 9 : 100 + i);
    auto res = mode_values(rt, values);
    CHECK(res.frequency == 32);
    CHECK(res.values == std::vector<Word>{9});
}

TEST_CASE("mode: runs spanning several sorted blocks merge exactly") {
    auto net = gen_cp(36, 9);  // 6 blocks of 6
    CpRuntime rt(net, 9);
    // Value 50 fills three blocks and spills into neighbors; 7 competes.
    std::vector<Word> values;
    for (int i = 0; i < 20; ++i) values.push_back(50);
    for (int i = 0; i < 10; ++i) values.push_back(7);
    for (int i = 0; static_cast<int>(values.size()) < net.n; ++i) values.push_back(200 + i);
    Rng rng(4);
    rng.shuffle(values);
    auto res = mode_values(rt, values);
    auto expect = oracle::mode_c(values);
    CHECK(res.frequency == expect.frequency);
    CHECK(res.values == expect.values);
}

TEST_CASE("mode: random small-alphabet instances equal brute force") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto net = gen_cp(100, seed);
        CpRuntime rt(net, seed);
        Rng rng(seed * 3 + 1);
        std::vector<Word> values;
        for (int i = 0; i < net.n; ++i) values.push_back(static_cast<Word>(rng.below(7)) + 1);
        auto res = mode_values(rt, values);
        auto expect = oracle::mode_c(values);
        CHECK(res.frequency == expect.frequency);
        if (static_cast<int>(expect.values.size()) <= kModeBudget) {
            CHECK(res.complete);
            CHECK(res.values == expect.values);
        }
    }
}

TEST_CASE("distinct: degenerate and random inputs") {
    auto net = gen_cp(64, 1);
    {
        CpRuntime rt(net, 2);
        std::vector<Word> same(static_cast<std::size_t>(net.n), 3);
        CHECK(distinct_count(rt, same).count == 1);
    }
    {
        CpRuntime rt(net, 3);
        std::vector<Word> all;
        for (int i = 1; i <= net.n; ++i) all.push_back(i);
        CHECK(distinct_count(rt, all).count == net.n);
    }
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto big = gen_cp(512, seed);
        CpRuntime rt(big, seed);
        Rng rng(seed + 100);
        std::vector<Word> values;
        for (int i = 0; i < big.n; ++i) values.push_back(static_cast<Word>(rng.below(9)) + 1);
        CHECK(distinct_count(rt, values).count == oracle::distinct_c(values));
    }
}

TEST_CASE("topk: r = 1 returns each area's maximum") {
    auto net = gen_cp(64, 5);
    CpRuntime rt(net, 5);
    const int areas = 8;  // ceil(sqrt(64))
    ValueAssignment in;
    Rng rng(17);
    for (int i = 0; i < net.n; ++i) {
        int a = static_cast<int>(rng.below(areas)) + 1;
        in.areas.push_back(a);
        in.values.push_back(a * 100 + static_cast<Word>(rng.below(50)) + 1);
        in.interests.push_back(static_cast<int>(rng.below(areas)) + 1);
    }
    auto res = topk_by_area(rt, in, 1);
    auto expect = oracle::topk_c(in.values, in.areas, 1);
    for (NodeId v = 0; v < net.n; ++v) {
        int want = in.interests[static_cast<std::size_t>(v)];
        REQUIRE(res.top[static_cast<std::size_t>(v)].size() == 1);
        Word got = res.top[static_cast<std::size_t>(v)][0];
        if (expect.count(want))
            CHECK(got == expect.at(want)[0]);
        else
            CHECK(got == TopkResult::kAbsent);
    }
}

TEST_CASE("topk: under-full areas are padded with the absent marker") {
    auto net = gen_cp(36, 6);
    CpRuntime rt(net, 6);
    ValueAssignment in;
    for (int i = 0; i < net.n; ++i) {
        in.areas.push_back(1 + (i % 2));  // two areas only
        in.values.push_back((1 + (i % 2)) * 1000 + i + 1);
        in.interests.push_back(3);  // an empty area
    }
    in.areas[0] = 3;
    in.values[0] = 3001;  // area 3 holds exactly one value
    auto res = topk_by_area(rt, in, 4);
    for (NodeId v = 0; v < net.n; ++v) {
        REQUIRE(res.top[static_cast<std::size_t>(v)].size() == 4);
        CHECK(res.top[static_cast<std::size_t>(v)][0] == 3001);
        for (int t = 1; t < 4; ++t)
            CHECK(res.top[static_cast<std::size_t>(v)][static_cast<std::size_t>(t)] ==
                  TopkResult::kAbsent);
    }
}

TEST_CASE("topk: random instances with split areas equal brute force") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto net = gen_cp(256, seed);
        CpRuntime rt(net, seed + 50);
        const int areas = 16;
        ValueAssignment in;
        Rng rng(seed * 7 + 2);
        for (int i = 0; i < net.n; ++i) {
            int a = static_cast<int>(rng.below(areas)) + 1;
            in.areas.push_back(a);
            in.values.push_back(a * 1000 + static_cast<Word>(rng.below(900)) + 1);
            in.interests.push_back(static_cast<int>(rng.below(areas)) + 1);
        }
        auto res = topk_by_area(rt, in, 4);
        auto expect = oracle::topk_c(in.values, in.areas, 4);
        for (NodeId v = 0; v < net.n; ++v) {
            int want = in.interests[static_cast<std::size_t>(v)];
            std::vector<Word> want_vals =
                expect.count(want) ? expect.at(want) : std::vector<Word>{};
            while (want_vals.size() < 4) want_vals.push_back(TopkResult::kAbsent);
            CHECK(res.top[static_cast<std::size_t>(v)] == want_vals);
        }
    }
}

TEST_CASE("aggregate outputs agree at every node") {
    auto net = gen_cp(64, 9);
    Rng rng(31);
    std::vector<Word> values;
    for (int i = 0; i < net.n; ++i) values.push_back(static_cast<Word>(rng.below(10)) + 1);
    // Median, mode and distinct all broadcast one answer; the per-node delivery
    // is checked through the wave result inside each op, and the op returns the
    // single agreed value. Rank instead must be a bijection.
    CpRuntime rt(net, 11);
    auto ranks = rank_values(rt, values);
    std::vector<long long> sorted_ranks = ranks.rank;
    std::sort(sorted_ranks.begin(), sorted_ranks.end());
    for (int i = 0; i < net.n; ++i) CHECK(sorted_ranks[static_cast<std::size_t>(i)] == i + 1);
}

TEST_CASE("aggregates reject out-of-range values") {
    auto net = gen_cp(16, 1);
    CpRuntime rt(net, 1);
    std::vector<Word> bad(static_cast<std::size_t>(net.n), 0);
    CHECK_THROWS_AS(rank_values(rt, bad), PayloadOverflow);
}
