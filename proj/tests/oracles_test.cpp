#include "doctest.h"

#include "cpnet/generators.hpp"
#include "cpnet/oracles.hpp"

using namespace cpnet;
using namespace cpnet::oracle;

TEST_CASE("kruskal: triangle and star") {
    PartitionedNetwork tri(3);
    tri.set_core(0);
    tri.add_edge(0, 1);
    tri.add_edge(1, 2);
    tri.add_edge(0, 2);
    tri.set_weight(0, 1, 1);
    tri.set_weight(1, 2, 2);
    tri.set_weight(0, 2, 3);
    auto mst = kruskal_mst(tri);
    CHECK(mst == std::set<EdgeKey>{{0, 1}, {1, 2}});

    PartitionedNetwork star(5);
    star.set_core(0);
    for (NodeId v = 1; v < 5; ++v) {
        star.add_edge(0, v);
        star.set_weight(0, v, v * 10);
    }
    CHECK(kruskal_mst(star).size() == 4);
}

TEST_CASE("kruskal on G_E keeps all s-edges and exactly one r-edge") {
    auto net = gen_GE(3);
    auto mst = kruskal_mst(net);
    NodeId s = net.special.at("s");
    NodeId r = net.special.at("r");
    int s_edges = 0, r_edges = 0;
    for (const auto& [u, v] : mst) {
        if (u == s || v == s) ++s_edges;
        if (u == r || v == r) ++r_edges;
    }
    CHECK(s_edges == net.degree(s));
    CHECK(r_edges == 1);
    CHECK(static_cast<int>(mst.size()) == net.n - 1);
}

TEST_CASE("dense matrix oracles") {
    DenseEntries I, A;
    for (int i = 1; i <= 4; ++i) I[{i, i}] = 1;
    A[{1, 2}] = 5;
    A[{3, 4}] = 7;
    A[{2, 1}] = 2;
    CHECK(dense_mm(I, A, 4, 1000) == A);
    CHECK(dense_mm(A, I, 4, 1000) == A);
    CHECK(dense_transpose(A) == DenseEntries{{{2, 1}, 5}, {{4, 3}, 7}, {{1, 2}, 2}});
    std::vector<Word> s{1, 1, 1, 1};
    auto sv = dense_vmm(s, A, 4, 1000);
    CHECK(sv == std::vector<Word>{2, 5, 0, 7});
}

TEST_CASE("aggregate oracles on tiny inputs") {
    CHECK(mode_c({1, 1, 2}).frequency == 2);
    CHECK(mode_c({1, 1, 2}).values == std::vector<Word>{1});
    CHECK(median_c({5, 1, 3}) == 3);
    CHECK(median_c({4, 1, 3, 2}) == 2);  // rank ceil(4/2) = 2
    CHECK(distinct_c({7, 7, 7}) == 1);
    CHECK(distinct_c({1, 2, 3}) == 3);
    auto ranks = sort_ranks({30, 10, 20, 10});
    CHECK(ranks == std::vector<long long>{4, 1, 3, 2});
}

TEST_CASE("topk oracle cross-checked against an independent recomputation") {
    Rng rng(99);
    const int n = 64;
    std::vector<Word> values;
    std::vector<int> areas;
    for (int i = 0; i < n; ++i) {
        int a = static_cast<int>(rng.below(8)) + 1;
        areas.push_back(a);
        values.push_back(static_cast<Word>(a * 1000 + static_cast<Word>(rng.below(100))));
    }
    auto got = topk_c(values, areas, 4);
    // Second route: full sort per area, then truncate.
    std::map<int, std::vector<Word>> expect;
    for (int i = 0; i < n; ++i) expect[areas[static_cast<std::size_t>(i)]].push_back(values[static_cast<std::size_t>(i)]);
    for (auto& [a, vs] : expect) {
        std::sort(vs.begin(), vs.end());
        std::reverse(vs.begin(), vs.end());
        if (vs.size() > 4) vs.resize(4);
    }
    CHECK(got == expect);
}
