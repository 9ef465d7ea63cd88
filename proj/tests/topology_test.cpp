#include "doctest.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "cpnet/generators.hpp"
#include "cpnet/network.hpp"

using namespace cpnet;

TEST_CASE("gen_cp(36) matches the 36-node reference layout") {
    auto net = gen_cp(36, 1);
    CHECK(net.n == 36);
    CHECK(net.n_core() == 6);
    CHECK(net.core_is_clique());
    for (NodeId v : net.core_nodes()) {
        CHECK(net.d_in_core(v) == 5);
        CHECK(net.d_out_core(v) == 5);
    }
    for (NodeId v : net.periphery_nodes()) {
        CHECK(net.degree(v) == 1);
        CHECK(net.is_core(net.adj[static_cast<std::size_t>(v)][0]));
    }
}

TEST_CASE("gen_cp(9) is the smallest balanced instance") {
    auto net = gen_cp(9, 0);
    CHECK(net.n_core() == 3);
    for (NodeId v : net.core_nodes()) CHECK(net.d_out_core(v) == 2);
    CHECK_THROWS_AS(gen_cp(8, 0), CongestError);
}

TEST_CASE("gen_cp(1024) structural counts and diameter") {
    auto net = gen_cp(1024, 7);
    CHECK(net.n_core() == 32);
    CHECK(net.m() == 32 * 31 / 2 + 992);
    CHECK(net.m() == 1488);
    CHECK(diameter(net) <= 3);
}

TEST_CASE("ambassador loads differ by at most one") {
    auto net = gen_cp(100, 5);
    std::vector<int> load;
    for (NodeId v : net.core_nodes()) load.push_back(net.d_out_core(v));
    auto [lo, hi] = std::minmax_element(load.begin(), load.end());
    CHECK(*hi - *lo <= 1);
}

TEST_CASE("lollipop: clique plus line") {
    auto net = gen_lollipop(25);
    CHECK(net.n == 25);
    CHECK(net.n_core() == 5);
    CHECK(net.core_is_clique());
    CHECK(net.n_periphery() == 20);
    CHECK(diameter(net) == 21);

    auto tiny = gen_lollipop(4);
    CHECK(tiny.n_core() == 2);
    CHECK(tiny.n_periphery() == 2);
    tiny.validate();
}

TEST_CASE("sun: cycle core with one leaf per cycle node") {
    auto net = gen_sun(16);
    CHECK(net.n_core() == 8);
    for (NodeId v : net.core_nodes()) CHECK(net.d_in_core(v) == 2);
    for (NodeId p : net.periphery_nodes()) {
        CHECK(net.degree(p) == 1);
        CHECK(net.is_core(net.adj[static_cast<std::size_t>(p)][0]));
    }
    CHECK(diameter(net) == 6);
}

TEST_CASE("dumbbell: two joined star centers") {
    auto net = gen_dumbbell(16);
    CHECK(net.n_core() == 2);
    for (NodeId c : {0, 1}) {
        CHECK(net.d_in_core(c) == 1);
        CHECK(net.d_out_core(c) == 7);
    }
    for (int n : {6, 10, 16, 64}) CHECK(diameter(gen_dumbbell(n)) == 3);
}

TEST_CASE("G_B node count and special node") {
    auto net = gen_GB(3);
    CHECK(net.n == 3 + 3 * 27 + 1);
    CHECK(net.n == 85);
    CHECK(net.core_is_clique());
    CHECK(net.special.count("s") == 1);
    net.validate();
}

TEST_CASE("G_E node count, weights, and special nodes") {
    auto net = gen_GE(3);
    CHECK(net.n == 9 + 27 + 2);
    CHECK(net.n == 38);
    CHECK(net.n_core() == 9);
    CHECK(net.special.count("s") == 1);
    CHECK(net.special.count("r") == 1);
    CHECK(net.special.count("u") == 1);
    net.validate();
    NodeId s = net.special.at("s");
    NodeId r = net.special.at("r");
    NodeId u = net.special.at("u");
    CHECK(net.degree(s) == 10);  // the k^2 row heads plus one core node
    for (NodeId w : net.adj[static_cast<std::size_t>(s)]) CHECK(net.edge_weight(s, w) == 2);
    for (NodeId w : net.adj[static_cast<std::size_t>(r)]) CHECK(net.edge_weight(r, w) == 3);
    CHECK(net.d_out_core(u) == 0);
    // Every periphery node has a direct core edge.
    for (NodeId p : net.periphery_nodes()) CHECK(net.d_in_core(p) >= 1);
}

TEST_CASE("G_C node count") {
    auto net = gen_GC(4);
    CHECK(net.n == 4 + 4 * 2 + 8);
    CHECK(net.n == 20);
    CHECK(net.core_is_clique());
    net.validate();
}

TEST_CASE("diameter of a clique is 1, disconnected graphs throw") {
    PartitionedNetwork k5(5);
    for (NodeId u = 0; u < 5; ++u) {
        k5.set_core(u);
        for (NodeId v = u + 1; v < 5; ++v) k5.add_edge(u, v);
    }
    CHECK(diameter(k5) == 1);

    PartitionedNetwork split(4);
    split.set_core(0);
    split.add_edge(0, 1);
    split.add_edge(2, 3);
    CHECK_THROWS_AS(diameter(split), DisconnectedGraph);
}

TEST_CASE("random weights are distinct and positive") {
    auto net = gen_cp(64, 2);
    assign_random_weights(net, 11);
    std::set<Word> seen;
    for (const auto& [e, w] : net.weight) {
        CHECK(w >= 1);
        CHECK(w <= static_cast<Word>(64) * 64 * 64 * 64);
        CHECK(seen.insert(w).second);
    }
    CHECK(static_cast<long long>(seen.size()) == net.m());
}

TEST_CASE("network file round trip") {
    auto net = gen_GE(3);
    std::ostringstream os;
    save_network(net, os);
    std::istringstream is(os.str());
    auto back = load_network(is);
    CHECK(back.n == net.n);
    CHECK(back.m() == net.m());
    CHECK(back.core_nodes() == net.core_nodes());
    CHECK(back.weight == net.weight);
    CHECK(back.special == net.special);
    std::ostringstream os2;
    save_network(back, os2);
    CHECK(os.str() == os2.str());
}

TEST_CASE("loader rejects malformed input") {
    std::istringstream bad("3 1 1\ncore: 0\n0 1\n0 2\n");
    CHECK_THROWS(load_network(bad));
}
