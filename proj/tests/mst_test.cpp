#include "doctest.h"

#include <algorithm>

#include "cpnet/generators.hpp"
#include "cpnet/mst.hpp"
#include "cpnet/oracles.hpp"

using namespace cpnet;

namespace {

// A clique-core network small enough to reason about by hand: K3 core plus
// six periphery leaves, two per core node.
PartitionedNetwork tiny_cp() {
    PartitionedNetwork net(9);
    for (NodeId v = 0; v < 3; ++v) net.set_core(v);
    net.add_edge(0, 1);
    net.add_edge(1, 2);
    net.add_edge(0, 2);
    for (NodeId p = 3; p < 9; ++p) net.add_edge((p - 3) % 3, p);
    return net;
}

int ceil_log2(int n) {
    int b = 0;
    while ((1 << b) < n) ++b;
    return b;
}

}  // namespace

TEST_CASE("star graph: every edge is forced into the tree") {
    auto net = gen_cp(9, 1);  // K3 core, leaves
    assign_random_weights(net, 5);
    auto res = run_cp_mst(net, 5);
    CHECK(res.edges == oracle::kruskal_mst(net));
    CHECK(res.edges.size() == 8);
}

TEST_CASE("two singletons selecting each other crown the smaller id") {
    auto net = tiny_cp();
    assign_random_weights(net, 3);
    auto res = run_cp_mst(net, 3);
    REQUIRE(!res.stats.phase1_roots.empty());
    // Phase 1 roots are the smaller fragment id of each reciprocal pair; the
    // must-merge pair of the globally lightest edge is always among them.
    Word best_w = 0;
    EdgeKey best_e{0, 0};
    for (const auto& [e, w] : net.weight)
        if (best_w == 0 || w < best_w) {
            best_w = w;
            best_e = e;
        }
    int id_u = res.new_id[static_cast<std::size_t>(best_e.first)];
    int id_v = res.new_id[static_cast<std::size_t>(best_e.second)];
    CHECK(std::find(res.stats.phase1_roots.begin(), res.stats.phase1_roots.end(),
                    std::min(id_u, id_v)) != res.stats.phase1_roots.end());
    for (int root : res.stats.phase1_roots) {
        (void)root;  // all roots detected in phase 1 came from reciprocal pairs
    }
    CHECK(res.edges == oracle::kruskal_mst(net));
}

TEST_CASE("chain of merge targets resolves through pointer jumping") {
    // Path weights force fragments into a chain 1 -> 2 -> 3 <-> 4.
    PartitionedNetwork net(6);
    for (NodeId v = 0; v < 3; ++v) net.set_core(v);
    net.add_edge(0, 1);
    net.add_edge(1, 2);
    net.add_edge(0, 2);
    net.add_edge(0, 3);
    net.add_edge(3, 4);
    net.add_edge(4, 5);
    net.set_weight(0, 1, 50);
    net.set_weight(1, 2, 60);
    net.set_weight(0, 2, 70);
    net.set_weight(0, 3, 30);
    net.set_weight(3, 4, 20);
    net.set_weight(4, 5, 10);
    MstOptions opts;
    opts.axioms.gamma = 3;  // the two-hop periphery chain needs three rounds
    auto res = run_cp_mst(net, 7, opts);
    CHECK(res.edges == oracle::kruskal_mst(net));
    CHECK(res.stats.phases <= 2 * ceil_log2(6) + 4);
}

TEST_CASE("random CP networks match Kruskal exactly across seeds and sizes") {
    for (int n : {16, 36, 64}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            auto net = gen_cp(n, seed);
            assign_random_weights(net, seed * 17 + 1);
            auto res = run_cp_mst(net, seed);
            CHECK(res.edges == oracle::kruskal_mst(net));
            CHECK(res.stats.phases <= 2 * ceil_log2(n) + 4);
            CHECK(res.stats.max_wait_phases <= 2 * ceil_log2(n));
        }
    }
}

TEST_CASE("phase 0 milestones on gen_cp(1024)") {
    auto net = gen_cp(1024, 2);
    assign_random_weights(net, 9);
    auto res = run_cp_mst(net, 2);
    CHECK(res.stats.phase0_rounds <= 8);
    CHECK(res.stats.leader_load_max <= 2 * (1024 / 32));
    // Core nodes take new ids [1..n_C].
    for (NodeId v : net.core_nodes()) CHECK(res.new_id[static_cast<std::size_t>(v)] <= 32);
    CHECK(res.edges == oracle::kruskal_mst(net));
}

TEST_CASE("G_E fixture: all weight-2 s-edges in, exactly one r-edge") {
    auto net = gen_GE(3);
    MstOptions opts;
    opts.require_axioms = false;  // G_E exists to violate A_E
    auto res = run_cp_mst(net, 11, opts);
    NodeId s = net.special.at("s");
    NodeId r = net.special.at("r");
    int s_edges = 0, r_edges = 0;
    for (const auto& [u, v] : res.edges) {
        if (u == s || v == s) ++s_edges;
        if (u == r || v == r) ++r_edges;
    }
    CHECK(s_edges == net.degree(s));
    CHECK(r_edges == 1);
    CHECK(static_cast<int>(res.edges.size()) == net.n - 1);
    CHECK(res.edges == oracle::kruskal_mst(net));
}

TEST_CASE("per-phase edge load and round budget stay modest") {
    auto net = gen_cp(256, 4);
    assign_random_weights(net, 21);
    auto res = run_cp_mst(net, 4);
    const int log_n = ceil_log2(256);
    CHECK(res.stats.max_edge_load_steps345 <= 8 * log_n);
    CHECK(res.stats.rounds <= 10LL * log_n * log_n);
}

TEST_CASE("unweighted or axiom-violating networks are refused") {
    auto net = gen_cp(16, 1);
    CHECK_THROWS_AS(run_cp_mst(net, 1), CongestError);
    auto lol = gen_lollipop(25);
    assign_random_weights(lol, 1);
    CHECK_THROWS_AS(run_cp_mst(lol, 1), AxiomCheckFailed);
}

TEST_CASE("determinism: same seed, same tree, same rounds") {
    auto net = gen_cp(64, 9);
    assign_random_weights(net, 2);
    auto a = run_cp_mst(net, 123);
    auto b = run_cp_mst(net, 123);
    CHECK(a.edges == b.edges);
    CHECK(a.stats.rounds == b.stats.rounds);
    CHECK(a.stats.phases == b.stats.phases);
}
