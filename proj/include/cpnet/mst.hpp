#pragma once

#include <set>
#include <vector>

#include "cpnet/axioms.hpp"
#include "cpnet/network.hpp"

namespace cpnet {

struct MstOptions {
    bool require_axioms = true;
    long long round_limit = 0;  // 0 = 10 * ceil(log2 n)^2
    AxiomParams axioms;
};

struct MstStats {
    int phases = 0;
    long long rounds = 0;  // total engine rounds, setup and final broadcast included
    int phase0_rounds = 0;
    int max_edge_load_steps345 = 0;  // worst per-edge message count over any phase's steps 3-5
    int max_wait_phases = 0;         // longest any fragment sat in waiting
    int leader_load_max = 0;         // fragments per leader after phase 0
    std::vector<int> phase1_roots;   // merge-tree roots detected in phase 1 (fragment ids)
};

struct MstResult {
    std::set<EdgeKey> edges;
    MstStats stats;
    std::vector<int> new_id;  // phase-0 renaming, for cross-checking fragment ids
};

// The full randomized MST algorithm: representative/renaming initialization,
// Boruvka phases with speaker-deduplicated merge-requests and two amortized
// pointer jumps per phase, random fragment ids and leaders on merge-tree
// release. Requires distinct weights for oracle-exact output.
MstResult run_cp_mst(const PartitionedNetwork& net, std::uint64_t seed, MstOptions opts = {});

}  // namespace cpnet
