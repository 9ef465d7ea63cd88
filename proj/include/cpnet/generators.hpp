#pragma once

#include <cstdint>

#include "cpnet/network.hpp"

namespace cpnet {

// Axiom-satisfying CP-network: core = clique of ceil(sqrt(n)), each periphery
// node attached to exactly one ambassador, ambassador loads balanced.
PartitionedNetwork gen_cp(int n, std::uint64_t seed);

// floor(sqrt(n))-node clique plus a line of the remaining nodes; core = clique.
PartitionedNetwork gen_lollipop(int n);

// n/2-node cycle core with one periphery leaf per cycle node. n even.
PartitionedNetwork gen_sun(int n);

// Two star centers joined by an edge form the core; leaves are the periphery. n even.
PartitionedNetwork gen_dumbbell(int n);

// Core clique of k, every core node with k^3 periphery leaves, plus the node s.
PartitionedNetwork gen_GB(int k);

// Core of k size-k cliques bridged through the hub u, periphery grid of k^2 rows
// by k columns, plus s and r. Installs the fixture weights (s-edges 2, r-edges 3,
// core-periphery 10, everything else 1).
PartitionedNetwork gen_GE(int k);

// Core clique of k, k/2 leaves per core node, and a k^2/2-cycle hanging off one
// core node. k even.
PartitionedNetwork gen_GC(int k);

}  // namespace cpnet
