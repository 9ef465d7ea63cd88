#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cpnet/types.hpp"

namespace cpnet {

using EdgeKey = std::pair<NodeId, NodeId>;  // normalized: first < second

inline EdgeKey edge_key(NodeId u, NodeId v) {
    return u < v ? EdgeKey{u, v} : EdgeKey{v, u};
}

// Undirected simple graph with a <Core, Periphery> node partition and
// optional positive integer edge weights.
struct PartitionedNetwork {
    int n = 0;
    std::vector<std::vector<NodeId>> adj;  // sorted neighbor lists
    std::vector<char> core_mask;
    std::map<EdgeKey, Word> weight;              // empty when unweighted
    std::map<std::string, NodeId> special;       // named nodes: "s", "r", "u"

    explicit PartitionedNetwork(int n_nodes = 0) { resize(n_nodes); }

    void resize(int n_nodes) {
        n = n_nodes;
        adj.assign(static_cast<std::size_t>(n), {});
        core_mask.assign(static_cast<std::size_t>(n), 0);
    }

    void add_edge(NodeId u, NodeId v);
    bool has_edge(NodeId u, NodeId v) const;
    void set_core(NodeId v) { core_mask[static_cast<std::size_t>(v)] = 1; }
    bool is_core(NodeId v) const { return core_mask[static_cast<std::size_t>(v)] != 0; }

    std::vector<NodeId> core_nodes() const;       // ascending
    std::vector<NodeId> periphery_nodes() const;  // ascending
    int n_core() const;
    int n_periphery() const { return n - n_core(); }
    long long m() const;

    int degree(NodeId v) const { return static_cast<int>(adj[static_cast<std::size_t>(v)].size()); }
    // Neighbor counts of v inside / outside the core.
    int d_in_core(NodeId v) const;
    int d_out_core(NodeId v) const { return degree(v) - d_in_core(v); }

    bool weighted() const { return !weight.empty(); }
    Word edge_weight(NodeId u, NodeId v) const;
    void set_weight(NodeId u, NodeId v, Word w);

    bool core_is_clique() const;
    bool is_connected() const;
    // Throws CongestError when a structural invariant is broken.
    void validate() const;
};

// Exact eccentricity maximum via all-sources BFS. Throws DisconnectedGraph.
int diameter(const PartitionedNetwork& net);

// Single-source shortest-path distances (hop counts), -1 when unreachable.
std::vector<int> bfs_distances(const PartitionedNetwork& net, NodeId src);

// Distinct random integer weights in [1, n^4]; makes the MST unique.
void assign_random_weights(PartitionedNetwork& net, std::uint64_t seed);

// Line-oriented text format: "n m n_C" header, "core: <ids...>", then "u v [w]" per edge.
void save_network(const PartitionedNetwork& net, std::ostream& out);
PartitionedNetwork load_network(std::istream& in);
void save_network_file(const PartitionedNetwork& net, const std::string& path);
PartitionedNetwork load_network_file(const std::string& path);

}  // namespace cpnet
