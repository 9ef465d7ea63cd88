#include "cpnet/network.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

namespace cpnet {

void PartitionedNetwork::add_edge(NodeId u, NodeId v) {
    if (u == v) throw CongestError("self loop at node " + std::to_string(u));
    if (u < 0 || v < 0 || u >= n || v >= n) throw CongestError("edge endpoint out of range");
    auto& au = adj[static_cast<std::size_t>(u)];
    auto it = std::lower_bound(au.begin(), au.end(), v);
    if (it != au.end() && *it == v) throw CongestError("duplicate edge");
    au.insert(it, v);
    auto& av = adj[static_cast<std::size_t>(v)];
    av.insert(std::lower_bound(av.begin(), av.end(), u), u);
}

bool PartitionedNetwork::has_edge(NodeId u, NodeId v) const {
    const auto& au = adj[static_cast<std::size_t>(u)];
    return std::binary_search(au.begin(), au.end(), v);
}

std::vector<NodeId> PartitionedNetwork::core_nodes() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < n; ++v)
        if (is_core(v)) out.push_back(v);
    return out;
}

std::vector<NodeId> PartitionedNetwork::periphery_nodes() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < n; ++v)
        if (!is_core(v)) out.push_back(v);
    return out;
}

int PartitionedNetwork::n_core() const {
    int c = 0;
    for (NodeId v = 0; v < n; ++v) c += is_core(v) ? 1 : 0;
    return c;
}

long long PartitionedNetwork::m() const {
    long long deg_sum = 0;
    for (const auto& a : adj) deg_sum += static_cast<long long>(a.size());
    return deg_sum / 2;
}

int PartitionedNetwork::d_in_core(NodeId v) const {
    int c = 0;
    for (NodeId w : adj[static_cast<std::size_t>(v)]) c += is_core(w) ? 1 : 0;
    return c;
}

Word PartitionedNetwork::edge_weight(NodeId u, NodeId v) const {
    auto it = weight.find(edge_key(u, v));
    if (it == weight.end()) throw CongestError("edge has no weight");
    return it->second;
}

void PartitionedNetwork::set_weight(NodeId u, NodeId v, Word w) {
    if (!has_edge(u, v)) throw CongestError("weight on non-edge");
    if (w <= 0) throw CongestError("weights must be positive");
    weight[edge_key(u, v)] = w;
}

bool PartitionedNetwork::core_is_clique() const {
    auto core = core_nodes();
    for (std::size_t i = 0; i < core.size(); ++i)
        for (std::size_t j = i + 1; j < core.size(); ++j)
            if (!has_edge(core[i], core[j])) return false;
    return true;
}

bool PartitionedNetwork::is_connected() const {
    if (n == 0) return true;
    auto dist = bfs_distances(*this, 0);
    return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

void PartitionedNetwork::validate() const {
    if (n <= 0) throw CongestError("empty network");
    if (core_nodes().empty()) throw CongestError("empty core");
    if (!is_connected()) throw DisconnectedGraph("network is not connected");
    if (weighted()) {
        if (static_cast<long long>(weight.size()) != m())
            throw CongestError("weight map does not cover all edges");
        for (const auto& [e, w] : weight) {
            if (!has_edge(e.first, e.second)) throw CongestError("weight on non-edge");
            if (w <= 0) throw CongestError("weights must be positive");
        }
    }
}

std::vector<int> bfs_distances(const PartitionedNetwork& net, NodeId src) {
    std::vector<int> dist(static_cast<std::size_t>(net.n), -1);
    std::queue<NodeId> q;
    dist[static_cast<std::size_t>(src)] = 0;
    q.push(src);
    while (!q.empty()) {
        NodeId u = q.front();
        q.pop();
        for (NodeId v : net.adj[static_cast<std::size_t>(u)]) {
            if (dist[static_cast<std::size_t>(v)] < 0) {
                dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
                q.push(v);
            }
        }
    }
    return dist;
}

int diameter(const PartitionedNetwork& net) {
    int diam = 0;
    for (NodeId v = 0; v < net.n; ++v) {
        auto dist = bfs_distances(net, v);
        for (int d : dist) {
            if (d < 0) throw DisconnectedGraph("diameter of a disconnected graph");
            diam = std::max(diam, d);
        }
    }
    return diam;
}

void assign_random_weights(PartitionedNetwork& net, std::uint64_t seed) {
    Rng rng(seed);
    const Word bound = static_cast<Word>(net.n) * net.n * net.n * net.n;
    std::set<Word> used;
    net.weight.clear();
    for (NodeId u = 0; u < net.n; ++u) {
        for (NodeId v : net.adj[static_cast<std::size_t>(u)]) {
            if (v < u) continue;
            Word w;
            do { w = rng.range(1, bound); } while (!used.insert(w).second);
            net.weight[{u, v}] = w;
        }
    }
}

void save_network(const PartitionedNetwork& net, std::ostream& out) {
    out << net.n << ' ' << net.m() << ' ' << net.n_core() << '\n';
    out << "core:";
    for (NodeId v : net.core_nodes()) out << ' ' << v;
    out << '\n';
    for (const auto& [name, v] : net.special) out << "special: " << name << ' ' << v << '\n';
    for (NodeId u = 0; u < net.n; ++u) {
        for (NodeId v : net.adj[static_cast<std::size_t>(u)]) {
            if (v < u) continue;
            out << u << ' ' << v;
            if (net.weighted()) out << ' ' << net.edge_weight(u, v);
            out << '\n';
        }
    }
}

PartitionedNetwork load_network(std::istream& in) {
    int n = 0;
    long long m = 0;
    int nc = 0;
    if (!(in >> n >> m >> nc)) throw CongestError("bad network header");
    PartitionedNetwork net(n);
    std::string tag;
    if (!(in >> tag) || tag != "core:") throw CongestError("missing core line");
    for (int i = 0; i < nc; ++i) {
        NodeId v;
        if (!(in >> v)) throw CongestError("truncated core line");
        net.set_core(v);
    }
    std::string line;
    std::getline(in, line);  // rest of core line
    long long edges = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string first;
        ls >> first;
        if (first == "special:") {
            std::string name;
            NodeId v;
            if (!(ls >> name >> v)) throw CongestError("bad special line");
            net.special[name] = v;
            continue;
        }
        NodeId u = static_cast<NodeId>(std::stol(first));
        NodeId v;
        if (!(ls >> v)) throw CongestError("bad edge line: " + line);
        net.add_edge(u, v);
        Word w;
        if (ls >> w) net.set_weight(u, v, w);
        ++edges;
    }
    if (edges != m) throw CongestError("edge count does not match header");
    net.validate();
    return net;
}

void save_network_file(const PartitionedNetwork& net, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw CongestError("cannot write " + path);
    save_network(net, f);
}

PartitionedNetwork load_network_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw CongestError("cannot read " + path);
    return load_network(f);
}

}  // namespace cpnet
