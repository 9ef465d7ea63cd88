#include "cpnet/generators.hpp"

#include <cmath>
#include <vector>

namespace cpnet {

namespace {

int isqrt_ceil(int n) {
    int r = static_cast<int>(std::sqrt(static_cast<double>(n)));
    while (r * r < n) ++r;
    while ((r - 1) * (r - 1) >= n) --r;
    return r;
}

int isqrt_floor(int n) {
    int r = static_cast<int>(std::sqrt(static_cast<double>(n)));
    while ((r + 1) * (r + 1) <= n) ++r;
    while (r * r > n) --r;
    return r;
}

void make_clique(PartitionedNetwork& net, int lo, int hi) {  // [lo, hi)
    for (NodeId u = lo; u < hi; ++u)
        for (NodeId v = u + 1; v < hi; ++v) net.add_edge(u, v);
}

}  // namespace

PartitionedNetwork gen_cp(int n, std::uint64_t seed) {
    if (n < 9) throw CongestError("gen_cp needs n >= 9");
    const int nc = isqrt_ceil(n);
    PartitionedNetwork net(n);
    make_clique(net, 0, nc);
    for (NodeId v = 0; v < nc; ++v) net.set_core(v);
    // Deal periphery nodes round-robin over a shuffled ambassador order, so
    // loads differ by at most one.
    std::vector<NodeId> order(static_cast<std::size_t>(nc));
    for (int i = 0; i < nc; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(seed);
    rng.shuffle(order);
    for (NodeId p = nc; p < n; ++p)
        net.add_edge(p, order[static_cast<std::size_t>((p - nc) % nc)]);
    return net;
}

PartitionedNetwork gen_lollipop(int n) {
    if (n < 4) throw CongestError("gen_lollipop needs n >= 4");
    const int nc = isqrt_floor(n);
    PartitionedNetwork net(n);
    make_clique(net, 0, nc);
    for (NodeId v = 0; v < nc; ++v) net.set_core(v);
    // Line attached to clique node 0.
    net.add_edge(0, nc);
    for (NodeId v = nc; v + 1 < n; ++v) net.add_edge(v, v + 1);
    return net;
}

PartitionedNetwork gen_sun(int n) {
    if (n < 6 || n % 2 != 0) throw CongestError("gen_sun needs even n >= 6");
    const int c = n / 2;
    PartitionedNetwork net(n);
    for (NodeId v = 0; v < c; ++v) {
        net.set_core(v);
        net.add_edge(v, (v + 1) % c);
        net.add_edge(v, c + v);  // leaf
    }
    return net;
}

PartitionedNetwork gen_dumbbell(int n) {
    if (n < 4 || n % 2 != 0) throw CongestError("gen_dumbbell needs even n >= 4");
    PartitionedNetwork net(n);
    net.set_core(0);
    net.set_core(1);
    net.add_edge(0, 1);
    const int half = n / 2;
    for (NodeId v = 2; v < n; ++v) net.add_edge(v < half + 1 ? 0 : 1, v);
    return net;
}

PartitionedNetwork gen_GB(int k) {
    if (k < 2) throw CongestError("gen_GB needs k >= 2");
    const int leaves = k * k * k;
    const int n = k + k * leaves + 1;
    PartitionedNetwork net(n);
    make_clique(net, 0, k);
    for (NodeId v = 0; v < k; ++v) net.set_core(v);
    for (NodeId c = 0; c < k; ++c)
        for (int j = 0; j < leaves; ++j) net.add_edge(c, k + c * leaves + j);
    const NodeId s = n - 1;
    net.add_edge(0, s);
    net.special["s"] = s;
    return net;
}

PartitionedNetwork gen_GE(int k) {
    if (k < 2) throw CongestError("gen_GE needs k >= 2");
    const int kk = k * k;
    const int n = kk + k * kk + 2;
    PartitionedNetwork net(n);
    // Core: k cliques of size k; clique i member j is node i*k+j. The hub u is
    // clique 0's member 0, with one bridging edge per other clique.
    for (int i = 0; i < k; ++i) make_clique(net, i * k, (i + 1) * k);
    for (NodeId v = 0; v < kk; ++v) net.set_core(v);
    const NodeId u = 0;
    for (int i = 1; i < k; ++i) net.add_edge(u, i * k);
    net.special["u"] = u;

    // Periphery grid: k^2 rows of k columns; row t column i is node kk + t*k + i.
    // Rows are weight-1 paths across the columns.
    auto grid = [&](int row, int col) { return kk + row * k + col; };
    for (int t = 0; t < kk; ++t)
        for (int i = 0; i + 1 < k; ++i) {
            net.add_edge(grid(t, i), grid(t, i + 1));
            net.set_weight(grid(t, i), grid(t, i + 1), 1);
        }
    // Column i hangs off clique i, k rows per core node (weight 10). In clique 0
    // the hub u takes none, so the other k-1 members split column 0 evenly.
    for (int i = 1; i < k; ++i)
        for (int j = 0; j < k; ++j)
            for (int t = j * k; t < (j + 1) * k; ++t) {
                net.add_edge(i * k + j, grid(t, i));
                net.set_weight(i * k + j, grid(t, i), 10);
            }
    for (int j = 1; j < k; ++j) {
        const int lo = (j - 1) * kk / (k - 1);
        const int hi = j * kk / (k - 1);
        for (int t = lo; t < hi; ++t) {
            net.add_edge(j, grid(t, 0));
            net.set_weight(j, grid(t, 0), 10);
        }
    }
    // s sees the left end of every row plus one core node of the leftmost
    // clique; r mirrors it on the right. All s-edges weigh 2, all r-edges 3.
    const NodeId s = kk + k * kk;
    const NodeId r = s + 1;
    net.special["s"] = s;
    net.special["r"] = r;
    net.add_edge(s, 1);
    net.set_weight(s, 1, 2);
    net.add_edge(r, (k - 1) * k + 1);
    net.set_weight(r, (k - 1) * k + 1, 3);
    for (int t = 0; t < kk; ++t) {
        net.add_edge(s, grid(t, 0));
        net.set_weight(s, grid(t, 0), 2);
        net.add_edge(r, grid(t, k - 1));
        net.set_weight(r, grid(t, k - 1), 3);
    }
    // Remaining core edges get weight 1.
    for (NodeId a = 0; a < kk; ++a)
        for (NodeId b : net.adj[static_cast<std::size_t>(a)])
            if (b > a && net.is_core(b)) net.set_weight(a, b, 1);
    return net;
}

PartitionedNetwork gen_GC(int k) {
    if (k < 2 || k % 2 != 0) throw CongestError("gen_GC needs even k >= 2");
    const int cyc = k * k / 2;
    const int n = k + k * (k / 2) + cyc;
    PartitionedNetwork net(n);
    make_clique(net, 0, k);
    for (NodeId v = 0; v < k; ++v) net.set_core(v);
    for (NodeId c = 0; c < k; ++c)
        for (int j = 0; j < k / 2; ++j) net.add_edge(c, k + c * (k / 2) + j);
    const int cyc0 = k + k * (k / 2);
    for (int i = 0; i < cyc; ++i) net.add_edge(cyc0 + i, cyc0 + (i + 1) % cyc);
    net.add_edge(0, cyc0);
    net.special["s"] = cyc0 + cyc / 2;  // deep inside the cycle
    net.special["r"] = n - cyc - 1;     // a leaf of the last core node
    return net;
}

}  // namespace cpnet
