#include "cpnet/oracles.hpp"

#include <algorithm>
#include <numeric>

namespace cpnet {
namespace oracle {

namespace {

struct Dsu {
    std::vector<int> parent;
    explicit Dsu(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[static_cast<std::size_t>(b)] = a;
        return true;
    }
};

}  // namespace

std::set<EdgeKey> kruskal_mst(const PartitionedNetwork& net) {
    struct E {
        Word w;
        NodeId u, v;
    };
    std::vector<E> edges;
    for (const auto& [key, w] : net.weight) edges.push_back({w, key.first, key.second});
    std::sort(edges.begin(), edges.end(), [](const E& a, const E& b) {
        if (a.w != b.w) return a.w < b.w;
        if (a.u != b.u) return a.u < b.u;
        return a.v < b.v;
    });
    Dsu dsu(net.n);
    std::set<EdgeKey> mst;
    for (const auto& e : edges)
        if (dsu.unite(e.u, e.v)) mst.insert({e.u, e.v});
    if (static_cast<int>(mst.size()) != net.n - 1)
        throw DisconnectedGraph("kruskal on a disconnected graph");
    return mst;
}

DenseEntries dense_transpose(const DenseEntries& a) {
    DenseEntries t;
    for (const auto& [rc, v] : a) t[{rc.second, rc.first}] = v;
    return t;
}

std::vector<Word> dense_vmm(const std::vector<Word>& s, const DenseEntries& a, int n, Word modulus) {
    std::vector<Word> out(static_cast<std::size_t>(n), 0);
    for (const auto& [rc, v] : a) {
        auto [i, j] = rc;
        using W128 = __int128;
        W128 acc = out[static_cast<std::size_t>(j - 1)];
        acc += static_cast<W128>(s[static_cast<std::size_t>(i - 1)]) * v % modulus;
        out[static_cast<std::size_t>(j - 1)] = static_cast<Word>(acc % modulus);
    }
    return out;
}

DenseEntries dense_mm(const DenseEntries& a, const DenseEntries& b, int n, Word modulus) {
    (void)n;
    DenseEntries c;
    // Group B by row for the sparse product.
    std::map<int, std::vector<std::pair<int, Word>>> b_rows;
    for (const auto& [rc, v] : b) b_rows[rc.first].push_back({rc.second, v});
    for (const auto& [rc, av] : a) {
        auto [i, j] = rc;
        auto it = b_rows.find(j);
        if (it == b_rows.end()) continue;
        for (const auto& [l, bv] : it->second) {
            using W128 = __int128;
            W128 acc = c.count({i, l}) ? c[{i, l}] : 0;
            acc += static_cast<W128>(av) * bv % modulus;
            Word r = static_cast<Word>(acc % modulus);
            if (r == 0)
                c.erase({i, l});
            else
                c[{i, l}] = r;
        }
    }
    return c;
}

std::vector<long long> sort_ranks(const std::vector<Word>& values) {
    const std::size_t n = values.size();
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    // Ties broken by holder index: the same chaining the distributed sort uses.
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (values[static_cast<std::size_t>(a)] != values[static_cast<std::size_t>(b)])
            return values[static_cast<std::size_t>(a)] < values[static_cast<std::size_t>(b)];
        return a < b;
    });
    std::vector<long long> rank(n);
    for (std::size_t pos = 0; pos < n; ++pos) rank[static_cast<std::size_t>(idx[pos])] = static_cast<long long>(pos) + 1;
    return rank;
}

Word median_c(const std::vector<Word>& values) {
    std::vector<Word> v = values;
    std::sort(v.begin(), v.end());
    return v[(v.size() + 1) / 2 - 1];
}

ModeResult mode_c(const std::vector<Word>& values) {
    std::map<Word, long long> freq;
    for (Word v : values) ++freq[v];
    ModeResult out;
    for (const auto& [v, f] : freq) out.frequency = std::max(out.frequency, f);
    for (const auto& [v, f] : freq)
        if (f == out.frequency) out.values.push_back(v);
    return out;
}

long long distinct_c(const std::vector<Word>& values) {
    std::set<Word> s(values.begin(), values.end());
    return static_cast<long long>(s.size());
}

std::map<int, std::vector<Word>> topk_c(const std::vector<Word>& values,
                                        const std::vector<int>& areas, int r) {
    std::map<int, std::vector<Word>> by_area;
    for (std::size_t i = 0; i < values.size(); ++i) by_area[areas[i]].push_back(values[i]);
    for (auto& [a, vs] : by_area) {
        std::sort(vs.begin(), vs.end(), std::greater<>());
        if (static_cast<int>(vs.size()) > r) vs.resize(static_cast<std::size_t>(r));
    }
    return by_area;
}

}  // namespace oracle
}  // namespace cpnet
