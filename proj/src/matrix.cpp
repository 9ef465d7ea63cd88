#include "cpnet/matrix.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace cpnet {

namespace {

constexpr std::uint16_t kEntry = 0x0201;    // (row, col, value)
constexpr std::uint16_t kRequest = 0x0202;  // (row, rep core index)
constexpr std::uint16_t kRowPart = 0x0203;  // (row, col, value) reply
constexpr std::uint16_t kScalar = 0x0204;
constexpr std::uint16_t kSummand = 0x0205;

Word mulmod(Word a, Word b) {
    return static_cast<Word>(static_cast<__int128>(a) * b % kMatrixModulus);
}

int ceil_div_int(int a, int b) { return (a + b - 1) / b; }

// Core node responsible for row i under the padded block convention.
int owner_of_row(int row, int n, int nc) {
    const int block = ceil_div_int(n, nc);
    return (row - 1) / block;
}

void bound_check(CpRuntime& rt, Word v) {
    if (v > rt.engine().word_bound() || v < -rt.engine().word_bound())
        throw PayloadOverflow("matrix value exceeds the configured word bound; build the runtime "
                              "with word_bound >= 2^61");
}

}  // namespace

void SparseMatrix::set(int i, int j, Word v) {
    if (i < 1 || i > n || j < 1 || j > n) throw CongestError("matrix index out of range");
    if (v % kMatrixModulus == 0) return;
    auto& row = rows[static_cast<std::size_t>(i - 1)];
    auto it = std::lower_bound(row.begin(), row.end(), std::make_pair(j, Word{0}),
                               [](const auto& a, const auto& b) { return a.first < b.first; });
    Word vv = ((v % kMatrixModulus) + kMatrixModulus) % kMatrixModulus;
    if (it != row.end() && it->first == j)
        it->second = vv;
    else
        row.insert(it, {j, vv});
}

Word SparseMatrix::get(int i, int j) const {
    const auto& row = rows[static_cast<std::size_t>(i - 1)];
    for (const auto& [c, v] : row)
        if (c == j) return v;
    return 0;
}

void SparseMatrix::validate() const {
    std::vector<int> col_count(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i - 1)];
        if (static_cast<int>(row.size()) > k)
            throw SparsityViolation("row " + std::to_string(i) + " has " +
                                    std::to_string(row.size()) + " nonzeros > k=" + std::to_string(k));
        for (const auto& [j, v] : row) {
            if (v == 0) throw CongestError("stored zero entry");
            if (++col_count[static_cast<std::size_t>(j)] > k)
                throw SparsityViolation("column " + std::to_string(j) + " exceeds k=" +
                                        std::to_string(k));
        }
    }
}

SparseMatrix random_sparse(int n, int k, std::uint64_t seed) {
    // k permutation diagonals keep both row and column counts at k or below.
    SparseMatrix m(n, k);
    Rng rng(seed);
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int round = 0; round < k; ++round) {
        for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i + 1;
        rng.shuffle(perm);
        for (int i = 1; i <= n; ++i)
            m.set(i, perm[static_cast<std::size_t>(i - 1)], rng.range(1, (1LL << 40)));
    }
    m.validate();
    return m;
}

void save_matrix(const SparseMatrix& m, std::ostream& out) {
    out << m.n << ' ' << m.k << '\n';
    for (int i = 1; i <= m.n; ++i)
        for (const auto& [j, v] : m.rows[static_cast<std::size_t>(i - 1)])
            out << i << ' ' << j << ' ' << v << '\n';
}

SparseMatrix load_matrix(std::istream& in) {
    int n = 0, k = 0;
    if (!(in >> n >> k)) throw CongestError("bad matrix header");
    SparseMatrix m(n, k);
    int i, j;
    Word v;
    while (in >> i >> j >> v) m.set(i, j, v);
    m.validate();
    return m;
}

void save_matrix_file(const SparseMatrix& m, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw CongestError("cannot write " + path);
    save_matrix(m, f);
}

SparseMatrix load_matrix_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw CongestError("cannot read " + path);
    return load_matrix(f);
}

SparseMatrix mt(CpRuntime& rt, const SparseMatrix& a, int* rounds_used) {
    a.validate();
    const int n = rt.net().n;
    const int nc = rt.n_core();
    if (a.n != n) throw CongestError("matrix size does not match the network");
    const long long start = rt.engine().rounds();
    rt.engine().set_phase_tag("mt");

    // Step 1: every node ships its row entries to its representative.
    std::vector<std::vector<Payload>> items(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v) {
        int row = rt.new_id(v);
        for (const auto& [j, val] : a.rows[static_cast<std::size_t>(row - 1)]) {
            bound_check(rt, val);
            items[static_cast<std::size_t>(v)].push_back(Payload(kEntry, {row, j, val}));
        }
    }
    auto up = rt.wave_up(items);

    // Step 2: representatives route each entry to the core node owning the
    // transposed row.
    CoreBatch redistribute;
    redistribute.out.assign(static_cast<std::size_t>(nc), {});
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& [origin, p] : up.at_core[static_cast<std::size_t>(ci)])
            redistribute.out[static_cast<std::size_t>(ci)].push_back(
                {owner_of_row(static_cast<int>(p.at(1)), n, nc),
                 Payload(kEntry, {p.at(1), p.at(0), p.at(2)})});
    std::vector<std::vector<Payload>> at_owner;
    send_msgs(rt, redistribute, at_owner);
    std::vector<std::map<int, std::vector<std::pair<int, Word>>>> owned(static_cast<std::size_t>(nc));
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& p : at_owner[static_cast<std::size_t>(ci)])
            owned[static_cast<std::size_t>(ci)][static_cast<int>(p.at(0))].push_back(
                {static_cast<int>(p.at(1)), p.at(2)});

    // Step 3: every node requests its transposed row, empty or not.
    std::vector<std::vector<Payload>> req_items(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v)
        req_items[static_cast<std::size_t>(v)].push_back(Payload(kRequest, {rt.new_id(v)}));
    auto req_up = rt.wave_up(req_items);
    CoreBatch req_core;
    req_core.out.assign(static_cast<std::size_t>(nc), {});
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& [origin, p] : req_up.at_core[static_cast<std::size_t>(ci)])
            req_core.out[static_cast<std::size_t>(ci)].push_back(
                {owner_of_row(static_cast<int>(p.at(0)), n, nc), Payload(kRequest, {p.at(0), ci})});
    std::vector<std::vector<Payload>> req_at_owner;
    send_msgs(rt, req_core, req_at_owner);

    CoreBatch answers;
    answers.out.assign(static_cast<std::size_t>(nc), {});
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& p : req_at_owner[static_cast<std::size_t>(ci)]) {
            int row = static_cast<int>(p.at(0));
            int back = static_cast<int>(p.at(1));
            for (const auto& [col, val] : owned[static_cast<std::size_t>(ci)][row])
                answers.out[static_cast<std::size_t>(ci)].push_back(
                    {back, Payload(kRowPart, {row, col, val})});
        }
    std::vector<std::vector<Payload>> at_rep;
    send_msgs(rt, answers, at_rep);

    std::vector<std::vector<Payload>> down_items(static_cast<std::size_t>(n));
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& p : at_rep[static_cast<std::size_t>(ci)]) {
            NodeId target = rt.node_of(static_cast<int>(p.at(0)));
            down_items[static_cast<std::size_t>(target)].push_back(
                Payload(kRowPart, {p.at(1), p.at(2)}));
        }
    auto down = rt.wave_down(down_items);

    SparseMatrix result(n, a.k);
    for (NodeId v = 0; v < n; ++v)
        for (const auto& p : down.at_node[static_cast<std::size_t>(v)])
            result.set(rt.new_id(v), static_cast<int>(p.at(0)), p.at(1));
    if (rounds_used) *rounds_used = static_cast<int>(rt.engine().rounds() - start);
    return result;
}

std::vector<Word> vmm(CpRuntime& rt, const std::vector<Word>& s, const SparseMatrix& a,
                      int* rounds_used) {
    a.validate();
    const int n = rt.net().n;
    const int nc = rt.n_core();
    if (a.n != n || static_cast<int>(s.size()) != n)
        throw CongestError("input sizes do not match the network");
    const long long start = rt.engine().rounds();
    rt.engine().set_phase_tag("vmm");

    // Steps 1-2: vector entries to representatives, then to block owners.
    std::vector<std::vector<Payload>> items(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v) {
        int i = rt.new_id(v);
        bound_check(rt, s[static_cast<std::size_t>(i - 1)]);
        items[static_cast<std::size_t>(v)].push_back(
            Payload(kScalar, {i, s[static_cast<std::size_t>(i - 1)]}));
    }
    auto up = rt.wave_up(items);
    CoreBatch redistribute;
    redistribute.out.assign(static_cast<std::size_t>(nc), {});
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& [origin, p] : up.at_core[static_cast<std::size_t>(ci)])
            redistribute.out[static_cast<std::size_t>(ci)].push_back(
                {owner_of_row(static_cast<int>(p.at(0)), n, nc), Payload(kScalar, {p.at(0), p.at(1)})});
    std::vector<std::vector<Payload>> at_owner;
    send_msgs(rt, redistribute, at_owner);
    std::vector<std::map<int, Word>> s_at(static_cast<std::size_t>(nc));
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& p : at_owner[static_cast<std::size_t>(ci)])
            s_at[static_cast<std::size_t>(ci)][static_cast<int>(p.at(0))] = p.at(1);

    // Steps 3-5: row indices up, fetch s(i) from its owner, hand it back down.
    std::vector<std::vector<Payload>> idx_items(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v)
        idx_items[static_cast<std::size_t>(v)].push_back(Payload(kRequest, {rt.new_id(v)}));
    auto idx_up = rt.wave_up(idx_items);
    CoreBatch fetch;
    fetch.out.assign(static_cast<std::size_t>(nc), {});
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& [origin, p] : idx_up.at_core[static_cast<std::size_t>(ci)])
            fetch.out[static_cast<std::size_t>(ci)].push_back(
                {owner_of_row(static_cast<int>(p.at(0)), n, nc), Payload(kRequest, {p.at(0), ci})});
    std::vector<std::vector<Payload>> fetch_at_owner;
    send_msgs(rt, fetch, fetch_at_owner);
    CoreBatch scalars_back;
    scalars_back.out.assign(static_cast<std::size_t>(nc), {});
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& p : fetch_at_owner[static_cast<std::size_t>(ci)])
            scalars_back.out[static_cast<std::size_t>(ci)].push_back(
                {static_cast<int>(p.at(1)),
                 Payload(kScalar, {p.at(0), s_at[static_cast<std::size_t>(ci)].at(static_cast<int>(p.at(0)))})});
    std::vector<std::vector<Payload>> scalars_at_rep;
    send_msgs(rt, scalars_back, scalars_at_rep);
    std::vector<std::vector<Payload>> sdown(static_cast<std::size_t>(n));
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& p : scalars_at_rep[static_cast<std::size_t>(ci)])
            sdown[static_cast<std::size_t>(rt.node_of(static_cast<int>(p.at(0))))].push_back(
                Payload(kScalar, {p.at(1)}));
    auto sdelivery = rt.wave_down(sdown);
    std::vector<Word> s_local(static_cast<std::size_t>(n), 0);
    for (NodeId v = 0; v < n; ++v)
        for (const auto& p : sdelivery.at_node[static_cast<std::size_t>(v)])
            s_local[static_cast<std::size_t>(v)] = p.at(0);

    // Steps 6-7: products up, then to the owner of s'(j).
    std::vector<std::vector<Payload>> prod_items(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v) {
        int i = rt.new_id(v);
        for (const auto& [j, val] : a.rows[static_cast<std::size_t>(i - 1)]) {
            Word prod = mulmod(val, s_local[static_cast<std::size_t>(v)]);
            if (prod != 0)
                prod_items[static_cast<std::size_t>(v)].push_back(Payload(kSummand, {j, prod}));
        }
    }
    auto prod_up = rt.wave_up(prod_items);
    CoreBatch to_owner;
    to_owner.out.assign(static_cast<std::size_t>(nc), {});
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& [origin, p] : prod_up.at_core[static_cast<std::size_t>(ci)])
            to_owner.out[static_cast<std::size_t>(ci)].push_back(
                {owner_of_row(static_cast<int>(p.at(0)), n, nc), Payload(kSummand, {p.at(0), p.at(1)})});
    std::vector<std::vector<Payload>> summands;
    send_msgs(rt, to_owner, summands);
    std::vector<std::map<int, Word>> acc(static_cast<std::size_t>(nc));
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& p : summands[static_cast<std::size_t>(ci)]) {
            Word& slot = acc[static_cast<std::size_t>(ci)][static_cast<int>(p.at(0))];
            slot = (slot + p.at(1)) % kMatrixModulus;
        }

    // Step 8: each node pulls s'(i) back along the same request path.
    auto res_up = rt.wave_up(idx_items);
    CoreBatch res_fetch;
    res_fetch.out.assign(static_cast<std::size_t>(nc), {});
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& [origin, p] : res_up.at_core[static_cast<std::size_t>(ci)])
            res_fetch.out[static_cast<std::size_t>(ci)].push_back(
                {owner_of_row(static_cast<int>(p.at(0)), n, nc), Payload(kRequest, {p.at(0), ci})});
    std::vector<std::vector<Payload>> res_at_owner;
    send_msgs(rt, res_fetch, res_at_owner);
    CoreBatch res_back;
    res_back.out.assign(static_cast<std::size_t>(nc), {});
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& p : res_at_owner[static_cast<std::size_t>(ci)]) {
            int row = static_cast<int>(p.at(0));
            auto& m = acc[static_cast<std::size_t>(ci)];
            Word val = m.count(row) ? m.at(row) : 0;
            res_back.out[static_cast<std::size_t>(ci)].push_back(
                {static_cast<int>(p.at(1)), Payload(kScalar, {row, val})});
        }
    std::vector<std::vector<Payload>> res_at_rep;
    send_msgs(rt, res_back, res_at_rep);
    std::vector<std::vector<Payload>> res_down(static_cast<std::size_t>(n));
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& p : res_at_rep[static_cast<std::size_t>(ci)])
            res_down[static_cast<std::size_t>(rt.node_of(static_cast<int>(p.at(0))))].push_back(
                Payload(kScalar, {p.at(0), p.at(1)}));
    auto res_delivery = rt.wave_down(res_down);

    std::vector<Word> result(static_cast<std::size_t>(n), 0);
    for (NodeId v = 0; v < n; ++v)
        for (const auto& p : res_delivery.at_node[static_cast<std::size_t>(v)])
            result[static_cast<std::size_t>(p.at(0)) - 1] = p.at(1);
    if (rounds_used) *rounds_used = static_cast<int>(rt.engine().rounds() - start);
    return result;
}

SparseMatrix mm(CpRuntime& rt, const SparseMatrix& a, const SparseMatrix& b, int* rounds_used) {
    a.validate();
    b.validate();
    const int n = rt.net().n;
    const int nc = rt.n_core();
    if (a.n != n || b.n != n) throw CongestError("matrix size does not match the network");
    const long long start = rt.engine().rounds();
    rt.engine().set_phase_tag("mm");

    // Steps 1-2: rows of B to their block owners.
    std::vector<std::vector<Payload>> b_items(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v) {
        int i = rt.new_id(v);
        for (const auto& [j, val] : b.rows[static_cast<std::size_t>(i - 1)]) {
            bound_check(rt, val);
            b_items[static_cast<std::size_t>(v)].push_back(Payload(kEntry, {i, j, val}));
        }
    }
    auto b_up = rt.wave_up(b_items);
    CoreBatch b_redistribute;
    b_redistribute.out.assign(static_cast<std::size_t>(nc), {});
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& [origin, p] : b_up.at_core[static_cast<std::size_t>(ci)])
            b_redistribute.out[static_cast<std::size_t>(ci)].push_back(
                {owner_of_row(static_cast<int>(p.at(0)), n, nc),
                 Payload(kEntry, {p.at(0), p.at(1), p.at(2)})});
    std::vector<std::vector<Payload>> b_at_owner;
    send_msgs(rt, b_redistribute, b_at_owner);
    std::vector<std::map<int, std::vector<std::pair<int, Word>>>> b_rows(static_cast<std::size_t>(nc));
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& p : b_at_owner[static_cast<std::size_t>(ci)])
            b_rows[static_cast<std::size_t>(ci)][static_cast<int>(p.at(0))].push_back(
                {static_cast<int>(p.at(1)), p.at(2)});

    // Steps 3-4: entries of A go to whoever holds the matching row of B.
    std::vector<std::vector<Payload>> a_items(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v) {
        int i = rt.new_id(v);
        for (const auto& [j, val] : a.rows[static_cast<std::size_t>(i - 1)]) {
            bound_check(rt, val);
            a_items[static_cast<std::size_t>(v)].push_back(Payload(kEntry, {i, j, val}));
        }
    }
    auto a_up = rt.wave_up(a_items);
    CoreBatch a_route;
    a_route.out.assign(static_cast<std::size_t>(nc), {});
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& [origin, p] : a_up.at_core[static_cast<std::size_t>(ci)])
            a_route.out[static_cast<std::size_t>(ci)].push_back(
                {owner_of_row(static_cast<int>(p.at(1)), n, nc),
                 Payload(kEntry, {p.at(0), p.at(1), p.at(2)})});
    std::vector<std::vector<Payload>> a_at_owner;
    send_msgs(rt, a_route, a_at_owner);

    // Step 5: summands A(i,j)B(j,l) stream to the owner of row i of C.
    CoreBatch summand_route;
    summand_route.out.assign(static_cast<std::size_t>(nc), {});
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& p : a_at_owner[static_cast<std::size_t>(ci)]) {
            int i = static_cast<int>(p.at(0));
            int j = static_cast<int>(p.at(1));
            Word av = p.at(2);
            auto it = b_rows[static_cast<std::size_t>(ci)].find(j);
            if (it == b_rows[static_cast<std::size_t>(ci)].end()) continue;
            for (const auto& [l, bv] : it->second)
                summand_route.out[static_cast<std::size_t>(ci)].push_back(
                    {owner_of_row(i, n, nc), Payload(kSummand, {i, l, mulmod(av, bv)})});
        }
    std::vector<std::vector<Payload>> summands;
    send_msgs(rt, summand_route, summands);
    std::vector<std::map<std::pair<int, int>, Word>> c_acc(static_cast<std::size_t>(nc));
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& p : summands[static_cast<std::size_t>(ci)]) {
            Word& slot = c_acc[static_cast<std::size_t>(ci)][{static_cast<int>(p.at(0)),
                                                              static_cast<int>(p.at(1))}];
            slot = (slot + p.at(2)) % kMatrixModulus;
        }

    // Step 6: the node that held row i of B pulls row i of C.
    std::vector<std::vector<Payload>> req_items(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v)
        req_items[static_cast<std::size_t>(v)].push_back(Payload(kRequest, {rt.new_id(v)}));
    auto req_up = rt.wave_up(req_items);
    CoreBatch req_core;
    req_core.out.assign(static_cast<std::size_t>(nc), {});
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& [origin, p] : req_up.at_core[static_cast<std::size_t>(ci)])
            req_core.out[static_cast<std::size_t>(ci)].push_back(
                {owner_of_row(static_cast<int>(p.at(0)), n, nc), Payload(kRequest, {p.at(0), ci})});
    std::vector<std::vector<Payload>> req_at_owner;
    send_msgs(rt, req_core, req_at_owner);
    CoreBatch answers;
    answers.out.assign(static_cast<std::size_t>(nc), {});
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& p : req_at_owner[static_cast<std::size_t>(ci)]) {
            int row = static_cast<int>(p.at(0));
            int back = static_cast<int>(p.at(1));
            for (const auto& [rc, val] : c_acc[static_cast<std::size_t>(ci)]) {
                if (rc.first != row || val == 0) continue;
                answers.out[static_cast<std::size_t>(ci)].push_back(
                    {back, Payload(kRowPart, {row, rc.second, val})});
            }
        }
    std::vector<std::vector<Payload>> at_rep;
    send_msgs(rt, answers, at_rep);
    std::vector<std::vector<Payload>> down_items(static_cast<std::size_t>(n));
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& p : at_rep[static_cast<std::size_t>(ci)])
            down_items[static_cast<std::size_t>(rt.node_of(static_cast<int>(p.at(0))))].push_back(
                Payload(kRowPart, {p.at(1), p.at(2)}));
    auto down = rt.wave_down(down_items);

    SparseMatrix result(n, a.k * b.k);
    for (NodeId v = 0; v < n; ++v)
        for (const auto& p : down.at_node[static_cast<std::size_t>(v)])
            result.set(rt.new_id(v), static_cast<int>(p.at(0)), p.at(1));
    if (rounds_used) *rounds_used = static_cast<int>(rt.engine().rounds() - start);
    return result;
}

}  // namespace cpnet
