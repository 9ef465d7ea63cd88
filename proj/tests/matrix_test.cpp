#include "doctest.h"

#include <sstream>

#include "cpnet/generators.hpp"
#include "cpnet/matrix.hpp"
#include "cpnet/oracles.hpp"

using namespace cpnet;

namespace {

oracle::DenseEntries entries_of(const SparseMatrix& m) {
    oracle::DenseEntries out;
    for (int i = 1; i <= m.n; ++i)
        for (const auto& [j, v] : m.rows[static_cast<std::size_t>(i - 1)]) out[{i, j}] = v;
    return out;
}

RuntimeOptions wide_words() {
    RuntimeOptions o;
    o.word_bound = kMatrixModulus;
    return o;
}

SparseMatrix identity(int n) {
    SparseMatrix m(n, 1);
    for (int i = 1; i <= n; ++i) m.set(i, i, 1);
    return m;
}

}  // namespace

TEST_CASE("transpose of the identity is the identity") {
    auto net = gen_cp(16, 1);
    CpRuntime rt(net, 1, wide_words());
    auto a = identity(16);
    int rounds = 0;
    auto t = mt(rt, a, &rounds);
    CHECK(entries_of(t) == entries_of(a));
    CHECK(rounds > 0);
}

TEST_CASE("single nonzero moves to the transposed row") {
    auto net = gen_cp(16, 2);
    CpRuntime rt(net, 2, wide_words());
    SparseMatrix a(16, 1);
    a.set(2, 5, 7);
    auto t = mt(rt, a);
    CHECK(t.get(5, 2) == 7);
    CHECK(entries_of(t).size() == 1);
}

TEST_CASE("random sparse transpose equals the oracle with O(k) rounds") {
    auto net = gen_cp(256, 3);
    CpRuntime rt(net, 3, wide_words());
    int r8 = 0;
    auto a = random_sparse(256, 8, 77);
    auto t = mt(rt, a, &r8);
    CHECK(entries_of(t) == oracle::dense_transpose(entries_of(a)));
    CHECK(r8 <= 24 * 8 + 24);
}

TEST_CASE("vmm: identity matrix returns the vector unchanged") {
    auto net = gen_cp(16, 4);
    CpRuntime rt(net, 4, wide_words());
    std::vector<Word> s;
    for (int i = 1; i <= 16; ++i) s.push_back(i * 11);
    auto out = vmm(rt, s, identity(16));
    CHECK(out == s);
}

TEST_CASE("vmm: diagonal products match the (x+1)(y+1) construction") {
    const int n = 16;
    auto net = gen_cp(n, 5);
    CpRuntime rt(net, 5, wide_words());
    Rng rng(123);
    SparseMatrix a(n, 1);
    std::vector<Word> s;
    std::vector<Word> x, y;
    for (int i = 1; i <= n; ++i) {
        x.push_back(static_cast<Word>(rng.below(2)));
        y.push_back(static_cast<Word>(rng.below(2)));
        a.set(i, i, y.back() + 1);
        s.push_back(x.back() + 1);
    }
    auto out = vmm(rt, s, a);
    for (int i = 0; i < n; ++i)
        CHECK(out[static_cast<std::size_t>(i)] ==
              (x[static_cast<std::size_t>(i)] + 1) * (y[static_cast<std::size_t>(i)] + 1));
}

TEST_CASE("vmm: random instance equals the dense oracle") {
    auto net = gen_cp(256, 6);
    CpRuntime rt(net, 6, wide_words());
    auto a = random_sparse(256, 4, 99);
    Rng rng(5);
    std::vector<Word> s;
    for (int i = 0; i < 256; ++i) s.push_back(static_cast<Word>(rng.below(1 << 30)));
    int rounds = 0;
    auto out = vmm(rt, s, a, &rounds);
    CHECK(out == oracle::dense_vmm(s, entries_of(a), 256, kMatrixModulus));
    CHECK(rounds <= 24 * 4 + 24);
}

TEST_CASE("mm: B = identity hands each node its row of A") {
    auto net = gen_cp(16, 7);
    CpRuntime rt(net, 7, wide_words());
    auto a = random_sparse(16, 2, 3);
    auto c = mm(rt, a, identity(16));
    CHECK(entries_of(c) == entries_of(a));
}

TEST_CASE("mm: the k^2 fan-in row lands intact") {
    const int n = 16, k = 3;
    auto net = gen_cp(n, 8);
    CpRuntime rt(net, 8, wide_words());
    SparseMatrix a(n, k), b(n, k);
    for (int i = 2; i <= k + 1; ++i) a.set(1, i, 1);
    Word tag = 1000;
    for (int i = 2; i <= k + 1; ++i)
        for (int j = 1; j <= k; ++j) b.set(i, (i - 2) * k + j, tag++);
    auto c = mm(rt, a, b);
    for (int col = 1; col <= k * k; ++col) CHECK(c.get(1, col) == 1000 + col - 1);
}

TEST_CASE("mm: random instance equals the dense oracle with O(k^2) rounds") {
    auto net = gen_cp(256, 9);
    CpRuntime rt(net, 9, wide_words());
    auto a = random_sparse(256, 4, 61);
    auto b = random_sparse(256, 4, 62);
    int rounds = 0;
    auto c = mm(rt, a, b, &rounds);
    CHECK(entries_of(c) == oracle::dense_mm(entries_of(a), entries_of(b), 256, kMatrixModulus));
    CHECK(rounds <= 24 * 4 * 4 + 48);
}

TEST_CASE("sparsity violations are rejected") {
    SparseMatrix m(8, 2);
    m.set(1, 1, 5);
    m.set(1, 2, 5);
    m.set(1, 3, 5);
    CHECK_THROWS_AS(m.validate(), SparsityViolation);

    SparseMatrix cols(8, 1);
    cols.set(1, 1, 2);
    cols.set(2, 1, 2);
    CHECK_THROWS_AS(cols.validate(), SparsityViolation);
}

TEST_CASE("matrix file round trip") {
    auto m = random_sparse(32, 3, 4);
    std::ostringstream os;
    save_matrix(m, os);
    std::istringstream is(os.str());
    auto back = load_matrix(is);
    CHECK(back.n == m.n);
    CHECK(back.k == m.k);
    CHECK(entries_of(back) == entries_of(m));
}
