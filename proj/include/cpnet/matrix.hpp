#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cpnet/services.hpp"

namespace cpnet {

// Entries live in Z mod 2^61-1 so any product still fits one payload word.
constexpr Word kMatrixModulus = (1LL << 61) - 1;

// Row-indexed O(k)-sparse square matrix, one row per node (row i at new id i).
struct SparseMatrix {
    int n = 0;
    int k = 0;  // declared sparsity bound
    std::vector<std::vector<std::pair<int, Word>>> rows;  // 1-based columns, ascending

    explicit SparseMatrix(int n_ = 0, int k_ = 0)
        : n(n_), k(k_), rows(static_cast<std::size_t>(n_)) {}

    void set(int i, int j, Word v);
    Word get(int i, int j) const;
    // Throws SparsityViolation when a row or column exceeds k.
    void validate() const;
};

SparseMatrix random_sparse(int n, int k, std::uint64_t seed);

// File format: header "n k", then one "i j v" line per nonzero.
void save_matrix(const SparseMatrix& m, std::ostream& out);
SparseMatrix load_matrix(std::istream& in);
void save_matrix_file(const SparseMatrix& m, const std::string& path);
SparseMatrix load_matrix_file(const std::string& path);

// Distributed matrix transposition: the node holding row i ends with row i of
// A^T. Rounds grow linearly in k.
SparseMatrix mt(CpRuntime& rt, const SparseMatrix& a, int* rounds_used = nullptr);

// Distributed vector-by-matrix product s' = sA; entry i stays at the node that
// held s(i). Rounds grow linearly in k.
std::vector<Word> vmm(CpRuntime& rt, const std::vector<Word>& s, const SparseMatrix& a,
                      int* rounds_used = nullptr);

// Distributed matrix product C = AB; the node holding row i of B ends with row
// i of C. Rounds grow quadratically in k.
SparseMatrix mm(CpRuntime& rt, const SparseMatrix& a, const SparseMatrix& b,
                int* rounds_used = nullptr);

}  // namespace cpnet
