#pragma once

#include <map>
#include <set>
#include <vector>

#include "cpnet/network.hpp"

namespace cpnet {
namespace oracle {

// Unique MST under the (weight, min id, max id) total order; throws DisconnectedGraph.
std::set<EdgeKey> kruskal_mst(const PartitionedNetwork& net);

// Dense reference results for the matrix tasks; entries are maps (row, col) -> value.
using DenseEntries = std::map<std::pair<int, int>, Word>;
DenseEntries dense_transpose(const DenseEntries& a);
std::vector<Word> dense_vmm(const std::vector<Word>& s, const DenseEntries& a, int n, Word modulus);
DenseEntries dense_mm(const DenseEntries& a, const DenseEntries& b, int n, Word modulus);

// Aggregate references over one value per node.
std::vector<long long> sort_ranks(const std::vector<Word>& values);  // 1-based global ranks
Word median_c(const std::vector<Word>& values);                      // value of rank ceil(n/2)
struct ModeResult {
    long long frequency = 0;
    std::vector<Word> values;  // every value attaining the frequency, ascending
};
ModeResult mode_c(const std::vector<Word>& values);
long long distinct_c(const std::vector<Word>& values);
// Top r values per area, descending; key is the area id.
std::map<int, std::vector<Word>> topk_c(const std::vector<Word>& values,
                                        const std::vector<int>& areas, int r);

}  // namespace oracle
}  // namespace cpnet
