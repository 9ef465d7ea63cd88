#pragma once

#include <vector>

#include "cpnet/services.hpp"

namespace cpnet {

// Per-node input for the aggregate tasks; all values must be positive and at
// most word_bound / (n+1), since ties are broken by chaining the holder id
// into the value.
struct ValueAssignment {
    std::vector<Word> values;   // by node
    std::vector<int> areas;     // by node, 1-based; TopK only
    std::vector<int> interests;  // by node, 1-based; TopK only
};

struct RankResult {
    std::vector<long long> rank;  // by node, 1-based global position
    int rounds_used = 0;
};
RankResult rank_values(CpRuntime& rt, const std::vector<Word>& values);

struct MedianResult {
    Word median = 0;  // value of global rank ceil(n/2), known to every node
    int rounds_used = 0;
};
MedianResult median_value(CpRuntime& rt, const std::vector<Word>& values);

struct ModeResult {
    long long frequency = 0;
    std::vector<Word> values;  // modal values, ascending; empty when frequency == 1
    bool complete = true;      // false only for the all-modal frequency-1 case
    int rounds_used = 0;
};
constexpr int kModeBudget = 4;  // broadcast budget for modal values
ModeResult mode_values(CpRuntime& rt, const std::vector<Word>& values);

struct DistinctResult {
    long long count = 0;
    int rounds_used = 0;
};
DistinctResult distinct_count(CpRuntime& rt, const std::vector<Word>& values);

struct TopkResult {
    // Per node: the r largest values of its area of interest, descending,
    // padded with kAbsent when the area holds fewer than r values.
    std::vector<std::vector<Word>> top;
    int rounds_used = 0;
    static constexpr Word kAbsent = 0;
};
TopkResult topk_by_area(CpRuntime& rt, const ValueAssignment& input, int r);

}  // namespace cpnet
