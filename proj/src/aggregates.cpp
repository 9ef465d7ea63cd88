#include "cpnet/aggregates.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace cpnet {

namespace {

constexpr std::uint16_t kValue = 0x0301;
constexpr std::uint16_t kAnswer = 0x0302;
constexpr std::uint16_t kBorder = 0x0303;
constexpr std::uint16_t kCand = 0x0304;
constexpr std::uint16_t kAreaTop = 0x0305;
constexpr std::uint16_t kAreaReq = 0x0306;

// Chaining: packed = value*(n+1) + holder makes every key distinct while
// keeping the value order primary and the holder order secondary.
struct Chained {
    Word pack(Word value, NodeId holder) const { return value * (n + 1) + holder; }
    Word value_of(Word packed) const { return packed / (n + 1); }
    int n;
};

void check_values(CpRuntime& rt, const std::vector<Word>& values) {
    if (static_cast<int>(values.size()) != rt.net().n)
        throw CongestError("one value per node required");
    const Word cap = rt.engine().word_bound() / (rt.net().n + 1);
    for (Word v : values)
        if (v < 1 || v > cap)
            throw PayloadOverflow("aggregate values must lie in [1, word_bound/(n+1)]");
}

// Ship one packed value per node to its representative and assemble the sort
// input; ordinals index each representative's arrival list for the way back.
struct Gathered {
    std::vector<std::vector<std::pair<Word, Word>>> keys;  // per core index: (packed, satellite)
    std::vector<std::vector<NodeId>> origin;               // per core index, by ordinal
};
Gathered gather_values(CpRuntime& rt, const std::vector<Word>& values,
                       const std::vector<int>* satellite) {
    const Chained chain{rt.net().n};
    std::vector<std::vector<Payload>> items(static_cast<std::size_t>(rt.net().n));
    for (NodeId v = 0; v < rt.net().n; ++v)
        items[static_cast<std::size_t>(v)].push_back(Payload(
            kValue, {chain.pack(values[static_cast<std::size_t>(v)], v),
                     satellite ? (*satellite)[static_cast<std::size_t>(v)] : 0}));
    auto up = rt.wave_up(items);
    Gathered g;
    g.keys.assign(static_cast<std::size_t>(rt.n_core()), {});
    g.origin.assign(static_cast<std::size_t>(rt.n_core()), {});
    for (int ci = 0; ci < rt.n_core(); ++ci)
        for (const auto& [origin, p] : up.at_core[static_cast<std::size_t>(ci)]) {
            g.keys[static_cast<std::size_t>(ci)].push_back({p.at(0), p.at(1)});
            g.origin[static_cast<std::size_t>(ci)].push_back(origin);
        }
    return g;
}

}  // namespace

RankResult rank_values(CpRuntime& rt, const std::vector<Word>& values) {
    check_values(rt, values);
    const long long start = rt.engine().rounds();
    rt.engine().set_phase_tag("rank");
    auto g = gather_values(rt, values, nullptr);
    auto sorted = core_sort(rt, g.keys, false, true);

    std::vector<std::vector<Payload>> down(static_cast<std::size_t>(rt.net().n));
    for (int ci = 0; ci < rt.n_core(); ++ci)
        for (std::size_t ord = 0; ord < g.origin[static_cast<std::size_t>(ci)].size(); ++ord)
            down[static_cast<std::size_t>(g.origin[static_cast<std::size_t>(ci)][ord])].push_back(
                Payload(kAnswer, {sorted.il_ranks[static_cast<std::size_t>(ci)][ord]}));
    auto res = rt.wave_down(down);

    RankResult out;
    out.rank.assign(static_cast<std::size_t>(rt.net().n), 0);
    for (NodeId v = 0; v < rt.net().n; ++v)
        for (const auto& p : res.at_node[static_cast<std::size_t>(v)])
            out.rank[static_cast<std::size_t>(v)] = p.at(0);
    out.rounds_used = static_cast<int>(rt.engine().rounds() - start);
    return out;
}

MedianResult median_value(CpRuntime& rt, const std::vector<Word>& values) {
    check_values(rt, values);
    const Chained chain{rt.net().n};
    const int nc = rt.n_core();
    const long long start = rt.engine().rounds();
    rt.engine().set_phase_tag("median");
    auto g = gather_values(rt, values, nullptr);
    auto sorted = core_sort(rt, g.keys, true, false);

    // The block owner holding global rank ceil(n/2) announces it.
    const long long target = (rt.net().n + 1) / 2;
    const int block = (rt.net().n + nc - 1) / nc;
    const int holder = static_cast<int>((target - 1) / block);
    std::vector<Payload> announce(static_cast<std::size_t>(nc), Payload(kAnswer, {0}));
    const auto& blk = sorted.vl_blocks[static_cast<std::size_t>(holder)];
    const long long offset = target - sorted.block_start[static_cast<std::size_t>(holder)];
    announce[static_cast<std::size_t>(holder)] =
        Payload(kAnswer, {blk[static_cast<std::size_t>(offset)].first});
    auto bc = core_broadcast(rt, announce);
    Word median_packed = 0;
    for (const auto& [from, p] : bc.received[0])
        if (from == holder) median_packed = p.at(0);
    Word median = chain.value_of(median_packed);

    std::vector<std::vector<Payload>> down(static_cast<std::size_t>(rt.net().n));
    for (NodeId v = 0; v < rt.net().n; ++v)
        if (!rt.net().is_core(v))
            down[static_cast<std::size_t>(v)].push_back(Payload(kAnswer, {median}));
    rt.wave_down(down);

    MedianResult out;
    out.median = median;
    out.rounds_used = static_cast<int>(rt.engine().rounds() - start);
    return out;
}

ModeResult mode_values(CpRuntime& rt, const std::vector<Word>& values) {
    check_values(rt, values);
    const Chained chain{rt.net().n};
    const int nc = rt.n_core();
    const long long start = rt.engine().rounds();
    rt.engine().set_phase_tag("mode");
    auto g = gather_values(rt, values, nullptr);
    auto sorted = core_sort(rt, g.keys, true, false);

    // Per block: border runs plus the most frequent internal values.
    struct BlockView {
        bool empty = true;
        Word min_v = 0, max_v = 0;
        long long min_f = 0, max_f = 0;
        long long top_f = 0;
        std::vector<Word> top_vals;
    };
    std::vector<BlockView> view(static_cast<std::size_t>(nc));
    for (int b = 0; b < nc; ++b) {
        const auto& blk = sorted.vl_blocks[static_cast<std::size_t>(b)];
        auto& bv = view[static_cast<std::size_t>(b)];
        if (blk.empty()) continue;
        bv.empty = false;
        std::map<Word, long long> freq;
        for (const auto& [packed, sat] : blk) ++freq[chain.value_of(packed)];
        bv.min_v = chain.value_of(blk.front().first);
        bv.max_v = chain.value_of(blk.back().first);
        bv.min_f = freq.at(bv.min_v);
        bv.max_f = freq.at(bv.max_v);
        for (const auto& [v, f] : freq) bv.top_f = std::max(bv.top_f, f);
        for (const auto& [v, f] : freq)
            if (f == bv.top_f) bv.top_vals.push_back(v);
        if (bv.top_f >= 2 && static_cast<int>(bv.top_vals.size()) > kModeBudget)
            throw ModeSetTooLarge("a block holds " + std::to_string(bv.top_vals.size()) +
                                  " modal candidates, budget " + std::to_string(kModeBudget));
        if (bv.top_f == 1) bv.top_vals.clear();  // every value qualifies; carry the marker only
    }

    // Three broadcast slots: borders, then the candidate pairs.
    std::vector<Payload> borders(static_cast<std::size_t>(nc));
    for (int b = 0; b < nc; ++b) {
        const auto& bv = view[static_cast<std::size_t>(b)];
        borders[static_cast<std::size_t>(b)] =
            bv.empty ? Payload(kBorder, {0, 0, 0, 0, 0})
                     : Payload(kBorder, {1, bv.min_v, bv.min_f, bv.max_v, bv.max_f});
    }
    auto border_bc = core_broadcast(rt, borders);
    std::vector<BroadcastResult> cand_bcs;
    for (int slot = 0; slot < kModeBudget / 2; ++slot) {
        std::vector<Payload> cands(static_cast<std::size_t>(nc));
        for (int b = 0; b < nc; ++b) {
            const auto& tv = view[static_cast<std::size_t>(b)].top_vals;
            Word v1 = static_cast<std::size_t>(2 * slot) < tv.size() ? tv[static_cast<std::size_t>(2 * slot)] : 0;
            Word f1 = v1 ? view[static_cast<std::size_t>(b)].top_f : 0;
            Word v2 = static_cast<std::size_t>(2 * slot + 1) < tv.size() ? tv[static_cast<std::size_t>(2 * slot + 1)] : 0;
            Word f2 = v2 ? view[static_cast<std::size_t>(b)].top_f : 0;
            cands[static_cast<std::size_t>(b)] = Payload(kCand, {v1, f1, v2, f2});
        }
        cand_bcs.push_back(core_broadcast(rt, cands));
    }

    // Merge (identical at every core node): exact totals for border values,
    // exact in-block frequencies for internal candidates.
    std::map<Word, long long> border_totals;
    std::vector<std::pair<Word, long long>> internal;
    for (const auto& [b, p] : border_bc.received[0]) {
        if (p.at(0) == 0) continue;
        Word minv = p.at(1), maxv = p.at(3);
        long long minf = p.at(2), maxf = p.at(4);
        border_totals[minv] += minf;
        if (maxv != minv) border_totals[maxv] += maxf;
    }
    for (const auto& bc : cand_bcs)
        for (const auto& [b, p] : bc.received[0]) {
            if (p.at(1) > 0) internal.push_back({p.at(0), p.at(1)});
            if (p.at(3) > 0) internal.push_back({p.at(2), p.at(3)});
        }

    ModeResult out;
    long long best = 1;  // every present value has frequency at least one
    for (const auto& [v, f] : border_totals) best = std::max(best, f);
    for (const auto& [v, f] : internal) best = std::max(best, f);
    out.frequency = best;
    if (best == 1) {
        out.complete = false;  // all values are modal; signalled by frequency alone
    } else {
        std::set<Word> modal;
        for (const auto& [v, f] : border_totals)
            if (f == best) modal.insert(v);
        for (const auto& [v, f] : internal)
            if (f == best && !border_totals.count(v)) modal.insert(v);
        if (static_cast<int>(modal.size()) > kModeBudget)
            throw ModeSetTooLarge("modal set of size " + std::to_string(modal.size()) +
                                  " exceeds the broadcast budget");
        out.values.assign(modal.begin(), modal.end());
    }

    std::vector<std::vector<Payload>> down(static_cast<std::size_t>(rt.net().n));
    for (NodeId v = 0; v < rt.net().n; ++v) {
        if (rt.net().is_core(v)) continue;
        if (out.values.empty())
            down[static_cast<std::size_t>(v)].push_back(Payload(kAnswer, {out.frequency, 0}));
        else
            for (Word m : out.values)
                down[static_cast<std::size_t>(v)].push_back(Payload(kAnswer, {out.frequency, m}));
    }
    rt.wave_down(down);
    out.rounds_used = static_cast<int>(rt.engine().rounds() - start);
    return out;
}

DistinctResult distinct_count(CpRuntime& rt, const std::vector<Word>& values) {
    check_values(rt, values);
    const Chained chain{rt.net().n};
    const int nc = rt.n_core();
    const long long start = rt.engine().rounds();
    rt.engine().set_phase_tag("distinct");
    auto g = gather_values(rt, values, nullptr);
    auto sorted = core_sort(rt, g.keys, true, false);

    std::vector<Payload> reports(static_cast<std::size_t>(nc));
    for (int b = 0; b < nc; ++b) {
        const auto& blk = sorted.vl_blocks[static_cast<std::size_t>(b)];
        if (blk.empty()) {
            reports[static_cast<std::size_t>(b)] = Payload(kBorder, {0, 0, 0, 0});
            continue;
        }
        long long cnt = 0;
        Word prev = -1;
        for (const auto& [packed, sat] : blk) {
            Word v = chain.value_of(packed);
            if (v != prev) ++cnt;
            prev = v;
        }
        reports[static_cast<std::size_t>(b)] =
            Payload(kBorder, {cnt, chain.value_of(blk.front().first),
                              chain.value_of(blk.back().first), 1});
    }
    auto bc = core_broadcast(rt, reports);

    long long total = 0;
    Word prev_max = 0;
    bool have_prev = false;
    for (const auto& [b, p] : bc.received[0]) {
        if (p.at(3) == 0) continue;
        total += p.at(0);
        if (have_prev && p.at(1) == prev_max) --total;  // run continues across the border
        prev_max = p.at(2);
        have_prev = true;
    }

    std::vector<std::vector<Payload>> down(static_cast<std::size_t>(rt.net().n));
    for (NodeId v = 0; v < rt.net().n; ++v)
        if (!rt.net().is_core(v))
            down[static_cast<std::size_t>(v)].push_back(Payload(kAnswer, {total}));
    rt.wave_down(down);

    DistinctResult out;
    out.count = total;
    out.rounds_used = static_cast<int>(rt.engine().rounds() - start);
    return out;
}

TopkResult topk_by_area(CpRuntime& rt, const ValueAssignment& input, int r) {
    check_values(rt, input.values);
    const int n = rt.net().n;
    const int nc = rt.n_core();
    if (static_cast<int>(input.areas.size()) != n || static_cast<int>(input.interests.size()) != n)
        throw CongestError("TopK needs an area and an interest per node");
    int max_area = 0;
    for (int a : input.areas) max_area = std::max(max_area, a);
    for (int a : input.interests) max_area = std::max(max_area, a);
    if (max_area > nc)
        throw CongestError("more areas than core nodes; Theorem-2 sizing violated");
    const Chained chain{n};
    const long long start = rt.engine().rounds();
    rt.engine().set_phase_tag("topk");

    auto g = gather_values(rt, input.values, &input.areas);
    auto sorted = core_sort(rt, g.keys, true, false);

    // Each block sends its r largest values per area to that area's owner.
    CoreBatch to_area;
    to_area.out.assign(static_cast<std::size_t>(nc), {});
    for (int b = 0; b < nc; ++b) {
        std::map<int, std::vector<Word>> per_area;  // packed values ascending
        for (const auto& [packed, area] : sorted.vl_blocks[static_cast<std::size_t>(b)])
            per_area[static_cast<int>(area)].push_back(packed);
        for (const auto& [area, vals] : per_area) {
            const int owner = (area - 1) % nc;
            const std::size_t take = std::min<std::size_t>(vals.size(), static_cast<std::size_t>(r));
            for (std::size_t t = 0; t < take; ++t)
                to_area.out[static_cast<std::size_t>(b)].push_back(
                    {owner, Payload(kAreaTop, {area, vals[vals.size() - 1 - t]})});
        }
    }
    std::vector<std::vector<Payload>> area_msgs;
    send_msgs(rt, to_area, area_msgs);
    std::vector<std::map<int, std::vector<Word>>> area_top(static_cast<std::size_t>(nc));
    for (int ci = 0; ci < nc; ++ci) {
        for (const auto& p : area_msgs[static_cast<std::size_t>(ci)])
            area_top[static_cast<std::size_t>(ci)][static_cast<int>(p.at(0))].push_back(p.at(1));
        for (auto& [area, vals] : area_top[static_cast<std::size_t>(ci)]) {
            std::sort(vals.begin(), vals.end(), std::greater<>());
            if (static_cast<int>(vals.size()) > r) vals.resize(static_cast<std::size_t>(r));
        }
    }

    // Interests travel with the initial gather; representatives deduplicate
    // area requests and fan the replies back out.
    std::vector<std::vector<Payload>> want(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v)
        want[static_cast<std::size_t>(v)].push_back(
            Payload(kAreaReq, {input.interests[static_cast<std::size_t>(v)]}));
    auto want_up = rt.wave_up(want);
    std::vector<std::map<int, std::vector<NodeId>>> rep_want(static_cast<std::size_t>(nc));
    CoreBatch req;
    req.out.assign(static_cast<std::size_t>(nc), {});
    for (int ci = 0; ci < nc; ++ci) {
        for (const auto& [origin, p] : want_up.at_core[static_cast<std::size_t>(ci)])
            rep_want[static_cast<std::size_t>(ci)][static_cast<int>(p.at(0))].push_back(origin);
        for (const auto& [area, who] : rep_want[static_cast<std::size_t>(ci)])
            req.out[static_cast<std::size_t>(ci)].push_back(
                {(area - 1) % nc, Payload(kAreaReq, {area, ci})});
    }
    std::vector<std::vector<Payload>> req_at_owner;
    send_msgs(rt, req, req_at_owner);
    CoreBatch replies;
    replies.out.assign(static_cast<std::size_t>(nc), {});
    for (int ci = 0; ci < nc; ++ci)
        for (const auto& p : req_at_owner[static_cast<std::size_t>(ci)]) {
            int area = static_cast<int>(p.at(0));
            int back = static_cast<int>(p.at(1));
            auto it = area_top[static_cast<std::size_t>(ci)].find(area);
            const std::vector<Word> empty;
            const auto& vals = it == area_top[static_cast<std::size_t>(ci)].end() ? empty : it->second;
            for (int t = 0; t < r; ++t)
                replies.out[static_cast<std::size_t>(ci)].push_back(
                    {back, Payload(kAreaTop,
                                   {area, static_cast<std::size_t>(t) < vals.size()
                                              ? vals[static_cast<std::size_t>(t)]
                                              : -1})});
        }
    std::vector<std::vector<Payload>> rep_replies;
    send_msgs(rt, replies, rep_replies);

    std::vector<std::vector<Payload>> down(static_cast<std::size_t>(n));
    std::vector<std::map<int, std::vector<Word>>> rep_area_vals(static_cast<std::size_t>(nc));
    for (int ci = 0; ci < nc; ++ci) {
        for (const auto& p : rep_replies[static_cast<std::size_t>(ci)])
            rep_area_vals[static_cast<std::size_t>(ci)][static_cast<int>(p.at(0))].push_back(p.at(1));
        for (auto& [area, vals] : rep_area_vals[static_cast<std::size_t>(ci)])
            std::sort(vals.begin(), vals.end(), std::greater<>());  // absent markers sort last
        for (const auto& [area, who] : rep_want[static_cast<std::size_t>(ci)]) {
            const auto& vals = rep_area_vals[static_cast<std::size_t>(ci)].at(area);
            for (NodeId v : who) {
                if (v == rt.core_node(ci)) continue;  // handled locally below
                for (Word pv : vals)
                    down[static_cast<std::size_t>(v)].push_back(Payload(kAreaTop, {area, pv}));
            }
        }
    }
    auto delivery = rt.wave_down(down);

    TopkResult out;
    out.top.assign(static_cast<std::size_t>(n), {});
    auto unpack_list = [&](NodeId v, const std::vector<Word>& packed_list) {
        auto& dst = out.top[static_cast<std::size_t>(v)];
        for (Word pv : packed_list)
            dst.push_back(pv < 0 ? TopkResult::kAbsent : chain.value_of(pv));
    };
    for (int ci = 0; ci < nc; ++ci) {
        NodeId self = rt.core_node(ci);
        int area = input.interests[static_cast<std::size_t>(self)];
        unpack_list(self, rep_area_vals[static_cast<std::size_t>(ci)].at(area));
    }
    for (NodeId v = 0; v < n; ++v) {
        if (rt.net().is_core(v)) continue;
        std::vector<Word> packed_list;
        for (const auto& p : delivery.at_node[static_cast<std::size_t>(v)])
            packed_list.push_back(p.at(1));
        unpack_list(v, packed_list);
    }
    out.rounds_used = static_cast<int>(rt.engine().rounds() - start);
    return out;
}

}  // namespace cpnet
