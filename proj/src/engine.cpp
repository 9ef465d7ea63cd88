#include "cpnet/engine.hpp"

#include <algorithm>
#include <cstdlib>
#include <ostream>

namespace cpnet {

void Mailer::send(NodeId dst, const Payload& p) {
    engine_->deliver(src_, dst, p);
}

Engine::Engine(const PartitionedNetwork& net, Word word_bound) : net_(net), word_bound_(word_bound) {
    if (word_bound_ <= 0) {
        // Default CONGEST word bound n^4: covers node ids, weights, ranks and counts.
        Word b = 1;
        for (int i = 0; i < 4; ++i) b *= std::max(net.n, 2);
        word_bound_ = b;
    }
    csr_offset_.assign(static_cast<std::size_t>(net.n) + 1, 0);
    for (NodeId v = 0; v < net.n; ++v)
        csr_offset_[static_cast<std::size_t>(v) + 1] =
            csr_offset_[static_cast<std::size_t>(v)] + net.degree(v);
    const std::size_t slots = static_cast<std::size_t>(csr_offset_.back());
    edge_used_.assign(slots, 0);
    window_load_.assign(slots, 0);
    inbox_.assign(static_cast<std::size_t>(net.n), {});
    next_inbox_.assign(static_cast<std::size_t>(net.n), {});
}

int Engine::directed_edge_id(NodeId src, NodeId dst) const {
    const auto& a = net_.adj[static_cast<std::size_t>(src)];
    auto it = std::lower_bound(a.begin(), a.end(), dst);
    if (it == a.end() || *it != dst) return -1;
    return csr_offset_[static_cast<std::size_t>(src)] + static_cast<int>(it - a.begin());
}

void Engine::deliver(NodeId src, NodeId dst, const Payload& p) {
    int eid = directed_edge_id(src, dst);
    if (eid < 0)
        throw NonAdjacentSend("round " + std::to_string(round_ + 1) + ": " + std::to_string(src) +
                              " -> " + std::to_string(dst) + " is not an edge");
    if (p.n_words > Payload::kMaxWords) throw PayloadOverflow("too many payload words");
    for (int i = 0; i < p.n_words; ++i) {
        Word w = p.words[static_cast<std::size_t>(i)];
        if (w > word_bound_ || w < -word_bound_)
            throw PayloadOverflow("payload word " + std::to_string(w) + " exceeds bound " +
                                  std::to_string(word_bound_));
    }
    if (edge_used_[static_cast<std::size_t>(eid)])
        throw CapacityViolation("round " + std::to_string(round_ + 1) + ": second message on edge " +
                                std::to_string(src) + " -> " + std::to_string(dst));
    edge_used_[static_cast<std::size_t>(eid)] = 1;
    touched_edges_.push_back(eid);
    if (window_open_) ++window_load_[static_cast<std::size_t>(eid)];
    next_inbox_[static_cast<std::size_t>(dst)].push_back(Envelope{src, dst, p});
    ++sent_this_round_;
}

long long Engine::run_round(Protocol& proto) {
    sent_this_round_ = 0;
    Mailer mailer;
    mailer.engine_ = this;
    for (NodeId v = 0; v < net_.n; ++v) {
        mailer.src_ = v;
        proto.step(v, inbox_[static_cast<std::size_t>(v)], round_ + 1, mailer);
    }
    ++round_;
    for (NodeId v = 0; v < net_.n; ++v) {
        inbox_[static_cast<std::size_t>(v)].swap(next_inbox_[static_cast<std::size_t>(v)]);
        next_inbox_[static_cast<std::size_t>(v)].clear();
    }
    int max_load = touched_edges_.empty() ? 0 : 1;
    for (int eid : touched_edges_) edge_used_[static_cast<std::size_t>(eid)] = 0;
    touched_edges_.clear();
    trace_.push_back(RoundTrace{round_, sent_this_round_, max_load, phase_tag_});
    return sent_this_round_;
}

void Engine::run_until(Protocol& proto, long long round_limit) {
    run_until(proto, round_limit, [] { return false; });
}

void Engine::run_until(Protocol& proto, long long round_limit, const std::function<bool()>& stop) {
    if (round_limit <= 0) throw CongestError("round limit must be positive");
    long long start = round_;
    while (!proto.finished() && !stop()) {
        if (round_ - start >= round_limit)
            throw RoundLimitExceeded("protocol still running after " + std::to_string(round_limit) +
                                     " rounds");
        run_round(proto);
    }
}

void Engine::begin_load_window() {
    std::fill(window_load_.begin(), window_load_.end(), 0);
    window_open_ = true;
}

int Engine::end_load_window() {
    window_open_ = false;
    int mx = 0;
    for (int c : window_load_) mx = std::max(mx, c);
    return mx;
}

void Engine::drain_inbox(const std::function<void(const Envelope&)>& handler) {
    for (auto& box : inbox_) {
        for (const auto& env : box) handler(env);
        box.clear();
    }
}

void Engine::write_trace_csv(std::ostream& out) const {
    out << "round,sent,max_edge_load,phase_tag\n";
    for (const auto& t : trace_)
        out << t.round << ',' << t.sent << ',' << t.max_edge_load << ',' << t.phase_tag << '\n';
}

}  // namespace cpnet
