#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cpnet/network.hpp"
#include "cpnet/types.hpp"

namespace cpnet {

struct RoundTrace {
    long long round = 0;
    long long sent = 0;
    int max_edge_load = 0;  // per directed edge within the round; 0 or 1 after a legal round
    std::string phase_tag;
};

class Engine;

// Collects one node's outbox for the current round, validating CONGEST rules
// at send time: adjacency, payload word bounds, one message per edge-direction.
class Mailer {
  public:
    void send(NodeId dst, const Payload& p);

  private:
    friend class Engine;
    Engine* engine_ = nullptr;
    NodeId src_ = -1;
};

// A synchronous distributed protocol. The engine calls step() for every node in
// ascending NodeId order each round; step(v, ...) must only read node v's own
// state plus its inbox so the order is unobservable.
class Protocol {
  public:
    virtual ~Protocol() = default;
    virtual void step(NodeId v, std::span<const Envelope> inbox, long long round, Mailer& out) = 0;
    virtual bool finished() const = 0;
};

class Engine {
  public:
    explicit Engine(const PartitionedNetwork& net, Word word_bound = 0);

    // One synchronous round: run every node's step, then deliver. Returns messages sent.
    long long run_round(Protocol& proto);
    // Rounds until proto.finished() or stop(); throws RoundLimitExceeded past the limit.
    void run_until(Protocol& proto, long long round_limit);
    void run_until(Protocol& proto, long long round_limit, const std::function<bool()>& stop);

    long long rounds() const { return round_; }
    const PartitionedNetwork& network() const { return net_; }
    Word word_bound() const { return word_bound_; }

    // Cumulative per-directed-edge message counts between begin and end of a window.
    void begin_load_window();
    int end_load_window();

    void set_phase_tag(std::string tag) { phase_tag_ = std::move(tag); }
    const std::vector<RoundTrace>& trace() const { return trace_; }
    void write_trace_csv(std::ostream& out) const;

    // Inbox that the next run_round will hand to node v.
    std::span<const Envelope> pending_inbox(NodeId v) const { return inbox_[static_cast<std::size_t>(v)]; }

    // Hand all delivered-but-unprocessed envelopes to a handler and clear them.
    // Models the local processing at the start of a round; costs no round.
    void drain_inbox(const std::function<void(const Envelope&)>& handler);

  private:
    friend class Mailer;
    void deliver(NodeId src, NodeId dst, const Payload& p);
    int directed_edge_id(NodeId src, NodeId dst) const;  // -1 when not adjacent

    const PartitionedNetwork& net_;
    Word word_bound_;
    std::vector<int> csr_offset_;  // node -> start of its slots in edge arrays

    long long round_ = 0;
    std::string phase_tag_;
    std::vector<RoundTrace> trace_;

    std::vector<std::vector<Envelope>> inbox_;
    std::vector<std::vector<Envelope>> next_inbox_;
    std::vector<char> edge_used_;      // this round
    std::vector<int> touched_edges_;   // reset list for edge_used_
    std::vector<int> window_load_;     // cumulative within load window
    bool window_open_ = false;
    long long sent_this_round_ = 0;
};

}  // namespace cpnet
