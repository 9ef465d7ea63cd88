#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "cpnet/axioms.hpp"
#include "cpnet/engine.hpp"
#include "cpnet/network.hpp"

namespace cpnet {

struct RuntimeOptions {
    AxiomParams axioms;
    // When false, an axiom failure does not abort; waves fall back to queued
    // BFS routes and core routing goes multi-hop.
    bool require_axioms = true;
    Word word_bound = 0;  // 0 = engine default n^4
};

// A network prepared for running the distributed algorithms: representatives
// assigned, nodes renamed so the core holds [1..n_C], per-node random streams
// seeded. Construction itself runs on the engine and costs setup_rounds().
class CpRuntime {
  public:
    CpRuntime(const PartitionedNetwork& net, std::uint64_t seed, RuntimeOptions opts = {});

    const PartitionedNetwork& net() const { return net_; }
    Engine& engine() { return *engine_; }
    const AxiomReport& axiom_report() const { return report_; }
    bool degraded() const { return degraded_; }
    std::uint64_t seed() const { return seed_; }
    int setup_rounds() const { return setup_rounds_; }

    int n_core() const { return static_cast<int>(core_.size()); }
    const std::vector<NodeId>& core() const { return core_; }
    int core_index(NodeId v) const { return core_index_[static_cast<std::size_t>(v)]; }
    NodeId core_node(int idx) const { return core_[static_cast<std::size_t>(idx)]; }

    int new_id(NodeId v) const { return new_id_[static_cast<std::size_t>(v)]; }
    NodeId node_of(int id) const { return node_of_id_[static_cast<std::size_t>(id)]; }

    NodeId representative(NodeId v) const { return rep_[static_cast<std::size_t>(v)]; }
    const std::vector<NodeId>& represented(NodeId core_node) const;  // periphery nodes only
    int rep_rounds() const { return rep_rounds_; }

    Rng& node_rng(NodeId v) { return node_rng_[static_cast<std::size_t>(v)]; }

    // Pipelining period for waves: 1 when the schedule is edge-disjoint, else gamma.
    int wave_period() const { return wave_period_; }
    int gamma() const { return report_.schedule ? report_.schedule->gamma : 0; }

    // Periphery-to-core delivery of per-node payload lists along the schedule
    // (queued BFS routes when degraded). Core nodes hand their items over
    // locally. Returns per-core-node (origin, payload) lists in arrival order.
    struct WaveUpResult {
        std::vector<std::vector<std::pair<NodeId, Payload>>> at_core;  // by core index
        int rounds_used = 0;
    };
    WaveUpResult wave_up(const std::vector<std::vector<Payload>>& items_per_node);

    // Reverse direction: items addressed to origins, sent by their representatives.
    struct WaveDownResult {
        std::vector<std::vector<Payload>> at_node;
        int rounds_used = 0;
    };
    WaveDownResult wave_down(const std::vector<std::vector<Payload>>& items_per_origin);

  private:
    void assign_representatives();
    void rename_nodes();

    const PartitionedNetwork& net_;
    std::uint64_t seed_;
    RuntimeOptions opts_;
    AxiomReport report_;
    bool degraded_ = false;
    std::unique_ptr<Engine> engine_;

    std::vector<NodeId> core_;
    std::vector<int> core_index_;
    std::vector<NodeId> rep_;
    std::vector<std::vector<NodeId>> represented_;  // by core index
    std::vector<int> new_id_;
    std::vector<NodeId> node_of_id_;
    std::vector<Rng> node_rng_;
    std::vector<std::vector<TimedHop>> up_route_;  // per node; BFS routes when degraded
    int wave_period_ = 1;
    int rep_rounds_ = 0;
    int setup_rounds_ = 0;
};

// Bulk routing inside the core. Senders and destinations are core indexes.
// On a clique core: the first message of each ordered pair goes direct, the
// rest through a uniformly random intermediate (two-stage routing); otherwise
// everything is forwarded along shortest paths with per-edge FIFO queues.
// Relayed messages spend one payload word on the final destination, so they
// may carry at most kMaxWords-1 user words.
struct CoreBatch {
    std::vector<std::vector<std::pair<int, Payload>>> out;  // by sender core index
};
struct SendStats {
    int rounds_used = 0;
    long long delivered = 0;
    int max_out = 0;          // M_s over the batch
    int max_in = 0;           // M_r over the batch
    int max_intermediate = 0;  // relay load of the two-stage routing
};
SendStats send_msgs(CpRuntime& rt, const CoreBatch& batch,
                    std::vector<std::vector<Payload>>& delivered_by_core_index,
                    int pad_to_rounds = 0);

// One payload from every core node to every other core node; a single round on
// a clique core. Returns (sender core index, payload) lists per receiver.
struct BroadcastResult {
    std::vector<std::vector<std::pair<int, Payload>>> received;  // by core index
    int rounds_used = 0;
};
BroadcastResult core_broadcast(CpRuntime& rt, const std::vector<Payload>& one_per_core);

// Distributed sort over the core. Inputs are (value, satellite) pairs per core
// index; keys are chained with (submitter, ordinal) so ties are impossible.
// VL: core node i ends with the i-th contiguous block of the global order.
// IL: each core node learns the 1-based global rank of each of its inputs.
struct CoreSortResult {
    std::vector<std::vector<std::pair<Word, Word>>> vl_blocks;  // (value, satellite)
    std::vector<long long> block_start;                         // 1-based global rank
    std::vector<std::vector<long long>> il_ranks;               // parallel to inputs
    int rounds_used = 0;
};
CoreSortResult core_sort(CpRuntime& rt, const std::vector<std::vector<std::pair<Word, Word>>>& input,
                         bool want_vl, bool want_il);

// Spec-shaped wrapper for wave_up that insists on a real schedule.
CpRuntime::WaveUpResult convergecast(CpRuntime& rt, const std::vector<std::vector<Payload>>& items);

}  // namespace cpnet
