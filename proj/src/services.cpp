#include "cpnet/services.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>

namespace cpnet {

namespace {

constexpr std::uint16_t kRelayBit = 0x8000;
constexpr std::uint16_t kRepRequest = 0x7003;
constexpr std::uint16_t kRepReply = 0x7004;

int ceil_div(long long a, long long b) { return static_cast<int>((a + b - 1) / b); }

// Protocol driven by the drained runner: step() only emits sends, while
// arrivals are handed to process() between rounds. Receiving and local
// computation happen at round boundaries and cost nothing, which keeps round
// counts at the CONGEST accounting.
class DrainedProtocol : public Protocol {
  public:
    virtual void process(const Envelope& env) = 0;
    void step(NodeId v, std::span<const Envelope>, long long round, Mailer& out) final {
        send_round(v, round, out);
    }

  protected:
    virtual void send_round(NodeId v, long long round, Mailer& out) = 0;
};

void run_drained(Engine& eng, DrainedProtocol& proto, long long round_limit) {
    const long long start = eng.rounds();
    while (!proto.finished()) {
        if (eng.rounds() - start >= round_limit)
            throw RoundLimitExceeded("protocol still running after " + std::to_string(round_limit) +
                                     " rounds");
        eng.run_round(proto);
        eng.drain_inbox([&](const Envelope& env) { proto.process(env); });
    }
}

// Replays precomputed timed sends. Plan rounds are relative to the engine
// round at construction; arrival counting decides completion.
class PlannedProtocol : public DrainedProtocol {
  public:
    explicit PlannedProtocol(long long base_round) : base_(base_round) {}

    void add(long long rel_round, NodeId from, NodeId to, Payload p) {
        plan_[{base_ + rel_round, from}].push_back({to, std::move(p)});
    }
    void on_receive(std::function<void(const Envelope&)> f) { sink_ = std::move(f); }
    void expect(long long n) { expected_ = n; }

    void process(const Envelope& env) override {
        ++seen_;
        if (sink_) sink_(env);
    }
    bool finished() const override { return seen_ >= expected_; }

  protected:
    void send_round(NodeId v, long long round, Mailer& out) override {
        auto it = plan_.find({round, v});
        if (it == plan_.end()) return;
        for (auto& [dst, p] : it->second) out.send(dst, p);
    }

  private:
    long long base_;
    std::map<std::pair<long long, NodeId>, std::vector<std::pair<NodeId, Payload>>> plan_;
    std::function<void(const Envelope&)> sink_;
    long long expected_ = 0, seen_ = 0;
};

// Store-and-forward along fixed per-message node paths, one message per
// directed edge per round. Used for degraded (axiom-violating) networks.
class QueuedPathProtocol : public DrainedProtocol {
  public:
    void add_message(const std::vector<NodeId>& path, Payload p) {
        if (path.size() < 2) throw CongestError("queued path too short");
        ++expected_;
        pending_[path[0]].push_back({path, std::move(p), 0});
    }
    void on_receive(std::function<void(const Envelope&)> f) { sink_ = std::move(f); }

    void process(const Envelope& env) override {
        auto& inflight = inflight_[env.dst];
        Rec rec = std::move(inflight.front());
        inflight.pop_front();
        if (rec.pos == rec.path.size() - 1) {
            ++seen_;
            if (sink_) sink_(env);
        } else {
            pending_[env.dst].push_back(std::move(rec));
        }
    }
    bool finished() const override { return seen_ >= expected_; }

  protected:
    void send_round(NodeId v, long long, Mailer& out) override {
        auto it = pending_.find(v);
        if (it == pending_.end()) return;
        // One message per outgoing edge this round, FIFO per edge.
        std::set<NodeId> used;
        std::deque<Rec> keep;
        while (!it->second.empty()) {
            Rec rec = std::move(it->second.front());
            it->second.pop_front();
            NodeId next = rec.path[rec.pos + 1];
            if (!used.insert(next).second) {
                keep.push_back(std::move(rec));
                continue;
            }
            out.send(next, rec.payload);
            rec.pos += 1;
            inflight_[next].push_back(std::move(rec));
        }
        it->second = std::move(keep);
    }

  private:
    struct Rec {
        std::vector<NodeId> path;
        Payload payload;
        std::size_t pos;  // index of the node currently holding the message
    };
    std::map<NodeId, std::deque<Rec>> pending_;
    std::map<NodeId, std::deque<Rec>> inflight_;  // arrival order matches send order
    std::function<void(const Envelope&)> sink_;
    long long expected_ = 0, seen_ = 0;
};

}  // namespace

CpRuntime::CpRuntime(const PartitionedNetwork& net, std::uint64_t seed, RuntimeOptions opts)
    : net_(net), seed_(seed), opts_(opts) {
    net_.validate();
    report_ = check_all(net_, opts_.axioms);
    if (opts_.require_axioms && !report_.all_pass()) {
        std::string what = "axiom precheck failed:";
        for (const auto& name : report_.failed()) what += " " + name;
        throw AxiomCheckFailed(what);
    }
    degraded_ = !report_.schedule.has_value();
    engine_ = std::make_unique<Engine>(net_, opts_.word_bound);

    core_ = net_.core_nodes();
    core_index_.assign(static_cast<std::size_t>(net_.n), -1);
    for (std::size_t i = 0; i < core_.size(); ++i) core_index_[static_cast<std::size_t>(core_[i])] = static_cast<int>(i);

    node_rng_.reserve(static_cast<std::size_t>(net_.n));
    for (NodeId v = 0; v < net_.n; ++v) node_rng_.push_back(Rng::for_node(seed_, v));

    up_route_.assign(static_cast<std::size_t>(net_.n), {});
    if (!degraded_) {
        up_route_ = report_.schedule->route;
        wave_period_ = report_.schedule->edge_disjoint() ? 1 : report_.schedule->gamma;
    } else {
        // Shortest path to the nearest core node, ties to the smallest core id.
        std::vector<int> dist(static_cast<std::size_t>(net_.n), -1);
        std::vector<NodeId> toward(static_cast<std::size_t>(net_.n), -1);
        std::queue<NodeId> q;
        for (NodeId c : core_) {
            dist[static_cast<std::size_t>(c)] = 0;
            q.push(c);
        }
        while (!q.empty()) {
            NodeId u = q.front();
            q.pop();
            for (NodeId w : net_.adj[static_cast<std::size_t>(u)])
                if (dist[static_cast<std::size_t>(w)] < 0) {
                    dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
                    toward[static_cast<std::size_t>(w)] = u;
                    q.push(w);
                }
        }
        for (NodeId p = 0; p < net_.n; ++p) {
            if (net_.is_core(p)) continue;
            if (dist[static_cast<std::size_t>(p)] < 0) throw DisconnectedGraph("periphery node cut off");
            std::vector<TimedHop> hops;
            NodeId cur = p;
            int r = 1;
            while (!net_.is_core(cur)) {
                NodeId nxt = toward[static_cast<std::size_t>(cur)];
                hops.push_back({r++, cur, nxt});
                cur = nxt;
            }
            up_route_[static_cast<std::size_t>(p)] = std::move(hops);
        }
        wave_period_ = 0;  // unused in queued mode
    }

    assign_representatives();
    rename_nodes();
    setup_rounds_ = static_cast<int>(engine_->rounds());
}

const std::vector<NodeId>& CpRuntime::represented(NodeId core_node) const {
    return represented_[static_cast<std::size_t>(core_index_[static_cast<std::size_t>(core_node)])];
}

void CpRuntime::assign_representatives() {
    rep_.assign(static_cast<std::size_t>(net_.n), -1);
    represented_.assign(core_.size(), {});
    for (NodeId c : core_) rep_[static_cast<std::size_t>(c)] = c;
    const long long start = engine_->rounds();
    engine_->set_phase_tag("rep-assign");

    auto periphery = net_.periphery_nodes();
    if (!periphery.empty()) {
        if (!degraded_) {
            const int g = report_.schedule->gamma;
            PlannedProtocol proto(engine_->rounds());
            long long expected = 0;
            for (NodeId p : periphery) {
                const auto& hops = up_route_[static_cast<std::size_t>(p)];
                for (const auto& h : hops) {
                    proto.add(h.round, h.from, h.to, Payload(kRepRequest, {p}));
                    // Mirrored reply retraces the route backwards.
                    proto.add(2LL * g + 1 - h.round, h.to, h.from,
                              Payload(kRepReply, {p, hops.back().to}));
                    expected += 2;
                }
            }
            proto.expect(expected);
            proto.on_receive([&](const Envelope& env) {
                if (env.payload.kind == kRepReply && env.dst == env.payload.at(0))
                    rep_[static_cast<std::size_t>(env.dst)] = static_cast<NodeId>(env.payload.at(1));
            });
            run_drained(*engine_, proto, 2LL * g + 2);
        } else {
            QueuedPathProtocol up;
            for (NodeId p : periphery) {
                std::vector<NodeId> path{p};
                for (const auto& h : up_route_[static_cast<std::size_t>(p)]) path.push_back(h.to);
                up.add_message(path, Payload(kRepRequest, {p}));
            }
            up.on_receive([&](const Envelope& env) {
                rep_[static_cast<std::size_t>(env.payload.at(0))] = env.dst;
            });
            run_drained(*engine_, up, 4LL * net_.n + 16);
            QueuedPathProtocol down;
            for (NodeId p : periphery) {
                std::vector<NodeId> path{rep_[static_cast<std::size_t>(p)]};
                const auto& hops = up_route_[static_cast<std::size_t>(p)];
                for (auto it = hops.rbegin(); it != hops.rend(); ++it) path.push_back(it->from);
                down.add_message(path, Payload(kRepReply, {p, rep_[static_cast<std::size_t>(p)]}));
            }
            run_drained(*engine_, down, 4LL * net_.n + 16);
        }
    }
    for (NodeId p : periphery)
        represented_[static_cast<std::size_t>(core_index_[static_cast<std::size_t>(rep_[static_cast<std::size_t>(p)])])].push_back(p);
    rep_rounds_ = static_cast<int>(engine_->rounds() - start);
}

void CpRuntime::rename_nodes() {
    engine_->set_phase_tag("renaming");
    const int nc = n_core();
    // Core ids are the rank of the original id among core nodes, so they are
    // globally computable; only the per-representative counts must travel.
    std::vector<Payload> counts;
    counts.reserve(static_cast<std::size_t>(nc));
    for (int i = 0; i < nc; ++i)
        counts.push_back(Payload(0x7005, {static_cast<Word>(represented_[static_cast<std::size_t>(i)].size())}));
    auto bc = core_broadcast(*this, counts);

    new_id_.assign(static_cast<std::size_t>(net_.n), 0);
    node_of_id_.assign(static_cast<std::size_t>(net_.n) + 1, -1);
    std::vector<long long> offset(static_cast<std::size_t>(nc) + 1, 0);
    for (int i = 0; i < nc; ++i)
        offset[static_cast<std::size_t>(i) + 1] =
            offset[static_cast<std::size_t>(i)] + static_cast<long long>(represented_[static_cast<std::size_t>(i)].size());
    std::vector<std::vector<Payload>> down(core_.size());
    for (int i = 0; i < nc; ++i) {
        new_id_[static_cast<std::size_t>(core_[static_cast<std::size_t>(i)])] = i + 1;
        long long next_id = nc + offset[static_cast<std::size_t>(i)] + 1;
        for (NodeId p : represented_[static_cast<std::size_t>(i)])
            new_id_[static_cast<std::size_t>(p)] = static_cast<int>(next_id++);
    }
    // Deliver each periphery node its new id.
    std::vector<std::vector<Payload>> items(static_cast<std::size_t>(net_.n));
    for (NodeId p = 0; p < net_.n; ++p)
        if (!net_.is_core(p))
            items[static_cast<std::size_t>(p)].push_back(
                Payload(0x7006, {static_cast<Word>(new_id_[static_cast<std::size_t>(p)])}));
    wave_down(items);
    for (NodeId v = 0; v < net_.n; ++v) node_of_id_[static_cast<std::size_t>(new_id_[static_cast<std::size_t>(v)])] = v;
}

CpRuntime::WaveUpResult CpRuntime::wave_up(const std::vector<std::vector<Payload>>& items_per_node) {
    WaveUpResult res;
    res.at_core.assign(core_.size(), {});
    const long long start = engine_->rounds();
    // Core nodes hand their items to themselves.
    for (NodeId v : core_)
        for (const auto& p : items_per_node[static_cast<std::size_t>(v)])
            res.at_core[static_cast<std::size_t>(core_index(v))].push_back({v, p});

    long long expected = 0;
    std::size_t max_items = 0;
    for (NodeId p = 0; p < net_.n; ++p) {
        if (net_.is_core(p)) continue;
        expected += static_cast<long long>(items_per_node[static_cast<std::size_t>(p)].size());
        max_items = std::max(max_items, items_per_node[static_cast<std::size_t>(p)].size());
    }
    if (expected == 0) return res;

    auto record = [&](const Envelope& env) {
        Payload user;
        user.kind = env.payload.kind;
        for (int i = 1; i < env.payload.n_words; ++i) user.words[static_cast<std::size_t>(user.n_words++)] = env.payload.at(i);
        res.at_core[static_cast<std::size_t>(core_index(env.dst))].push_back(
            {static_cast<NodeId>(env.payload.at(0)), user});
    };

    if (!degraded_) {
        PlannedProtocol proto(engine_->rounds());
        long long events = 0;
        for (NodeId p = 0; p < net_.n; ++p) {
            if (net_.is_core(p)) continue;
            const auto& hops = up_route_[static_cast<std::size_t>(p)];
            const auto& items = items_per_node[static_cast<std::size_t>(p)];
            for (std::size_t w = 0; w < items.size(); ++w) {
                Payload carried(items[w].kind, {p});
                for (int i = 0; i < items[w].n_words; ++i) carried.words[static_cast<std::size_t>(carried.n_words++)] = items[w].at(i);
                for (const auto& h : hops) {
                    proto.add(h.round + static_cast<long long>(w) * wave_period_, h.from, h.to, carried);
                    ++events;
                }
            }
        }
        proto.expect(events);
        proto.on_receive([&](const Envelope& env) {
            if (net_.is_core(env.dst)) record(env);
        });
        run_drained(*engine_, proto,
                    gamma() + static_cast<long long>(max_items) * std::max(wave_period_, 1) + 2);
    } else {
        QueuedPathProtocol proto;
        for (NodeId p = 0; p < net_.n; ++p) {
            if (net_.is_core(p)) continue;
            std::vector<NodeId> path{p};
            for (const auto& h : up_route_[static_cast<std::size_t>(p)]) path.push_back(h.to);
            for (const auto& item : items_per_node[static_cast<std::size_t>(p)]) {
                Payload carried(item.kind, {p});
                for (int i = 0; i < item.n_words; ++i) carried.words[static_cast<std::size_t>(carried.n_words++)] = item.at(i);
                proto.add_message(path, carried);
            }
        }
        proto.on_receive(record);
        run_drained(*engine_, proto, 8LL * net_.n + 64);
    }
    res.rounds_used = static_cast<int>(engine_->rounds() - start);
    return res;
}

CpRuntime::WaveDownResult CpRuntime::wave_down(const std::vector<std::vector<Payload>>& items_per_origin) {
    WaveDownResult res;
    res.at_node.assign(static_cast<std::size_t>(net_.n), {});
    const long long start = engine_->rounds();
    for (NodeId v : core_)
        for (const auto& p : items_per_origin[static_cast<std::size_t>(v)])
            res.at_node[static_cast<std::size_t>(v)].push_back(p);

    long long expected = 0;
    for (NodeId p = 0; p < net_.n; ++p)
        if (!net_.is_core(p)) expected += static_cast<long long>(items_per_origin[static_cast<std::size_t>(p)].size());
    if (expected == 0) return res;

    auto record = [&](const Envelope& env) {
        if (env.dst != static_cast<NodeId>(env.payload.at(0))) return;
        Payload user;
        user.kind = env.payload.kind;
        for (int i = 1; i < env.payload.n_words; ++i) user.words[static_cast<std::size_t>(user.n_words++)] = env.payload.at(i);
        res.at_node[static_cast<std::size_t>(env.dst)].push_back(user);
    };

    if (!degraded_) {
        const int g = report_.schedule->gamma;
        PlannedProtocol proto(engine_->rounds());
        long long events = 0;
        std::size_t max_items = 0;
        for (NodeId p = 0; p < net_.n; ++p) {
            if (net_.is_core(p)) continue;
            const auto& hops = up_route_[static_cast<std::size_t>(p)];
            const auto& items = items_per_origin[static_cast<std::size_t>(p)];
            max_items = std::max(max_items, items.size());
            for (std::size_t w = 0; w < items.size(); ++w) {
                Payload carried(items[w].kind, {p});
                for (int i = 0; i < items[w].n_words; ++i) carried.words[static_cast<std::size_t>(carried.n_words++)] = items[w].at(i);
                for (const auto& h : hops) {
                    proto.add(g + 1 - h.round + static_cast<long long>(w) * wave_period_, h.to, h.from, carried);
                    ++events;
                }
            }
        }
        proto.expect(events);
        proto.on_receive(record);
        run_drained(*engine_, proto,
                    g + static_cast<long long>(max_items) * std::max(wave_period_, 1) + 2);
    } else {
        QueuedPathProtocol proto;
        for (NodeId p = 0; p < net_.n; ++p) {
            if (net_.is_core(p)) continue;
            const auto& hops = up_route_[static_cast<std::size_t>(p)];
            std::vector<NodeId> path;
            path.push_back(hops.back().to);
            for (auto it = hops.rbegin(); it != hops.rend(); ++it) path.push_back(it->from);
            for (const auto& item : items_per_origin[static_cast<std::size_t>(p)]) {
                Payload carried(item.kind, {p});
                for (int i = 0; i < item.n_words; ++i) carried.words[static_cast<std::size_t>(carried.n_words++)] = item.at(i);
                proto.add_message(path, carried);
            }
        }
        proto.on_receive(record);
        run_drained(*engine_, proto, 8LL * net_.n + 64);
    }
    res.rounds_used = static_cast<int>(engine_->rounds() - start);
    return res;
}

namespace {

// Two-stage clique routing with per-edge FIFO queues; multi-hop forwarding on
// non-clique cores.
class SendMsgsProtocol : public DrainedProtocol {
  public:
    SendMsgsProtocol(CpRuntime& rt, const CoreBatch& batch,
                     std::vector<std::vector<Payload>>& delivered, SendStats& stats)
        : rt_(rt), delivered_(delivered), stats_(stats) {
        const int nc = rt_.n_core();
        clique_ = rt_.net().core_is_clique();
        queues_.assign(static_cast<std::size_t>(nc), {});
        if (!clique_) build_next_hop();

        std::vector<int> in_count(static_cast<std::size_t>(nc), 0);
        std::set<std::pair<int, int>> seen_pair;
        for (int s = 0; s < nc; ++s) {
            const auto& outs = batch.out[static_cast<std::size_t>(s)];
            stats_.max_out = std::max(stats_.max_out, static_cast<int>(outs.size()));
            for (const auto& [d, p] : outs) {
                if (d < 0 || d >= nc) throw DestinationOutsideCore("core index " + std::to_string(d));
                ++in_count[static_cast<std::size_t>(d)];
                if (d == s) {
                    delivered_[static_cast<std::size_t>(d)].push_back(p);
                    ++stats_.delivered;
                    continue;
                }
                ++expected_;
                if (clique_) {
                    if (seen_pair.insert({s, d}).second) {
                        enqueue(s, d, {d, false, p});
                    } else {
                        int mid = static_cast<int>(rt_.node_rng(rt_.core_node(s)).below(static_cast<std::uint64_t>(nc)));
                        intermediate_load_[mid] += 1;
                        stats_.max_intermediate = std::max(stats_.max_intermediate, intermediate_load_[mid]);
                        if (mid == s || mid == d)
                            enqueue(s, d, {d, false, p});
                        else
                            enqueue(s, mid, {d, true, p});
                    }
                } else {
                    int nh = next_hop_[static_cast<std::size_t>(s)][static_cast<std::size_t>(d)];
                    enqueue(s, nh, {d, nh != d, p});
                }
            }
        }
        for (int c : in_count) stats_.max_in = std::max(stats_.max_in, c);
    }

    void process(const Envelope& env) override {
        int ci = rt_.core_index(env.dst);
        if (env.payload.kind & kRelayBit) {
            int dst = static_cast<int>(env.payload.at(0));
            Payload user;
            user.kind = env.payload.kind & ~kRelayBit;
            for (int i = 1; i < env.payload.n_words; ++i) user.words[static_cast<std::size_t>(user.n_words++)] = env.payload.at(i);
            if (dst == ci) {
                delivered_[static_cast<std::size_t>(ci)].push_back(user);
                ++stats_.delivered;
                ++seen_;
            } else {
                int nh = clique_ ? dst : next_hop_[static_cast<std::size_t>(ci)][static_cast<std::size_t>(dst)];
                enqueue(ci, nh, {dst, nh != dst || !clique_, user});
            }
        } else {
            delivered_[static_cast<std::size_t>(ci)].push_back(env.payload);
            ++stats_.delivered;
            ++seen_;
        }
    }

  protected:
    void send_round(NodeId v, long long, Mailer& out) override {
        int ci = rt_.core_index(v);
        if (ci < 0) return;
        auto& q = queues_[static_cast<std::size_t>(ci)];
        for (auto& [nbr, fifo] : q) {
            if (fifo.empty()) continue;
            Rec rec = std::move(fifo.front());
            fifo.pop_front();
            if (rec.relay || (!clique_ && nbr != rec.dst)) {
                Payload wrapped;
                wrapped.kind = rec.payload.kind | kRelayBit;
                wrapped.words[0] = rec.dst;
                wrapped.n_words = 1;
                for (int i = 0; i < rec.payload.n_words; ++i) {
                    if (wrapped.n_words >= Payload::kMaxWords)
                        throw PayloadOverflow("relayed payload needs more than " +
                                              std::to_string(Payload::kMaxWords - 1) + " user words");
                    wrapped.words[static_cast<std::size_t>(wrapped.n_words++)] = rec.payload.at(i);
                }
                out.send(rt_.core_node(nbr), wrapped);
            } else {
                out.send(rt_.core_node(nbr), rec.payload);
            }
        }
    }

  public:
    bool finished() const override { return seen_ >= expected_; }

  private:
    struct Rec {
        int dst;
        bool relay;
        Payload payload;
    };

    void enqueue(int at, int nbr, Rec rec) { queues_[static_cast<std::size_t>(at)][nbr].push_back(std::move(rec)); }

    void build_next_hop() {
        const int nc = rt_.n_core();
        next_hop_.assign(static_cast<std::size_t>(nc), std::vector<int>(static_cast<std::size_t>(nc), -1));
        for (int s = 0; s < nc; ++s) {
            std::vector<int> dist(static_cast<std::size_t>(nc), -1);
            std::queue<int> q;
            dist[static_cast<std::size_t>(s)] = 0;
            q.push(s);
            while (!q.empty()) {
                int u = q.front();
                q.pop();
                for (NodeId w : rt_.net().adj[static_cast<std::size_t>(rt_.core_node(u))]) {
                    int wi = rt_.core_index(w);
                    if (wi < 0 || dist[static_cast<std::size_t>(wi)] >= 0) continue;
                    dist[static_cast<std::size_t>(wi)] = dist[static_cast<std::size_t>(u)] + 1;
                    next_hop_[static_cast<std::size_t>(s)][static_cast<std::size_t>(wi)] =
                        (u == s) ? wi : next_hop_[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];
                    q.push(wi);
                }
            }
            for (int d = 0; d < nc; ++d)
                if (d != s && dist[static_cast<std::size_t>(d)] < 0)
                    throw DisconnectedGraph("core subgraph is disconnected");
        }
    }

    CpRuntime& rt_;
    std::vector<std::vector<Payload>>& delivered_;
    SendStats& stats_;
    bool clique_ = true;
    std::vector<std::map<int, std::deque<Rec>>> queues_;  // by core index -> neighbor core index
    std::vector<std::vector<int>> next_hop_;
    std::map<int, int> intermediate_load_;
    long long expected_ = 0, seen_ = 0;
};

}  // namespace

SendStats send_msgs(CpRuntime& rt, const CoreBatch& batch,
                    std::vector<std::vector<Payload>>& delivered_by_core_index, int pad_to_rounds) {
    if (static_cast<int>(batch.out.size()) != rt.n_core())
        throw CongestError("batch must have one sender slot per core node");
    delivered_by_core_index.assign(static_cast<std::size_t>(rt.n_core()), {});
    SendStats stats;
    const long long start = rt.engine().rounds();
    SendMsgsProtocol proto(rt, batch, delivered_by_core_index, stats);
    run_drained(rt.engine(), proto, 64LL + 16LL * rt.net().n);
    while (rt.engine().rounds() - start < pad_to_rounds) rt.engine().run_round(proto);
    stats.rounds_used = static_cast<int>(rt.engine().rounds() - start);

    if (rt.net().core_is_clique() && stats.delivered > 0) {
        const int nc = rt.n_core();
        int budget = 8 * (ceil_div(stats.max_out, nc) + ceil_div(stats.max_in, nc) + 1);
        if (stats.rounds_used > std::max(budget, pad_to_rounds))
            throw CongestError("send_msgs used " + std::to_string(stats.rounds_used) +
                               " rounds, over its O((M_s+M_r)/n_C) budget " + std::to_string(budget));
    }
    return stats;
}

BroadcastResult core_broadcast(CpRuntime& rt, const std::vector<Payload>& one_per_core) {
    const int nc = rt.n_core();
    CoreBatch batch;
    batch.out.assign(static_cast<std::size_t>(nc), {});
    for (int s = 0; s < nc; ++s) {
        Payload tagged;
        tagged.kind = one_per_core[static_cast<std::size_t>(s)].kind;
        tagged.words[0] = s;
        tagged.n_words = 1;
        for (int i = 0; i < one_per_core[static_cast<std::size_t>(s)].n_words; ++i)
            tagged.words[static_cast<std::size_t>(tagged.n_words++)] = one_per_core[static_cast<std::size_t>(s)].at(i);
        for (int d = 0; d < nc; ++d)
            if (d != s) batch.out[static_cast<std::size_t>(s)].push_back({d, tagged});
    }
    std::vector<std::vector<Payload>> delivered;
    auto stats = send_msgs(rt, batch, delivered);
    BroadcastResult res;
    res.rounds_used = stats.rounds_used;
    res.received.assign(static_cast<std::size_t>(nc), {});
    for (int d = 0; d < nc; ++d) {
        for (const auto& p : delivered[static_cast<std::size_t>(d)]) {
            Payload user;
            user.kind = p.kind;
            for (int i = 1; i < p.n_words; ++i) user.words[static_cast<std::size_t>(user.n_words++)] = p.at(i);
            res.received[static_cast<std::size_t>(d)].push_back({static_cast<int>(p.at(0)), user});
        }
        // Own payload, for uniform merging logic.
        res.received[static_cast<std::size_t>(d)].push_back({d, one_per_core[static_cast<std::size_t>(d)]});
        std::sort(res.received[static_cast<std::size_t>(d)].begin(), res.received[static_cast<std::size_t>(d)].end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    }
    return res;
}

namespace {

struct ChainKey {
    Word value;
    int submitter;  // core index
    int ordinal;
    Word satellite;

    bool operator<(const ChainKey& o) const {
        return std::tie(value, submitter, ordinal) < std::tie(o.value, o.submitter, o.ordinal);
    }
};

constexpr std::uint16_t kSortSample = 0x7101;
constexpr std::uint16_t kSortSplitter = 0x7102;
constexpr std::uint16_t kSortKey = 0x7103;
constexpr std::uint16_t kSortSize = 0x7104;
constexpr std::uint16_t kSortRank = 0x7105;
constexpr std::uint16_t kSortVl = 0x7106;

}  // namespace

CoreSortResult core_sort(CpRuntime& rt, const std::vector<std::vector<std::pair<Word, Word>>>& input,
                         bool want_vl, bool want_il) {
    const int nc = rt.n_core();
    if (static_cast<int>(input.size()) != nc) throw CongestError("one input list per core node");
    CoreSortResult res;

    long long total = 0;
    int load = 0;
    for (const auto& keys : input) {
        total += static_cast<long long>(keys.size());
        load = std::max(load, static_cast<int>(keys.size()));
    }
    if (load > 8 * nc)
        throw LoadExceeded("core_sort given " + std::to_string(load) + " keys at one node (cap " +
                           std::to_string(8 * nc) + ")");
    res.il_ranks.assign(static_cast<std::size_t>(nc), {});
    res.vl_blocks.assign(static_cast<std::size_t>(nc), {});
    res.block_start.assign(static_cast<std::size_t>(nc), 0);
    if (total == 0) return res;

    const long long start_rounds = rt.engine().rounds();

    // Local sort with chained keys.
    std::vector<std::vector<ChainKey>> local(static_cast<std::size_t>(nc));
    for (int i = 0; i < nc; ++i) {
        for (std::size_t j = 0; j < input[static_cast<std::size_t>(i)].size(); ++j)
            local[static_cast<std::size_t>(i)].push_back(
                {input[static_cast<std::size_t>(i)][j].first, i, static_cast<int>(j),
                 input[static_cast<std::size_t>(i)][j].second});
        std::sort(local[static_cast<std::size_t>(i)].begin(), local[static_cast<std::size_t>(i)].end());
    }

    const int block = ceil_div(total, nc);
    const int bucket_decl = 2 * block + nc;
    auto pad = [&](long long ms, long long mr) {
        return 2 * (ceil_div(ms, nc) + ceil_div(mr, nc)) + 2;
    };

    // Regular samples, transposed: node i's j-th sample goes to node j.
    CoreBatch sample_batch;
    sample_batch.out.assign(static_cast<std::size_t>(nc), {});
    for (int i = 0; i < nc; ++i) {
        const auto& mine = local[static_cast<std::size_t>(i)];
        if (mine.empty()) continue;
        for (int j = 0; j < nc; ++j) {
            const auto& k = mine[static_cast<std::size_t>((static_cast<long long>(j) * static_cast<long long>(mine.size())) / nc)];
            sample_batch.out[static_cast<std::size_t>(i)].push_back(
                {j, Payload(kSortSample, {k.value, k.submitter, k.ordinal})});
        }
    }
    std::vector<std::vector<Payload>> samples;
    send_msgs(rt, sample_batch, samples, rt.net().core_is_clique() ? 1 : 0);

    // Median of the received samples becomes this node's splitter candidate.
    std::vector<Payload> candidate(static_cast<std::size_t>(nc));
    for (int j = 0; j < nc; ++j) {
        std::vector<ChainKey> got;
        for (const auto& p : samples[static_cast<std::size_t>(j)])
            got.push_back({p.at(0), static_cast<int>(p.at(1)), static_cast<int>(p.at(2)), 0});
        if (got.empty()) {
            candidate[static_cast<std::size_t>(j)] =
                Payload(kSortSplitter, {rt.engine().word_bound(), nc, 0});
        } else {
            std::sort(got.begin(), got.end());
            const auto& med = got[(got.size() - 1) / 2];
            candidate[static_cast<std::size_t>(j)] = Payload(kSortSplitter, {med.value, med.submitter, med.ordinal});
        }
    }
    auto bc = core_broadcast(rt, candidate);
    std::vector<ChainKey> splitters;
    for (const auto& [from, p] : bc.received[0])
        splitters.push_back({p.at(0), static_cast<int>(p.at(1)), static_cast<int>(p.at(2)), 0});
    std::sort(splitters.begin(), splitters.end());
    splitters.pop_back();  // n_C - 1 bucket bounds

    auto bucket_of = [&](const ChainKey& k) {
        int b = 0;
        for (const auto& s : splitters)
            if (s < k) ++b;
        return b;
    };

    // Route keys to bucket owners.
    CoreBatch key_batch;
    key_batch.out.assign(static_cast<std::size_t>(nc), {});
    for (int i = 0; i < nc; ++i)
        for (const auto& k : local[static_cast<std::size_t>(i)])
            key_batch.out[static_cast<std::size_t>(i)].push_back(
                {bucket_of(k), Payload(kSortKey, {k.value, k.submitter, k.ordinal, k.satellite})});
    std::vector<std::vector<Payload>> bucket_msgs;
    send_msgs(rt, key_batch, bucket_msgs, rt.net().core_is_clique() ? pad(load, bucket_decl) : 0);

    std::vector<std::vector<ChainKey>> buckets(static_cast<std::size_t>(nc));
    for (int b = 0; b < nc; ++b) {
        for (const auto& p : bucket_msgs[static_cast<std::size_t>(b)])
            buckets[static_cast<std::size_t>(b)].push_back(
                {p.at(0), static_cast<int>(p.at(1)), static_cast<int>(p.at(2)), p.at(3)});
        std::sort(buckets[static_cast<std::size_t>(b)].begin(), buckets[static_cast<std::size_t>(b)].end());
    }

    // Bucket sizes to everyone; offsets then follow locally.
    std::vector<Payload> sizes;
    for (int b = 0; b < nc; ++b)
        sizes.push_back(Payload(kSortSize, {static_cast<Word>(buckets[static_cast<std::size_t>(b)].size())}));
    auto size_bc = core_broadcast(rt, sizes);
    std::vector<long long> bucket_offset(static_cast<std::size_t>(nc) + 1, 0);
    for (int b = 0; b < nc; ++b)
        bucket_offset[static_cast<std::size_t>(b) + 1] =
            bucket_offset[static_cast<std::size_t>(b)] + size_bc.received[0][static_cast<std::size_t>(b)].second.at(0);

    if (want_il) {
        CoreBatch rank_batch;
        rank_batch.out.assign(static_cast<std::size_t>(nc), {});
        for (int b = 0; b < nc; ++b)
            for (std::size_t pos = 0; pos < buckets[static_cast<std::size_t>(b)].size(); ++pos) {
                const auto& k = buckets[static_cast<std::size_t>(b)][pos];
                long long rank = bucket_offset[static_cast<std::size_t>(b)] + static_cast<long long>(pos) + 1;
                rank_batch.out[static_cast<std::size_t>(b)].push_back(
                    {k.submitter, Payload(kSortRank, {k.ordinal, rank})});
            }
        std::vector<std::vector<Payload>> rank_msgs;
        send_msgs(rt, rank_batch, rank_msgs, rt.net().core_is_clique() ? pad(bucket_decl, load) : 0);
        for (int i = 0; i < nc; ++i) {
            res.il_ranks[static_cast<std::size_t>(i)].assign(input[static_cast<std::size_t>(i)].size(), 0);
            for (const auto& p : rank_msgs[static_cast<std::size_t>(i)])
                res.il_ranks[static_cast<std::size_t>(i)][static_cast<std::size_t>(p.at(0))] = p.at(1);
        }
    }

    if (want_vl) {
        // Global position decides the owning block.
        std::vector<long long> block_start(static_cast<std::size_t>(nc));
        for (int i = 0; i < nc; ++i) block_start[static_cast<std::size_t>(i)] = static_cast<long long>(i) * block + 1;
        CoreBatch vl_batch;
        vl_batch.out.assign(static_cast<std::size_t>(nc), {});
        for (int b = 0; b < nc; ++b)
            for (std::size_t pos = 0; pos < buckets[static_cast<std::size_t>(b)].size(); ++pos) {
                const auto& k = buckets[static_cast<std::size_t>(b)][pos];
                long long rank = bucket_offset[static_cast<std::size_t>(b)] + static_cast<long long>(pos) + 1;
                int owner = static_cast<int>((rank - 1) / block);
                vl_batch.out[static_cast<std::size_t>(b)].push_back(
                    {owner, Payload(kSortVl, {rank, k.value, k.satellite})});
            }
        std::vector<std::vector<Payload>> vl_msgs;
        send_msgs(rt, vl_batch, vl_msgs, rt.net().core_is_clique() ? pad(bucket_decl, block) : 0);
        for (int i = 0; i < nc; ++i) {
            std::vector<std::pair<long long, std::pair<Word, Word>>> got;
            for (const auto& p : vl_msgs[static_cast<std::size_t>(i)])
                got.push_back({p.at(0), {p.at(1), p.at(2)}});
            std::sort(got.begin(), got.end());
            for (const auto& [rank, vs] : got) res.vl_blocks[static_cast<std::size_t>(i)].push_back(vs);
            res.block_start[static_cast<std::size_t>(i)] = block_start[static_cast<std::size_t>(i)];
        }
    }

    res.rounds_used = static_cast<int>(rt.engine().rounds() - start_rounds);
    // Constant at a fixed per-node load factor; the padded stages make this a
    // function of ceil(load/n_C) alone on clique cores.
    const int budget = 40 * (ceil_div(load, nc) + 1);
    if (rt.net().core_is_clique() && res.rounds_used > budget)
        throw CongestError("core_sort used " + std::to_string(res.rounds_used) +
                           " rounds, over its budget " + std::to_string(budget));
    return res;
}

CpRuntime::WaveUpResult convergecast(CpRuntime& rt, const std::vector<std::vector<Payload>>& items) {
    if (rt.degraded()) throw ScheduleMissing("no convergecast schedule for this network");
    return rt.wave_up(items);
}

}  // namespace cpnet
