#include "cpnet/axioms.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

namespace cpnet {

namespace {

// Dinic max-flow, integral; enough for desk-scale time-expanded graphs.
class MaxFlow {
  public:
    explicit MaxFlow(int n)
        : head_(static_cast<std::size_t>(n), -1),
          level_(static_cast<std::size_t>(n)),
          it_(static_cast<std::size_t>(n)) {}

    int add_edge(int u, int v, int cap) {
        int id = static_cast<int>(edges_.size()) / 2;
        edges_.push_back({v, head_[su(u)], cap});
        head_[su(u)] = static_cast<int>(edges_.size()) - 1;
        edges_.push_back({u, head_[su(v)], 0});
        head_[su(v)] = static_cast<int>(edges_.size()) - 1;
        return id;
    }

    int run(int s, int t) {
        int flow = 0;
        while (bfs(s, t)) {
            it_ = head_;
            while (int pushed = dfs(s, t, 1 << 30)) flow += pushed;
        }
        return flow;
    }

    int flow_on(int id) const { return edges_[su(2 * id + 1)].cap; }
    void consume(int id) { --edges_[su(2 * id + 1)].cap; }

  private:
    struct E {
        int to, next, cap;
    };
    static std::size_t su(int x) { return static_cast<std::size_t>(x); }

    bool bfs(int s, int t) {
        std::fill(level_.begin(), level_.end(), -1);
        std::queue<int> q;
        level_[su(s)] = 0;
        q.push(s);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int e = head_[su(u)]; e != -1; e = edges_[su(e)].next) {
                if (edges_[su(e)].cap > 0 && level_[su(edges_[su(e)].to)] < 0) {
                    level_[su(edges_[su(e)].to)] = level_[su(u)] + 1;
                    q.push(edges_[su(e)].to);
                }
            }
        }
        return level_[su(t)] >= 0;
    }

    int dfs(int u, int t, int limit) {
        if (u == t || limit == 0) return limit;
        for (int& e = it_[su(u)]; e != -1; e = edges_[su(e)].next) {
            E& ed = edges_[su(e)];
            if (ed.cap > 0 && level_[su(ed.to)] == level_[su(u)] + 1) {
                int pushed = dfs(ed.to, t, std::min(limit, ed.cap));
                if (pushed > 0) {
                    ed.cap -= pushed;
                    edges_[su(e ^ 1)].cap += pushed;
                    return pushed;
                }
            }
        }
        return 0;
    }

    std::vector<E> edges_;
    std::vector<int> head_, level_, it_;
};

std::size_t su(int x) { return static_cast<std::size_t>(x); }

}  // namespace

bool ConvergecastSchedule::edge_disjoint() const {
    std::set<std::pair<NodeId, NodeId>> seen;
    for (const auto& hops : route)
        for (const auto& h : hops)
            if (!seen.insert({h.from, h.to}).second) return false;
    return true;
}

std::vector<std::string> AxiomReport::failed() const {
    std::vector<std::string> out;
    if (!balanced.pass) out.push_back("A_B");
    if (emulation.verdict != EmulationVerdict::Pass) out.push_back("A_E");
    if (!convergecast_pass) out.push_back("A_C");
    return out;
}

BalancedReport check_balanced(const PartitionedNetwork& net, double alpha) {
    BalancedReport rep;
    for (NodeId v : net.core_nodes()) {
        double ratio = static_cast<double>(net.d_out_core(v)) / (net.d_in_core(v) + 1);
        if (rep.witness < 0 || ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.witness = v;
        }
    }
    rep.pass = rep.worst_ratio <= alpha + 1e-12;
    return rep;
}

std::optional<ConvergecastSchedule> check_convergecast(const PartitionedNetwork& net, int gamma) {
    if (gamma < 1) throw CongestError("gamma must be >= 1");
    auto periphery = net.periphery_nodes();
    const int np = static_cast<int>(periphery.size());
    ConvergecastSchedule sched;
    sched.gamma = gamma;
    sched.route.assign(static_cast<std::size_t>(net.n), {});
    if (np == 0) return sched;

    std::vector<int> pidx(static_cast<std::size_t>(net.n), -1);
    for (int i = 0; i < np; ++i) pidx[static_cast<std::size_t>(periphery[su(i)])] = i;

    // Time-expanded graph over periphery copies: layers 0..gamma, unit capacity
    // per periphery edge-direction per layer transition, an uncapped hold arc per
    // node, and per-round delivery capacity d_in_core(p) into the sink.
    const int layers = gamma + 1;
    auto vid = [&](int pi, int t) { return pi * layers + t + 2; };
    const int SRC = 0, SNK = 1;
    MaxFlow mf(np * layers + 2);

    struct ArcRef {
        int kind;  // -1 = source, 0 = hold, 1 = move, 2 = deliver
        int pi, t, qi;
    };
    std::vector<ArcRef> arcs;

    auto add = [&](int u, int v, int cap, ArcRef ref) {
        mf.add_edge(u, v, cap);
        arcs.push_back(ref);
    };

    for (int i = 0; i < np; ++i) add(SRC, vid(i, 0), 1, {-1, i, 0, -1});
    for (int i = 0; i < np; ++i) {
        NodeId p = periphery[su(i)];
        const int core_degree = net.d_in_core(p);
        for (int t = 0; t < gamma; ++t) {
            add(vid(i, t), vid(i, t + 1), np, {0, i, t, -1});
            if (core_degree > 0) add(vid(i, t), SNK, core_degree, {2, i, t, -1});
            for (NodeId q : net.adj[static_cast<std::size_t>(p)]) {
                if (net.is_core(q)) continue;
                add(vid(i, t), vid(pidx[static_cast<std::size_t>(q)], t + 1), 1,
                    {1, i, t, pidx[static_cast<std::size_t>(q)]});
            }
        }
    }

    if (mf.run(SRC, SNK) != np) return std::nullopt;

    // Decompose into unit timed paths. Preference deliver > move > hold gets
    // messages out as early as the flow allows.
    std::map<std::pair<int, int>, std::vector<int>> out_arcs;
    for (std::size_t e = 0; e < arcs.size(); ++e) {
        const auto& a = arcs[e];
        if (a.kind <= -1) continue;
        out_arcs[{a.pi, a.t}].push_back(static_cast<int>(e));
    }
    for (auto& [key, ids] : out_arcs)
        std::sort(ids.begin(), ids.end(), [&](int x, int y) {
            if (arcs[su(x)].kind != arcs[su(y)].kind) return arcs[su(x)].kind > arcs[su(y)].kind;
            return arcs[su(x)].qi < arcs[su(y)].qi;
        });
    std::map<std::pair<int, int>, int> deliver_count;  // slot per (pi, t)

    for (int i = 0; i < np; ++i) {
        int pi = i, t = 0;
        std::vector<TimedHop> walk;
        while (true) {
            int chosen = -1;
            for (int e : out_arcs[{pi, t}])
                if (mf.flow_on(e) > 0) {
                    chosen = e;
                    break;
                }
            if (chosen < 0) throw CongestError("flow decomposition stuck");
            mf.consume(chosen);
            const auto& a = arcs[su(chosen)];
            if (a.kind == 2) {
                NodeId p = periphery[su(pi)];
                int slot = deliver_count[{pi, t}]++;
                NodeId target = -1;
                int seen = 0;
                for (NodeId q : net.adj[static_cast<std::size_t>(p)])
                    if (net.is_core(q) && seen++ == slot) {
                        target = q;
                        break;
                    }
                walk.push_back({t + 1, p, target});
                break;
            }
            if (a.kind == 1) walk.push_back({t + 1, periphery[su(pi)], periphery[su(a.qi)]});
            pi = (a.kind == 1) ? a.qi : pi;
            ++t;
        }
        // Splice out node revisits so every route is a simple path; a subset of
        // the original edge-times stays capacity-legal.
        std::vector<TimedHop> simple;
        std::map<NodeId, std::size_t> pos;
        pos[periphery[su(i)]] = 0;
        for (const auto& h : walk) {
            auto it = pos.find(h.to);
            if (it != pos.end()) {
                while (simple.size() > it->second) {
                    pos.erase(simple.back().to);
                    simple.pop_back();
                }
                continue;
            }
            simple.push_back(h);
            pos[h.to] = simple.size();
        }
        sched.route[static_cast<std::size_t>(periphery[su(i)])] = simple;
    }
    return sched;
}

EmulationReport check_emulation(const PartitionedNetwork& net, int beta) {
    if (beta < 1) throw CongestError("beta must be >= 1");
    EmulationReport rep;
    auto core = net.core_nodes();
    const int nc = static_cast<int>(core.size());

    if (net.core_is_clique()) {
        rep.verdict = EmulationVerdict::Pass;
        rep.achieved_beta = 1;
        rep.reason = "core is a clique";
        for (NodeId u : core)
            for (NodeId v : core) {
                if (u == v) continue;
                rep.pairs.push_back({u, v});
                rep.schedule.push_back({TimedHop{1, u, v}});
            }
        return rep;
    }

    // Necessary condition: a node that cannot receive n_C - 1 distinct messages
    // within beta rounds certifies failure.
    for (NodeId v : core) {
        if (static_cast<long long>(net.d_in_core(v)) * beta < nc - 1) {
            rep.verdict = EmulationVerdict::Fail;
            rep.witness = v;
            rep.reason = "node " + std::to_string(v) + " has core degree " +
                         std::to_string(net.d_in_core(v)) + " < (n_C-1)/beta";
            return rep;
        }
    }

    std::vector<int> cidx(static_cast<std::size_t>(net.n), -1);
    for (int i = 0; i < nc; ++i) cidx[static_cast<std::size_t>(core[su(i)])] = i;

    // Per-source BFS next hops inside the core; disconnected core also fails.
    std::vector<std::vector<int>> next_hop(su(nc), std::vector<int>(su(nc), -1));
    for (int s = 0; s < nc; ++s) {
        std::vector<int> dist(su(nc), -1);
        std::queue<int> q;
        dist[su(s)] = 0;
        q.push(s);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (NodeId w : net.adj[static_cast<std::size_t>(core[su(u)])]) {
                int wi = cidx[static_cast<std::size_t>(w)];
                if (wi < 0 || dist[su(wi)] >= 0) continue;
                dist[su(wi)] = dist[su(u)] + 1;
                next_hop[su(s)][su(wi)] = (u == s) ? wi : next_hop[su(s)][su(u)];
                q.push(wi);
            }
        }
        for (int d = 0; d < nc; ++d)
            if (d != s && dist[su(d)] < 0) {
                rep.verdict = EmulationVerdict::Fail;
                rep.witness = core[su(d)];
                rep.reason = "core subgraph is disconnected";
                return rep;
            }
    }

    // Greedy multi-round matching. Finishing within beta proves the axiom;
    // anything longer proves nothing, hence Unknown.
    struct Msg {
        int src, dst, cur;
        std::vector<TimedHop> hops;
    };
    std::vector<Msg> msgs;
    for (int s = 0; s < nc; ++s)
        for (int d = 0; d < nc; ++d)
            if (s != d) msgs.push_back({s, d, s, {}});
    const int cap_rounds = 4 * nc + 16;
    int round = 0;
    bool all_done = false;
    while (!all_done && round < cap_rounds) {
        ++round;
        std::set<std::pair<int, int>> used;
        all_done = true;
        for (auto& m : msgs) {
            if (m.cur == m.dst) continue;
            int nh = next_hop[su(m.cur)][su(m.dst)];
            if (nh >= 0 && used.insert({m.cur, nh}).second) {
                m.hops.push_back({round, core[su(m.cur)], core[su(nh)]});
                m.cur = nh;
            }
            if (m.cur != m.dst) all_done = false;
        }
    }
    if (all_done && round <= beta) {
        rep.verdict = EmulationVerdict::Pass;
        rep.achieved_beta = round;
        rep.reason = "greedy schedule in " + std::to_string(round) + " rounds";
        for (auto& m : msgs) {
            rep.pairs.push_back({core[su(m.src)], core[su(m.dst)]});
            rep.schedule.push_back(std::move(m.hops));
        }
    } else {
        rep.verdict = EmulationVerdict::Unknown;
        rep.heuristic_rounds = round;
        rep.reason = "greedy scheduler needed " + std::to_string(round) + " rounds (> beta)";
    }
    return rep;
}

AxiomReport check_all(const PartitionedNetwork& net, AxiomParams params) {
    AxiomReport rep;
    rep.params = params;
    rep.balanced = check_balanced(net, params.alpha);
    rep.emulation = check_emulation(net, params.beta);
    // Smallest feasible horizon up to gamma keeps downstream waves tight.
    for (int g = 1; g <= params.gamma; ++g) {
        auto sched = check_convergecast(net, g);
        if (sched) {
            rep.convergecast_pass = true;
            rep.schedule = std::move(sched);
            break;
        }
    }
    return rep;
}

}  // namespace cpnet
