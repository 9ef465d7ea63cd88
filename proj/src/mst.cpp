#include "cpnet/mst.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "cpnet/engine.hpp"
#include "cpnet/services.hpp"

namespace cpnet {

namespace {

constexpr std::uint16_t kRefresh = 0x0101;
constexpr std::uint16_t kReport = 0x0102;     // node -> representative
constexpr std::uint16_t kRepReport = 0x0103;  // representative -> leader
constexpr std::uint16_t kMergeReq = 0x0104;
constexpr std::uint16_t kMergeReply = 0x0105;
constexpr std::uint16_t kFin = 0x0106;
constexpr std::uint16_t kUpdate = 0x0107;  // leader -> representative
constexpr std::uint16_t kAdd = 0x0108;     // old leader -> new leader
constexpr std::uint16_t kDown = 0x0109;    // representative -> node
constexpr std::uint16_t kDone = 0x010a;
constexpr std::uint16_t kMark = 0x010b;

enum class FragState { Active, Frozen, Root, Waiting };

int ceil_log2(int n) {
    int b = 0;
    while ((1LL << b) < n) ++b;
    return b;
}

struct MwoeCandidate {
    Word weight = 0;
    long long edge_code = -1;  // min(u,v)*n + max(u,v), original ids; -1 = none
    int target_frag = 0;
    int target_leader = 0;  // core index

    bool better_than(const MwoeCandidate& o) const {
        if (edge_code < 0) return false;
        if (o.edge_code < 0) return true;
        if (weight != o.weight) return weight < o.weight;
        return edge_code < o.edge_code;
    }
};

struct FragmentRecord {
    FragState state = FragState::Active;
    long long size = 1;
    int group_key = -1;  // merge target while frozen/waiting
    long long committed_edge = -1;
    std::set<int> reps;  // core indexes hosting nodes of this fragment, refreshed per phase
    // root bookkeeping
    std::map<int, std::pair<int, long long>> sources;  // speaker frag -> (leader cidx, group nodes)
    bool got_request = false;
    int waiting_since = -1;
    // resolution outcome
    bool resolved = false;
    int new_id = 0;
    int new_leader = -1;
};

struct MergeGroup {
    std::set<int> members;
    int next = 0;
    int next_leader = 0;    // core index of l(next)
    int target_leader = 0;  // core index of l(group key)
    long long reported_nodes = 0;  // member sizes the root has already been told about
    bool has_new_member = false;
};

struct LeaderState {
    std::map<int, FragmentRecord> frags;
    std::map<int, MergeGroup> groups;  // keyed by the shared merge target
};

struct NodeState {
    int frag = 0;
    int leader = 0;  // core index
    std::vector<int> nbr_frag;
    std::vector<int> nbr_leader;
    std::vector<char> marked;
};

// One send-only neighbor-exchange round; arrivals are drained by the caller.
class AnnounceProtocol : public Protocol {
  public:
    using SendFn = std::function<void(NodeId v, Mailer& out)>;
    explicit AnnounceProtocol(SendFn fn) : fn_(std::move(fn)) {}
    void step(NodeId v, std::span<const Envelope>, long long, Mailer& out) override { fn_(v, out); }
    bool finished() const override { return false; }

  private:
    SendFn fn_;
};

class CpMstRun {
  public:
    CpMstRun(const PartitionedNetwork& net, std::uint64_t seed, const MstOptions& opts)
        : net_(net), rt_(net, seed, runtime_options(net, opts)) {
        if (!net.weighted()) throw CongestError("MST needs edge weights");
        nc_ = rt_.n_core();
        round_limit_ =
            opts.round_limit > 0 ? opts.round_limit : 10LL * ceil_log2(net.n) * ceil_log2(net.n);
    }

    MstResult run() {
        phase0();
        const int phase_cap = 4 * ceil_log2(net_.n) + 16;
        while (!finished_) {
            ++phase_;
            if (phase_ > phase_cap)
                throw RoundLimitExceeded("MST still merging after " + std::to_string(phase_cap) +
                                         " phases");
            run_phase();
            check_budget();
        }
        finale();
        MstResult res;
        res.stats = stats_;
        res.stats.phases = phase_;
        res.stats.rounds = rt_.engine().rounds();
        for (NodeId v = 0; v < net_.n; ++v) res.new_id.push_back(rt_.new_id(v));
        for (NodeId v = 0; v < net_.n; ++v) {
            const auto& a = net_.adj[static_cast<std::size_t>(v)];
            for (std::size_t i = 0; i < a.size(); ++i)
                if (nodes_[static_cast<std::size_t>(v)].marked[i]) res.edges.insert(edge_key(v, a[i]));
        }
        return res;
    }

  private:
    static RuntimeOptions runtime_options(const PartitionedNetwork& net, const MstOptions& opts) {
        RuntimeOptions r;
        r.axioms = opts.axioms;
        r.require_axioms = opts.require_axioms;
        Word b = 1;
        for (int i = 0; i < 4; ++i) b *= std::max(net.n, 2);
        for (const auto& [e, w] : net.weight) b = std::max(b, w);
        r.word_bound = b;
        return r;
    }

    void check_budget() {
        if (rt_.engine().rounds() > round_limit_)
            throw RoundLimitExceeded("MST exceeded its round budget of " +
                                     std::to_string(round_limit_) + " rounds");
    }

    long long code_of(NodeId u, NodeId v) const {
        auto [a, b] = edge_key(u, v);
        return static_cast<long long>(a) * net_.n + b;
    }

    int adj_slot(NodeId v, NodeId w) const {
        const auto& a = net_.adj[static_cast<std::size_t>(v)];
        return static_cast<int>(std::lower_bound(a.begin(), a.end(), w) - a.begin());
    }

    // Phase 0: every representative deals leaders for its fragments from a
    // shuffled core order and announces them in one wave; F_lead fills lazily
    // from the first round of reports.
    void phase0() {
        rt_.engine().set_phase_tag("p0");
        nodes_.assign(static_cast<std::size_t>(net_.n), {});
        leaders_.assign(static_cast<std::size_t>(nc_), {});
        rep_frag_.assign(static_cast<std::size_t>(nc_), {});
        down_items_.assign(static_cast<std::size_t>(nc_), {});
        for (NodeId v = 0; v < net_.n; ++v) {
            auto& st = nodes_[static_cast<std::size_t>(v)];
            st.frag = rt_.new_id(v);
            st.nbr_frag.assign(net_.adj[static_cast<std::size_t>(v)].size(), 0);
            st.nbr_leader.assign(net_.adj[static_cast<std::size_t>(v)].size(), 0);
            st.marked.assign(net_.adj[static_cast<std::size_t>(v)].size(), 0);
        }
        std::vector<std::vector<Payload>> down(static_cast<std::size_t>(net_.n));
        std::vector<int> lead_count(static_cast<std::size_t>(nc_), 0);
        for (int ci = 0; ci < nc_; ++ci) {
            NodeId w = rt_.core_node(ci);
            std::vector<int> order(static_cast<std::size_t>(nc_));
            for (int i = 0; i < nc_; ++i) order[static_cast<std::size_t>(i)] = i;
            rt_.node_rng(w).shuffle(order);
            std::vector<NodeId> members{w};
            for (NodeId p : rt_.represented(w)) members.push_back(p);
            for (std::size_t k = 0; k < members.size(); ++k) {
                int lead = order[k % static_cast<std::size_t>(nc_)];
                NodeId v = members[k];
                nodes_[static_cast<std::size_t>(v)].leader = lead;
                rep_frag_[static_cast<std::size_t>(ci)][v] = {rt_.new_id(v), lead};
                ++lead_count[static_cast<std::size_t>(lead)];
                if (v != w) down[static_cast<std::size_t>(v)].push_back(Payload(kDown, {lead}));
            }
        }
        rt_.wave_down(down);
        stats_.phase0_rounds = static_cast<int>(rt_.engine().rounds());
        stats_.leader_load_max = *std::max_element(lead_count.begin(), lead_count.end());
    }

    void run_phase() {
        // Refresh: every node announces (fragment, leader) to all neighbors.
        rt_.engine().set_phase_tag("p" + std::to_string(phase_) + ".refresh");
        AnnounceProtocol refresh([&](NodeId v, Mailer& out) {
            const auto& st = nodes_[static_cast<std::size_t>(v)];
            for (NodeId w : net_.adj[static_cast<std::size_t>(v)])
                out.send(w, Payload(kRefresh, {st.frag, st.leader}));
        });
        rt_.engine().run_round(refresh);
        rt_.engine().drain_inbox([&](const Envelope& env) {
            auto& st = nodes_[static_cast<std::size_t>(env.dst)];
            int slot = adj_slot(env.dst, env.src);
            st.nbr_frag[static_cast<std::size_t>(slot)] = static_cast<int>(env.payload.at(0));
            st.nbr_leader[static_cast<std::size_t>(slot)] = static_cast<int>(env.payload.at(1));
        });

        // Step 1, local: minimum-weight outgoing edge per node.
        std::vector<MwoeCandidate> local_best(static_cast<std::size_t>(net_.n));
        for (NodeId v = 0; v < net_.n; ++v) {
            const auto& st = nodes_[static_cast<std::size_t>(v)];
            const auto& a = net_.adj[static_cast<std::size_t>(v)];
            MwoeCandidate best;
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (st.nbr_frag[i] == st.frag) continue;
                MwoeCandidate cand{net_.edge_weight(v, a[i]), code_of(v, a[i]), st.nbr_frag[i],
                                   st.nbr_leader[i]};
                if (cand.better_than(best)) best = cand;
            }
            local_best[static_cast<std::size_t>(v)] = best;
        }

        // Step 2: reports to representatives.
        rt_.engine().set_phase_tag("p" + std::to_string(phase_) + ".s2");
        std::vector<std::vector<Payload>> items(static_cast<std::size_t>(net_.n));
        for (NodeId v = 0; v < net_.n; ++v) {
            const auto& b = local_best[static_cast<std::size_t>(v)];
            items[static_cast<std::size_t>(v)].push_back(
                Payload(kReport, {b.edge_code, b.weight, pack(b.target_frag, b.target_leader)}));
        }
        auto up = rt_.wave_up(items);

        std::vector<std::map<int, MwoeCandidate>> rep_best(static_cast<std::size_t>(nc_));
        for (int ci = 0; ci < nc_; ++ci) {
            for (const auto& [origin, p] : up.at_core[static_cast<std::size_t>(ci)]) {
                auto it = rep_frag_[static_cast<std::size_t>(ci)].find(origin);
                if (it == rep_frag_[static_cast<std::size_t>(ci)].end())
                    throw IllegalTransition("report from a node this core member does not represent");
                int frag = it->second.first;
                auto [tf, tl] = unpack(p.at(2));
                MwoeCandidate cand{p.at(1), p.at(0), tf, tl};
                auto& best = rep_best[static_cast<std::size_t>(ci)][frag];
                if (cand.better_than(best)) best = cand;
            }
        }

        // Steps 3-5 drive the per-edge load criterion; measure them as one window.
        rt_.engine().begin_load_window();

        // Step 3: representatives to leaders.
        rt_.engine().set_phase_tag("p" + std::to_string(phase_) + ".s3");
        CoreBatch report_batch;
        report_batch.out.assign(static_cast<std::size_t>(nc_), {});
        for (int ci = 0; ci < nc_; ++ci) {
            std::map<int, int> frag_lead;
            for (const auto& [node, fl] : rep_frag_[static_cast<std::size_t>(ci)])
                frag_lead[fl.first] = fl.second;
            for (const auto& [frag, cand] : rep_best[static_cast<std::size_t>(ci)])
                report_batch.out[static_cast<std::size_t>(ci)].push_back(
                    {frag_lead.at(frag),
                     Payload(kRepReport, {frag, ci, cand.edge_code, cand.weight,
                                          pack(cand.target_frag, cand.target_leader)})});
        }
        std::vector<std::vector<Payload>> reports;
        send_msgs(rt_, report_batch, reports);

        std::vector<std::map<int, MwoeCandidate>> frag_best(static_cast<std::size_t>(nc_));
        bool any_outgoing = false;
        int live_fragments = 0;
        for (int w = 0; w < nc_; ++w) {
            for (const auto& p : reports[static_cast<std::size_t>(w)]) {
                int frag = static_cast<int>(p.at(0));
                auto& rec = leaders_[static_cast<std::size_t>(w)].frags[frag];  // lazily created
                rec.reps.insert(static_cast<int>(p.at(1)));
                auto [tf, tl] = unpack(p.at(4));
                MwoeCandidate cand{p.at(3), p.at(2), tf, tl};
                if (cand.edge_code >= 0) {
                    auto& best = frag_best[static_cast<std::size_t>(w)][frag];
                    if (cand.better_than(best)) best = cand;
                    any_outgoing = true;
                }
            }
            live_fragments += static_cast<int>(leaders_[static_cast<std::size_t>(w)].frags.size());
        }

        if (!any_outgoing) {
            if (live_fragments != 1)
                throw IllegalTransition("no outgoing edges but " + std::to_string(live_fragments) +
                                        " fragments remain");
            rt_.engine().end_load_window();
            finished_ = true;
            return;
        }

        // Step 4: MergeFrags as communication slots.
        rt_.engine().set_phase_tag("p" + std::to_string(phase_) + ".s4");
        step4_commit(frag_best);
        slot_requests(true);   // FindRoot
        slot_requests(false);  // PJ iteration 1
        slot_requests(false);  // PJ iteration 2
        slot_fin();

        // Step 5: updates to representatives plus leadership handoff.
        rt_.engine().set_phase_tag("p" + std::to_string(phase_) + ".s5");
        step5_updates();
        stats_.max_edge_load_steps345 =
            std::max(stats_.max_edge_load_steps345, rt_.engine().end_load_window());

        // Step 6: representatives to nodes.
        rt_.engine().set_phase_tag("p" + std::to_string(phase_) + ".s6");
        step6_down();

        for (int w = 0; w < nc_; ++w)
            for (auto& [frag, rec] : leaders_[static_cast<std::size_t>(w)].frags) {
                rec.got_request = false;
                if (rec.state == FragState::Waiting && rec.waiting_since >= 0)
                    stats_.max_wait_phases =
                        std::max(stats_.max_wait_phases, phase_ - rec.waiting_since);
            }
    }

    Word pack(int frag, int leader) const { return static_cast<Word>(frag) * (nc_ + 1) + leader; }
    std::pair<int, int> unpack(Word w) const {
        return {static_cast<int>(w / (nc_ + 1)), static_cast<int>(w % (nc_ + 1))};
    }

    void step4_commit(std::vector<std::map<int, MwoeCandidate>>& frag_best) {
        for (int w = 0; w < nc_; ++w) {
            auto& ls = leaders_[static_cast<std::size_t>(w)];
            for (auto& [frag, rec] : ls.frags) {
                if (rec.state != FragState::Active) continue;
                auto it = frag_best[static_cast<std::size_t>(w)].find(frag);
                if (it == frag_best[static_cast<std::size_t>(w)].end() || it->second.edge_code < 0)
                    continue;  // no outgoing edge; nothing to merge
                const auto& cand = it->second;
                rec.state = FragState::Frozen;
                rec.group_key = cand.target_frag;
                rec.committed_edge = cand.edge_code;
                auto& g = ls.groups[cand.target_frag];
                if (g.members.empty()) {
                    g.next = cand.target_frag;
                    g.next_leader = cand.target_leader;
                    g.target_leader = cand.target_leader;
                }
                g.members.insert(frag);
                g.has_new_member = true;
            }
        }
    }

    // One request/reply exchange. FindRoot mode queries the group target for
    // reciprocity; PJ mode queries the current pointer. Only the smallest
    // frozen member of a group (its speaker) transmits.
    void slot_requests(bool find_root) {
        CoreBatch req;
        req.out.assign(static_cast<std::size_t>(nc_), {});
        std::vector<std::map<int, int>> asked(static_cast<std::size_t>(nc_));  // speaker -> group key
        for (int w = 0; w < nc_; ++w) {
            auto& ls = leaders_[static_cast<std::size_t>(w)];
            for (auto& [key, g] : ls.groups) {
                if (find_root && !g.has_new_member) continue;
                int speaker = -1;
                long long group_nodes = 0;
                for (int m : g.members) {
                    const auto& rec = ls.frags.at(m);
                    group_nodes += rec.size;
                    if (rec.state == FragState::Frozen && speaker < 0) speaker = m;
                }
                if (speaker < 0) continue;
                int target = find_root ? key : g.next;
                int target_leader = find_root ? g.target_leader : g.next_leader;
                req.out[static_cast<std::size_t>(w)].push_back(
                    {target_leader,
                     Payload(kMergeReq, {speaker, w, target, group_nodes - g.reported_nodes})});
                asked[static_cast<std::size_t>(w)][speaker] = key;
            }
        }
        std::vector<std::vector<Payload>> incoming;
        send_msgs(rt_, req, incoming);

        CoreBatch replies;
        replies.out.assign(static_cast<std::size_t>(nc_), {});
        for (int w = 0; w < nc_; ++w) {
            auto& ls = leaders_[static_cast<std::size_t>(w)];
            for (const auto& p : incoming[static_cast<std::size_t>(w)]) {
                int asker = static_cast<int>(p.at(0));
                int asker_leader = static_cast<int>(p.at(1));
                int target = static_cast<int>(p.at(2));
                long long group_nodes = p.at(3);
                auto it = ls.frags.find(target);
                if (it == ls.frags.end())
                    throw IllegalTransition("merge-request for unknown fragment " +
                                            std::to_string(target));
                auto& rec = it->second;
                Payload reply;
                if (rec.state == FragState::Root) {
                    rec.sources[asker] = {asker_leader, group_nodes};
                    rec.got_request = true;
                    reply = Payload(kMergeReply, {asker, target, 1, 0, 0});
                } else if (rec.state == FragState::Frozen || rec.state == FragState::Waiting) {
                    const auto& g = ls.groups.at(rec.group_key);
                    reply = Payload(kMergeReply, {asker, target, 0, g.next, g.next_leader});
                } else {
                    throw IllegalTransition("merge-request hit an active fragment");
                }
                replies.out[static_cast<std::size_t>(w)].push_back({asker_leader, reply});
            }
        }
        std::vector<std::vector<Payload>> back;
        send_msgs(rt_, replies, back);

        for (int w = 0; w < nc_; ++w) {
            auto& ls = leaders_[static_cast<std::size_t>(w)];
            for (const auto& p : back[static_cast<std::size_t>(w)]) {
                int asker = static_cast<int>(p.at(0));
                int replied = static_cast<int>(p.at(1));
                bool is_null = p.at(2) != 0;
                int next = static_cast<int>(p.at(3));
                int next_leader = static_cast<int>(p.at(4));
                auto pending = asked[static_cast<std::size_t>(w)].find(asker);
                if (pending == asked[static_cast<std::size_t>(w)].end())
                    throw IllegalTransition("unsolicited merge-reply");
                auto& g = ls.groups.at(pending->second);
                if (find_root) {
                    // Reciprocity: the reply names a fragment this leader leads in
                    // the same group; the smaller id of the pair becomes the root.
                    if (!is_null && g.members.count(next) && next <= replied) {
                        auto& root = ls.frags.at(next);
                        if (root.state != FragState::Frozen && root.state != FragState::Root)
                            throw IllegalTransition("reciprocal fragment in unexpected state");
                        root.state = FragState::Root;
                        if (phase_ == 1) stats_.phase1_roots.push_back(next);
                    }
                    continue;
                }
                if (is_null) {
                    // next already points at the root; the whole group waits for FIN.
                    long long sizes = 0;
                    for (int m : g.members) {
                        auto& rec = ls.frags.at(m);
                        sizes += rec.size;
                        if (rec.state == FragState::Frozen) {
                            rec.state = FragState::Waiting;
                            rec.waiting_since = phase_;
                        }
                    }
                    g.reported_nodes = sizes;
                } else {
                    g.next = next;
                    g.next_leader = next_leader;
                }
            }
            if (find_root)
                for (auto& [key, g] : ls.groups) g.has_new_member = false;
        }
    }

    void slot_fin() {
        CoreBatch fin;
        fin.out.assign(static_cast<std::size_t>(nc_), {});
        for (int w = 0; w < nc_; ++w) {
            auto& ls = leaders_[static_cast<std::size_t>(w)];
            for (auto& [frag, rec] : ls.frags) {
                if (rec.state != FragState::Root || rec.got_request) continue;
                long long tree_nodes = rec.size;
                for (const auto& [spk, src] : rec.sources) tree_nodes += src.second;
                if (tree_nodes > (1LL << std::min(2 + phase_, 40))) continue;  // defer large trees
                // Fresh random id among the merge-tree fragments this root heard
                // from, fresh random leader anywhere in the core.
                std::vector<int> ids{frag};
                for (const auto& [spk, src] : rec.sources) ids.push_back(spk);
                Rng& rng = rt_.node_rng(rt_.core_node(w));
                int new_id = ids[static_cast<std::size_t>(rng.below(ids.size()))];
                int new_leader = static_cast<int>(rng.below(static_cast<std::uint64_t>(nc_)));
                rec.resolved = true;
                rec.new_id = new_id;
                rec.new_leader = new_leader;
                for (const auto& [spk, src] : rec.sources)
                    fin.out[static_cast<std::size_t>(w)].push_back(
                        {src.first, Payload(kFin, {spk, new_id, new_leader})});
            }
        }
        std::vector<std::vector<Payload>> got;
        send_msgs(rt_, fin, got);
        for (int w = 0; w < nc_; ++w) {
            auto& ls = leaders_[static_cast<std::size_t>(w)];
            for (const auto& p : got[static_cast<std::size_t>(w)]) {
                int speaker = static_cast<int>(p.at(0));
                auto& srec = ls.frags.at(speaker);
                for (int m : ls.groups.at(srec.group_key).members) {
                    auto& rec = ls.frags.at(m);
                    rec.resolved = true;
                    rec.new_id = static_cast<int>(p.at(1));
                    rec.new_leader = static_cast<int>(p.at(2));
                }
            }
        }
    }

    void step5_updates() {
        CoreBatch batch;
        batch.out.assign(static_cast<std::size_t>(nc_), {});
        for (int w = 0; w < nc_; ++w)
            for (auto& [frag, rec] : leaders_[static_cast<std::size_t>(w)].frags) {
                if (!rec.resolved) continue;
                for (int rep : rec.reps)
                    batch.out[static_cast<std::size_t>(w)].push_back(
                        {rep,
                         Payload(kUpdate, {frag, rec.new_id, rec.new_leader, rec.committed_edge})});
                batch.out[static_cast<std::size_t>(w)].push_back(
                    {rec.new_leader, Payload(kAdd, {rec.new_id, rec.size})});
            }
        std::vector<std::vector<Payload>> got;
        send_msgs(rt_, batch, got);

        // Retire resolved fragments and their groups first, so a recycled id
        // lands in a fresh record.
        for (int w = 0; w < nc_; ++w) {
            auto& ls = leaders_[static_cast<std::size_t>(w)];
            for (auto it = ls.frags.begin(); it != ls.frags.end();) {
                if (!it->second.resolved) {
                    ++it;
                    continue;
                }
                if (it->second.group_key >= 0) {
                    auto git = ls.groups.find(it->second.group_key);
                    if (git != ls.groups.end()) {
                        git->second.members.erase(it->first);
                        if (git->second.members.empty()) ls.groups.erase(git);
                    }
                }
                it = ls.frags.erase(it);
            }
        }
        for (int w = 0; w < nc_; ++w) {
            down_items_[static_cast<std::size_t>(w)].clear();
            const auto before = rep_frag_[static_cast<std::size_t>(w)];
            for (const auto& p : got[static_cast<std::size_t>(w)]) {
                if (p.kind == kAdd) {
                    auto& ls = leaders_[static_cast<std::size_t>(w)];
                    auto it = ls.frags.find(static_cast<int>(p.at(0)));
                    if (it == ls.frags.end()) {
                        FragmentRecord fresh;
                        fresh.size = 0;
                        it = ls.frags.emplace(static_cast<int>(p.at(0)), fresh).first;
                    }
                    it->second.size += p.at(1);
                } else if (p.kind == kUpdate) {
                    int old_frag = static_cast<int>(p.at(0));
                    int new_id = static_cast<int>(p.at(1));
                    int new_leader = static_cast<int>(p.at(2));
                    long long edge = p.at(3);
                    for (const auto& [node, old_fl] : before) {
                        if (old_fl.first != old_frag) continue;
                        rep_frag_[static_cast<std::size_t>(w)][node] = {new_id, new_leader};
                        if (node != rt_.core_node(w))
                            down_items_[static_cast<std::size_t>(w)].push_back(
                                {node, Payload(kDown, {new_id, new_leader, edge})});
                        else
                            apply_node_update(node, new_id, new_leader, edge);
                    }
                }
            }
        }
    }

    void apply_node_update(NodeId v, int new_id, int new_leader, long long edge) {
        auto& st = nodes_[static_cast<std::size_t>(v)];
        st.frag = new_id;
        st.leader = new_leader;
        if (edge >= 0) {
            NodeId a = static_cast<NodeId>(edge / net_.n);
            NodeId b = static_cast<NodeId>(edge % net_.n);
            NodeId other = (v == a) ? b : (v == b) ? a : -1;
            if (other >= 0) st.marked[static_cast<std::size_t>(adj_slot(v, other))] = 1;
        }
    }

    void step6_down() {
        std::vector<std::vector<Payload>> items(static_cast<std::size_t>(net_.n));
        for (int w = 0; w < nc_; ++w)
            for (const auto& [node, p] : down_items_[static_cast<std::size_t>(w)])
                items[static_cast<std::size_t>(node)].push_back(p);
        auto res = rt_.wave_down(items);
        for (NodeId v = 0; v < net_.n; ++v)
            for (const auto& p : res.at_node[static_cast<std::size_t>(v)])
                if (p.kind == kDown && p.n_words == 3)
                    apply_node_update(v, static_cast<int>(p.at(0)), static_cast<int>(p.at(1)),
                                      p.at(2));
    }

    // Single spanning fragment left: announce completion, then one exchange so
    // both endpoints of every tree edge hold the mark.
    void finale() {
        rt_.engine().set_phase_tag("finale");
        std::vector<Payload> done(static_cast<std::size_t>(nc_), Payload(kDone, {}));
        core_broadcast(rt_, done);
        std::vector<std::vector<Payload>> items(static_cast<std::size_t>(net_.n));
        for (NodeId v = 0; v < net_.n; ++v)
            if (!net_.is_core(v)) items[static_cast<std::size_t>(v)].push_back(Payload(kDone, {}));
        rt_.wave_down(items);
        AnnounceProtocol mark([&](NodeId v, Mailer& out) {
            const auto& st = nodes_[static_cast<std::size_t>(v)];
            const auto& a = net_.adj[static_cast<std::size_t>(v)];
            for (std::size_t i = 0; i < a.size(); ++i)
                if (st.marked[i]) out.send(a[i], Payload(kMark, {}));
        });
        rt_.engine().run_round(mark);
        rt_.engine().drain_inbox([&](const Envelope& env) {
            nodes_[static_cast<std::size_t>(env.dst)]
                .marked[static_cast<std::size_t>(adj_slot(env.dst, env.src))] = 1;
        });
    }

    const PartitionedNetwork& net_;
    CpRuntime rt_;
    int nc_ = 0;
    long long round_limit_ = 0;
    int phase_ = 0;
    bool finished_ = false;
    MstStats stats_;

    std::vector<NodeState> nodes_;
    std::vector<LeaderState> leaders_;
    std::vector<std::map<NodeId, std::pair<int, int>>> rep_frag_;  // node -> (frag, leader)
    std::vector<std::vector<std::pair<NodeId, Payload>>> down_items_;
};

}  // namespace

MstResult run_cp_mst(const PartitionedNetwork& net, std::uint64_t seed, MstOptions opts) {
    CpMstRun run(net, seed, opts);
    return run.run();
}

}  // namespace cpnet
