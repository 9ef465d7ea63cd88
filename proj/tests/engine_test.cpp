#include "doctest.h"

#include <functional>
#include <sstream>

#include "cpnet/engine.hpp"
#include "cpnet/generators.hpp"

using namespace cpnet;

namespace {

PartitionedNetwork path(int n) {
    PartitionedNetwork net(n);
    net.set_core(0);
    for (NodeId v = 0; v + 1 < n; ++v) net.add_edge(v, v + 1);
    return net;
}

PartitionedNetwork clique(int n) {
    PartitionedNetwork net(n);
    for (NodeId u = 0; u < n; ++u) {
        net.set_core(u);
        for (NodeId v = u + 1; v < n; ++v) net.add_edge(u, v);
    }
    return net;
}

struct FnProtocol : Protocol {
    std::function<void(NodeId, std::span<const Envelope>, long long, Mailer&)> fn;
    std::function<bool()> done = [] { return false; };
    void step(NodeId v, std::span<const Envelope> inbox, long long round, Mailer& out) override {
        fn(v, inbox, round, out);
    }
    bool finished() const override { return done(); }
};

}  // namespace

TEST_CASE("single edge delivery") {
    auto net = path(2);
    Engine eng(net, 1000);
    bool got = false;
    FnProtocol p;
    p.fn = [&](NodeId v, std::span<const Envelope> inbox, long long round, Mailer& out) {
        if (round == 1 && v == 0) out.send(1, Payload(7, {42}));
        if (v == 1)
            for (const auto& env : inbox) {
                CHECK(env.src == 0);
                CHECK(env.payload.at(0) == 42);
                got = true;
            }
    };
    CHECK(eng.run_round(p) == 1);
    eng.run_round(p);
    CHECK(got);
}

TEST_CASE("clique all-to-all completes in one round") {
    auto net = clique(6);
    Engine eng(net);
    FnProtocol p;
    int received = 0;
    p.fn = [&](NodeId v, std::span<const Envelope> inbox, long long round, Mailer& out) {
        received += static_cast<int>(inbox.size());
        if (round == 1)
            for (NodeId w = 0; w < 6; ++w)
                if (w != v) out.send(w, Payload(1, {v, w}));
    };
    CHECK(eng.run_round(p) == 30);
    eng.run_round(p);
    CHECK(received == 30);
}

TEST_CASE("second message on one edge-direction is a capacity violation") {
    auto net = path(2);
    Engine eng(net);
    FnProtocol p;
    p.fn = [&](NodeId v, std::span<const Envelope>, long long, Mailer& out) {
        if (v == 0) {
            out.send(1, Payload(1, {1}));
            out.send(1, Payload(1, {2}));
        }
    };
    CHECK_THROWS_AS(eng.run_round(p), CapacityViolation);
}

TEST_CASE("non-adjacent send and payload overflow are rejected") {
    auto net = path(3);
    Engine eng(net, 100);
    FnProtocol skip;
    skip.fn = [&](NodeId v, std::span<const Envelope>, long long, Mailer& out) {
        if (v == 0) out.send(2, Payload(1, {}));
    };
    CHECK_THROWS_AS(eng.run_round(skip), NonAdjacentSend);

    Engine eng2(net, 100);
    FnProtocol big;
    big.fn = [&](NodeId v, std::span<const Envelope>, long long, Mailer& out) {
        if (v == 0) out.send(1, Payload(1, {101}));
    };
    CHECK_THROWS_AS(eng2.run_round(big), PayloadOverflow);
}

TEST_CASE("token flood on a path terminates in exactly D rounds") {
    const int n = 9;  // D = 8 edges
    auto net = path(n);
    Engine eng(net);
    std::vector<char> has(static_cast<std::size_t>(n), 0);
    std::vector<char> sent(static_cast<std::size_t>(n), 0);
    has[0] = 1;
    FnProtocol p;
    p.fn = [&](NodeId v, std::span<const Envelope> inbox, long long, Mailer& out) {
        if (!inbox.empty()) has[static_cast<std::size_t>(v)] = 1;
        if (has[static_cast<std::size_t>(v)] && !sent[static_cast<std::size_t>(v)]) {
            for (NodeId w : net.adj[static_cast<std::size_t>(v)]) out.send(w, Payload(9, {}));
            sent[static_cast<std::size_t>(v)] = 1;
        }
    };
    // The token is at the far end once it sits in that node's inbox.
    p.done = [&] { return has[static_cast<std::size_t>(n - 1)] != 0 ||
                          !eng.pending_inbox(n - 1).empty(); };
    eng.run_until(p, 100);
    CHECK(eng.rounds() == n - 1);
}

TEST_CASE("round limit raises RoundLimitExceeded") {
    auto net = path(2);
    Engine eng(net);
    FnProtocol p;
    p.fn = [](NodeId, std::span<const Envelope>, long long, Mailer&) {};
    CHECK_THROWS_AS(eng.run_until(p, 10), RoundLimitExceeded);
    CHECK(eng.rounds() == 10);
}

TEST_CASE("identical seeds give identical traces, different seeds do not") {
    auto net = gen_cp(16, 3);
    auto run = [&](std::uint64_t seed) {
        Engine eng(net);
        std::vector<Rng> rngs;
        for (NodeId v = 0; v < net.n; ++v) rngs.push_back(Rng::for_node(seed, v));
        FnProtocol p;
        p.fn = [&](NodeId v, std::span<const Envelope>, long long, Mailer& out) {
            for (NodeId w : net.adj[static_cast<std::size_t>(v)])
                if (rngs[static_cast<std::size_t>(v)].below(3) == 0) out.send(w, Payload(2, {v}));
        };
        for (int r = 0; r < 12; ++r) eng.run_round(p);
        std::ostringstream os;
        eng.write_trace_csv(os);
        return os.str();
    };
    auto a = run(41), b = run(41), c = run(42);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("messages received in round r+1 equal messages sent in round r") {
    auto net = gen_cp(25, 1);
    Engine eng(net);
    std::vector<long long> sent_per_round, recv_per_round;
    long long recv_now = 0;
    Rng rng(7);
    FnProtocol p;
    p.fn = [&](NodeId v, std::span<const Envelope> inbox, long long, Mailer& out) {
        recv_now += static_cast<long long>(inbox.size());
        for (NodeId w : net.adj[static_cast<std::size_t>(v)])
            if (rng.below(2) == 0) out.send(w, Payload(3, {}));
    };
    for (int r = 0; r < 10; ++r) {
        recv_now = 0;
        sent_per_round.push_back(eng.run_round(p));
        recv_per_round.push_back(recv_now);
    }
    for (std::size_t r = 1; r < 10; ++r) CHECK(recv_per_round[r] == sent_per_round[r - 1]);
}

TEST_CASE("trace export format") {
    auto net = path(2);
    Engine eng(net);
    eng.set_phase_tag("demo");
    FnProtocol p;
    p.fn = [](NodeId v, std::span<const Envelope>, long long round, Mailer& out) {
        if (v == 0 && round == 1) out.send(1, Payload(1, {}));
    };
    eng.run_round(p);
    std::ostringstream os;
    eng.write_trace_csv(os);
    CHECK(os.str() == "round,sent,max_edge_load,phase_tag\n1,1,1,demo\n");
}
