#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpnet/network.hpp"

namespace cpnet {

struct AxiomParams {
    double alpha = 2.0;
    int beta = 2;
    int gamma = 2;
};

struct BalancedReport {
    bool pass = false;
    double worst_ratio = 0.0;
    NodeId witness = -1;
};

struct TimedHop {
    int round = 0;  // 1-based
    NodeId from = -1;
    NodeId to = -1;
};

// A feasible <P,C>-convergecast: per node, a timed path ending at a core node.
// Core nodes have empty routes. Produced by max-flow on the time-expanded graph.
struct ConvergecastSchedule {
    int gamma = 0;
    std::vector<std::vector<TimedHop>> route;  // indexed by NodeId

    // True when no directed edge appears twice across the whole schedule, which
    // is what makes wave pipelining at period 1 collision-free.
    bool edge_disjoint() const;
};

enum class EmulationVerdict { Pass, Fail, Unknown };

struct EmulationReport {
    EmulationVerdict verdict = EmulationVerdict::Unknown;
    int achieved_beta = 0;   // valid on Pass
    NodeId witness = -1;     // degree/connectivity certificate on Fail
    int heuristic_rounds = 0;  // greedy scheduler rounds on Unknown
    std::string reason;
    // Pass certificate: per ordered core pair, the timed hops of its message.
    std::vector<std::pair<NodeId, NodeId>> pairs;
    std::vector<std::vector<TimedHop>> schedule;
};

struct AxiomReport {
    AxiomParams params;
    BalancedReport balanced;
    EmulationReport emulation;
    bool convergecast_pass = false;
    std::optional<ConvergecastSchedule> schedule;

    bool all_pass() const {
        return balanced.pass && emulation.verdict == EmulationVerdict::Pass && convergecast_pass;
    }
    // Names of failed axioms among {"A_B","A_E","A_C"}; Unknown counts as not passed.
    std::vector<std::string> failed() const;
};

BalancedReport check_balanced(const PartitionedNetwork& net, double alpha);

// Exact decision by max-flow over gamma+1 layers; nullopt when infeasible.
std::optional<ConvergecastSchedule> check_convergecast(const PartitionedNetwork& net, int gamma);

EmulationReport check_emulation(const PartitionedNetwork& net, int beta);

AxiomReport check_all(const PartitionedNetwork& net, AxiomParams params = {});

}  // namespace cpnet
