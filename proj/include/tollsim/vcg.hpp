#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tollsim/equilibrium.hpp"
#include "tollsim/network.hpp"

namespace tollsim {

// Parallel network with no outside option: edges ordered by latency,
// users ordered by decreasing value of time, integral capacities.
struct ParallelInstance {
    std::vector<double> latencies;  // l_1 <= ... <= l_E
    std::vector<int> capacities;    // positive integers
    std::vector<double> vots;       // v_1 >= ... >= v_U

    int user_count() const { return static_cast<int>(vots.size()); }
    int edge_count() const { return static_cast<int>(latencies.size()); }
    void validate() const;

    // Edge carrying user u (0-based) under the greedy system optimum.
    int edge_of_user(int u) const;
};

Network make_parallel_network(const ParallelInstance& inst);

// Externality payments under the greedy system optimum: all users on one
// edge pay the same, users on the last used edge pay zero.
std::vector<double> vcg_payments_parallel(const ParallelInstance& inst);

struct VcgUser {
    int origin = -1;
    int destination = -1;
    double value_of_time = 0.0;
};

// Externality of user u on the others' value-weighted travel times,
// computed from exact system optima with and without u (no outside
// option). Small instances only.
double vcg_payment_general(const Network& net, std::span<const VcgUser> users,
                           std::span<const double> capacities, int user);

struct VcgEquilibriumReport {
    bool is_equilibrium = true;
    int deviating_user = -1;
    Path deviation;
    double gain = 0.0; // strict cost decrease of the deviation
    std::vector<std::optional<Path>> assignment;
};

// Places users at the system optimum and searches each user's full path
// set for a strictly cheaper alternative under the supplied tolls.
VcgEquilibriumReport check_vcg_equilibrium(const Network& net, std::span<const VcgUser> users,
                                           std::span<const double> capacities,
                                           const TollVector& tolls);

// The single O-D fixture on which VCG-derived edge tolls fail to induce
// the system optimum: three paths P1 = e1,e2,e3 / P2 = e4,e5,e3 /
// P3 = e1,e6,e7 with path latencies 1 < 2 < 3, unit capacities on e1 and
// e3, and two users with values of time 10 and 1.
struct CounterexampleFixture {
    Network network;
    std::vector<VcgUser> users; // users[0] high VoT, users[1] low VoT
    std::vector<double> capacities;
    TollVector vcg_tolls; // per-path VCG payments charged on e1 / e3
    Path p1, p2, p3;
};

CounterexampleFixture make_counterexample();

} // namespace tollsim
