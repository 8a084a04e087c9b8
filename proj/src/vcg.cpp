#include "tollsim/vcg.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "tollsim/exact.hpp"

namespace tollsim {

void ParallelInstance::validate() const {
    if (latencies.size() != capacities.size())
        throw std::invalid_argument("latency/capacity size mismatch");
    if (!std::is_sorted(latencies.begin(), latencies.end()))
        throw std::invalid_argument("edges must be ordered by latency");
    if (!std::is_sorted(vots.rbegin(), vots.rend()))
        throw std::invalid_argument("users must be ordered by decreasing value of time");
    for (int c : capacities)
        if (c < 1) throw std::invalid_argument("capacities must be positive integers");
    const long total = std::accumulate(capacities.begin(), capacities.end(), 0L);
    if (total < user_count())
        throw std::invalid_argument("total capacity below user count");
}

int ParallelInstance::edge_of_user(int u) const {
    int cumulative = 0;
    for (int e = 0; e < edge_count(); ++e) {
        cumulative += capacities[e];
        if (u < cumulative) return e;
    }
    throw std::logic_error("user beyond total capacity");
}

Network make_parallel_network(const ParallelInstance& inst) {
    Network net(2);
    for (int e = 0; e < inst.edge_count(); ++e)
        net.add_edge(0, 1, inst.latencies[e], inst.capacities[e]);
    return net;
}

std::vector<double> vcg_payments_parallel(const ParallelInstance& inst) {
    inst.validate();
    const int users = inst.user_count();
    if (users == 0) return {};
    const int last_edge = inst.edge_of_user(users - 1);

    // Prefix capacities give the index of the first user on each edge.
    std::vector<int> first_user(inst.edge_count(), 0);
    int cumulative = 0;
    for (int e = 0; e + 1 < inst.edge_count(); ++e) {
        cumulative += inst.capacities[e];
        first_user[e + 1] = cumulative;
    }

    // Payment telescopes over the edges between the user's own edge and
    // the last used one; the marginal user of each step prices it.
    std::vector<double> edge_payment(inst.edge_count(), 0.0);
    for (int e = last_edge - 1; e >= 0; --e) {
        const double marginal_vot = inst.vots[first_user[e + 1]];
        edge_payment[e] =
            edge_payment[e + 1] + marginal_vot * (inst.latencies[e + 1] - inst.latencies[e]);
    }

    std::vector<double> payments(users);
    for (int u = 0; u < users; ++u) payments[u] = edge_payment[inst.edge_of_user(u)];
    return payments;
}

namespace {

// Exact system optimum on parallel graphs by the rearrangement argument:
// users in decreasing value-of-time order fill the edges in latency
// order.
ExactAssignment parallel_optimum(const Network& net, std::span<const VcgUser> users,
                                 std::span<const double> capacities) {
    std::vector<int> edge_order(net.edge_count());
    for (int e = 0; e < net.edge_count(); ++e) edge_order[e] = e;
    std::stable_sort(edge_order.begin(), edge_order.end(), [&](int a, int b) {
        return net.edge(a).latency < net.edge(b).latency;
    });
    std::vector<int> user_order(users.size());
    for (std::size_t u = 0; u < users.size(); ++u) user_order[u] = static_cast<int>(u);
    std::stable_sort(user_order.begin(), user_order.end(), [&](int a, int b) {
        return users[a].value_of_time > users[b].value_of_time;
    });

    ExactAssignment out;
    out.choices.resize(users.size());
    std::size_t slot = 0;
    double remaining = edge_order.empty() ? 0.0 : capacities[edge_order[0]];
    for (int u : user_order) {
        while (remaining < 1.0 - 1e-9) {
            ++slot;
            if (slot >= edge_order.size())
                throw std::invalid_argument("instance cannot route all users");
            remaining = capacities[edge_order[slot]];
        }
        const int eid = edge_order[slot];
        remaining -= 1.0;
        out.choices[u] = Path{net.edge(eid).tail, net.edge(eid).head, {eid}};
        out.cost += users[u].value_of_time * net.edge(eid).latency;
    }
    out.feasible = true;
    return out;
}

ExactAssignment routed_optimum(const Network& net, std::span<const VcgUser> users,
                               std::span<const double> capacities) {
    if (net.is_parallel() && !users.empty())
        return parallel_optimum(net, users, capacities);
    std::vector<ExactUser> exact(users.size());
    for (std::size_t u = 0; u < users.size(); ++u) {
        exact[u].origin = users[u].origin;
        exact[u].destination = users[u].destination;
        exact[u].value_of_time = users[u].value_of_time;
        exact[u].has_outside = false;
    }
    ExactAssignment opt = brute_force_system_optimum(net, exact, capacities);
    if (!opt.feasible) throw std::invalid_argument("instance cannot route all users");
    return opt;
}

} // namespace

double vcg_payment_general(const Network& net, std::span<const VcgUser> users,
                           std::span<const double> capacities, int user) {
    if (user < 0 || user >= static_cast<int>(users.size()))
        throw std::invalid_argument("user index out of range");
    const ExactAssignment with_user = routed_optimum(net, users, capacities);

    std::vector<VcgUser> rest;
    rest.reserve(users.size() - 1);
    for (int u = 0; u < static_cast<int>(users.size()); ++u)
        if (u != user) rest.push_back(users[u]);
    const ExactAssignment without_user = routed_optimum(net, rest, capacities);

    // Others' weighted travel time with u present, minus their optimum
    // when u is absent.
    double with_cost = 0.0;
    for (int u = 0; u < static_cast<int>(users.size()); ++u) {
        if (u == user) continue;
        with_cost += users[u].value_of_time * with_user.choices[u]->total_latency(net);
    }
    return with_cost - without_user.cost;
}

VcgEquilibriumReport check_vcg_equilibrium(const Network& net, std::span<const VcgUser> users,
                                           std::span<const double> capacities,
                                           const TollVector& tolls) {
    const ExactAssignment opt = routed_optimum(net, users, capacities);

    VcgEquilibriumReport report;
    report.assignment = opt.choices;
    std::vector<double> latencies = net.latencies();
    std::vector<double> toll_values(tolls.values());

    for (int u = 0; u < static_cast<int>(users.size()); ++u) {
        const Path& assigned = *opt.choices[u];
        const double assigned_cost = users[u].value_of_time * assigned.total_latency(net) +
                                     assigned.total_over(toll_values);
        const PathSet all = enumerate_paths(net, users[u].origin, users[u].destination, 4096);
        if (!all.exhaustive) throw std::invalid_argument("path set too large");
        for (const Path& p : all.paths) {
            const double cost =
                users[u].value_of_time * p.total_latency(net) + p.total_over(toll_values);
            if (cost < assigned_cost - 1e-9) {
                report.is_equilibrium = false;
                report.deviating_user = u;
                report.deviation = p;
                report.gain = assigned_cost - cost;
                return report;
            }
        }
    }
    return report;
}

CounterexampleFixture make_counterexample() {
    CounterexampleFixture fx;
    fx.network = Network(6);
    // e1: 0->1, e2: 1->2, e3: 2->5, e4: 0->3, e5: 3->2, e6: 1->4, e7: 4->5
    const int e1 = fx.network.add_edge(0, 1, 0.4, 1.0);
    const int e2 = fx.network.add_edge(1, 2, 0.3, 3.0);
    const int e3 = fx.network.add_edge(2, 5, 0.3, 1.0);
    const int e4 = fx.network.add_edge(0, 3, 0.85, 3.0);
    const int e5 = fx.network.add_edge(3, 2, 0.85, 3.0);
    const int e6 = fx.network.add_edge(1, 4, 1.3, 3.0);
    const int e7 = fx.network.add_edge(4, 5, 1.3, 3.0);

    fx.p1 = Path{0, 5, {e1, e2, e3}}; // latency 1
    fx.p2 = Path{0, 5, {e4, e5, e3}}; // latency 2
    fx.p3 = Path{0, 5, {e1, e6, e7}}; // latency 3

    fx.users = {VcgUser{0, 5, 10.0}, VcgUser{0, 5, 1.0}};
    fx.capacities = fx.network.capacities();

    const double l1 = fx.p1.total_latency(fx.network);
    const double l2 = fx.p2.total_latency(fx.network);
    const double l3 = fx.p3.total_latency(fx.network);
    // At the optimum the high-VoT user rides P2 (only tolled edge e3) and
    // the low-VoT user rides P3 (only tolled edge e1), so charging each
    // user's VCG payment on that edge decomposes the payments exactly.
    std::vector<double> tolls(fx.network.edge_count(), 0.0);
    tolls[e1] = fx.users[0].value_of_time * (l2 - l1); // low user's payment
    tolls[e3] = fx.users[1].value_of_time * (l3 - l1); // high user's payment
    fx.vcg_tolls = TollVector(std::move(tolls));
    return fx;
}

} // namespace tollsim
