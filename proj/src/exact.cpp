#include "tollsim/exact.hpp"

#include <limits>
#include <stdexcept>

namespace tollsim {

namespace {

struct Searcher {
    const Network& net;
    std::span<const ExactUser> users;
    std::span<const double> capacities;
    std::vector<std::vector<std::optional<Path>>> options; // per user, nullopt = outside
    std::vector<double> option_cost;                       // flattened alongside recursion
    std::vector<int> usage;
    std::vector<std::optional<Path>> current;
    ExactAssignment best;

    void recurse(std::size_t u, double cost_so_far) {
        if (best.feasible && cost_so_far >= best.cost - 1e-12) return;
        if (u == users.size()) {
            best.feasible = true;
            best.cost = cost_so_far;
            best.choices = current;
            return;
        }
        for (const auto& option : options[u]) {
            double cost;
            bool fits = true;
            if (option) {
                for (int e : option->edges)
                    if (usage[e] + 1 > capacities[e] + 1e-9) {
                        fits = false;
                        break;
                    }
                if (!fits) continue;
                cost = users[u].value_of_time * option->total_latency(net);
                for (int e : option->edges) ++usage[e];
            } else {
                cost = users[u].outside_cost;
            }
            current[u] = option;
            recurse(u + 1, cost_so_far + cost);
            if (option)
                for (int e : option->edges) --usage[e];
        }
        current[u] = std::nullopt;
    }
};

} // namespace

ExactAssignment brute_force_system_optimum(const Network& net, std::span<const ExactUser> users,
                                           std::span<const double> capacities) {
    if (static_cast<int>(capacities.size()) != net.edge_count())
        throw std::invalid_argument("capacity vector size mismatch");
    if (users.size() > 6)
        throw std::invalid_argument("brute force capped at 6 users");

    Searcher s{net, users, capacities, {}, {}, {}, {}, {}};
    s.usage.assign(net.edge_count(), 0);
    s.current.resize(users.size());
    s.options.resize(users.size());

    double combinations = 1.0;
    for (std::size_t u = 0; u < users.size(); ++u) {
        const ExactUser& user = users[u];
        if (user.origin != user.destination) {
            const PathSet set = enumerate_paths(net, user.origin, user.destination, 4096);
            if (!set.exhaustive)
                throw std::invalid_argument("path set too large for exact enumeration");
            for (const Path& p : set.paths) s.options[u].emplace_back(p);
        }
        if (user.has_outside) s.options[u].emplace_back(std::nullopt);
        if (s.options[u].empty()) {
            // No path and no outside option: infeasible instance.
            return ExactAssignment{};
        }
        combinations *= static_cast<double>(s.options[u].size());
    }
    if (combinations > 5e7) throw std::invalid_argument("exact enumeration too large");

    s.recurse(0, 0.0);
    return s.best;
}

} // namespace tollsim
