#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tollsim/network.hpp"
#include "tollsim/population.hpp"

namespace tollsim {

// Nonnegative per-edge prices, indexed by edge id.
class TollVector {
public:
    TollVector() = default;
    explicit TollVector(std::vector<double> values);
    static TollVector zeros(int edge_count) {
        return TollVector(std::vector<double>(edge_count, 0.0));
    }

    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int e) const { return values_[e]; }
    const std::vector<double>& values() const { return values_; }
    std::span<const double> span() const { return values_; }

private:
    std::vector<double> values_;
};

struct UserOutcome {
    bool traveled = false;
    Path path;         // valid when traveled
    double cost = 0.0; // dollars actually incurred
};

struct AssignmentRecord {
    std::int64_t period = 0;
    std::vector<UserOutcome> choices;
    std::vector<int> edge_flows;      // x_e = users whose path contains e
    double system_cost = 0.0;         // sum of v * l_P for travelers plus outside costs
    double total_travel_time = 0.0;   // hours, travelers only
    double toll_revenue = 0.0;
    double min_cost_total = 0.0;      // sum over users of min(best path cost, outside cost)
    int outside_count = 0;
};

// Cheapest path or outside option for one user (Definition-level
// behavior): argmin over {v l_P + tau_P} and the outside cost, ties
// between the best path and the outside option resolve to the path.
UserOutcome best_response(const Network& net, const UserDraw& draw, const TollVector& tolls);

// Preferred choice taken whenever its cost ties the user's best response
// (used to align the atomic equilibrium with an integral LP optimum).
struct TiePreference {
    bool outside = false;
    std::optional<Path> path;
};

// Independent best responses for every user, capacity-blind, with the
// induced aggregate flows. Users sharing (O-D, VoT) share one
// shortest-path computation.
AssignmentRecord compute_equilibrium(const Network& net, std::span<const UserDraw> draws,
                                     const TollVector& tolls,
                                     std::span<const TiePreference> tie_preference = {},
                                     double tie_eps = 1e-9);

} // namespace tollsim
