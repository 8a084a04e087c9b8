#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tollsim/network.hpp"

namespace tollsim {

struct ExactUser {
    int origin = -1;
    int destination = -1;
    double value_of_time = 0.0;
    double outside_cost = 0.0;
    bool has_outside = true;
};

struct ExactAssignment {
    bool feasible = false;
    double cost = 0.0;
    std::vector<std::optional<Path>> choices; // nullopt = outside option
};

// Exhaustive minimum-cost integral assignment: every user is placed on a
// simple path (or the outside option), edge capacities respected.
// Intended for instances of a handful of users on small graphs.
ExactAssignment brute_force_system_optimum(const Network& net, std::span<const ExactUser> users,
                                           std::span<const double> capacities);

} // namespace tollsim
