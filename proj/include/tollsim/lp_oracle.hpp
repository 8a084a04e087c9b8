#pragma once

#include <span>
#include <vector>

#include "tollsim/equilibrium.hpp"
#include "tollsim/network.hpp"

namespace tollsim {

struct LpUser {
    int origin = -1;
    int destination = -1;
    double value_of_time = 0.0;
    double outside_cost = 0.0;
};

struct LpInstance {
    const Network* net = nullptr;
    std::vector<LpUser> users;
    std::vector<double> capacities;
};

enum class LpStatus { Optimal, IterationLimit };

struct LpUserSolution {
    std::vector<std::pair<Path, double>> path_flows; // fractions in [0, 1]
    double outside_flow = 0.0;
    double dual = 0.0; // mu_u
};

struct LpSolution {
    LpStatus status = LpStatus::Optimal;
    double objective = 0.0;              // U*
    std::vector<double> tolls;           // tau*, per edge, >= 0
    std::vector<LpUserSolution> users;   // one entry per instance user
    std::vector<double> edge_flows;      // aggregate fractional x_e
    double routed_travel_time = 0.0;     // sum of l_P * flow over all users
    int pivots = 0;
    int pricing_rounds = 0;

    bool integral(double tol = 1e-7) const;
};

struct LpOptions {
    int max_pivots = 0;        // 0: scale with instance size
    int max_pricing_rounds = 200;
    double reduced_cost_tol = 1e-9;
};

// Optimal fractional assignment by column generation: restricted master
// over generated path columns (identical users merged into weighted
// groups), priced by shortest paths under edge cost v l_e + tau_e.
// Initial columns are each user's outside option.
LpSolution solve_lp(const LpInstance& inst, const LpOptions& opts = {});

// Toll-only dual value: sum over users of min(cheapest tolled path cost,
// outside cost) minus tau . c.
double dual_objective(const Network& net, std::span<const LpUser> users,
                      std::span<const double> tolls, std::span<const double> capacities);

// Projected subgradient ascent on the toll-only dual over the instance's
// user sample, step0 / sqrt(k) schedule; returns the iterate (or running
// average) with the best dual value. Cross-check for solve_lp duals.
TollVector subgradient_solve(const LpInstance& inst, int iterations, double step0);

struct MarketClearingReport {
    std::vector<double> edge_residuals; // tau_e * (c_e - x_e)
    std::vector<double> user_residuals; // |mu_u - min(path costs, outside)|
    double max_edge_residual = 0.0;
    double max_user_residual = 0.0;

    bool clears(double tol = 1e-6) const {
        return max_edge_residual <= tol && max_user_residual <= tol;
    }
};

MarketClearingReport check_market_clearing(const LpInstance& inst, const LpSolution& sol);

} // namespace tollsim
