#pragma once

#include <cstdint>
#include <vector>

#include "tollsim/equilibrium.hpp"

namespace tollsim {

// Per-period record of one simulated run.
struct RunTrace {
    std::int64_t horizon = 0;
    std::vector<double> capacities;

    std::vector<double> system_cost;    // U_t
    std::vector<double> oracle_cost;    // U_t*
    std::vector<char> oracle_ok;        // oracle solve reached optimality
    std::vector<std::vector<int>> flows; // x^t per period
    std::vector<std::vector<double>> tolls;
    std::vector<double> travel_time;
    std::vector<double> toll_revenue;
    std::vector<int> outside_users;
    std::vector<double> final_tolls;    // tau^(T+1), after the last update

    bool complete() const;
};

struct ViolationReport {
    std::vector<double> vector_part; // ((sum_t (x^t - c))_+ per edge
    double l2 = 0.0;
    double linf = 0.0;
    int argmax_edge = -1; // -1 when violation-free
};

struct MetricReport {
    double regret = 0.0;
    ViolationReport violation;
    double normalized_regret = 0.0;
    double normalized_violation = 0.0;
    double normalized_travel_time = 0.0;
    double mean_travel_time = 0.0;
};

// Sum over periods of U_t - U_t*; negative when capacity violations let
// users take cheaper paths than any feasible assignment.
double regret(const RunTrace& trace);

// Positive part of the cumulative edge-flow excess, with both norms.
ViolationReport violation(const RunTrace& trace);

// Fig.-3 style ratios. min_travel_time is the capacity-feasible minimum
// total travel time of the underlying instance (hours per period).
MetricReport normalized_metrics(const RunTrace& trace, double min_travel_time);

struct SlopeFit {
    double slope = 0.0;
    double rmse = 0.0; // residual RMSE in log-log space
};

// Least-squares line through (log T, log value); values must be positive.
SlopeFit loglog_slope(const std::vector<std::pair<double, double>>& points);

} // namespace tollsim
