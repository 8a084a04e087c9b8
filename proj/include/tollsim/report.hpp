#pragma once

#include <string>
#include <vector>

#include "tollsim/metrics.hpp"
#include "tollsim/scenario.hpp"

namespace tollsim {

// Formats dollars with 6 decimal places (the CSV money convention).
std::string fmt_money(double value);

struct RunResult {
    PolicyKind policy;
    std::uint64_t seed = 0;
    RunTrace trace;
    MetricReport metrics;
};

// Executes every (policy, seed) pair of the scenario's config, fanning
// seeds across worker threads. Results are ordered by (policy, seed).
std::vector<RunResult> execute_runs(const Scenario& scenario, std::int64_t horizon = 0);

// Writes the per-run output bundle under dir/<policy>/seed_<s>/:
//   trace.csv   period,system_cost,oracle_cost,oracle_ok,travel_time,
//               toll_revenue,outside_users,toll_sum,toll_max,max_excess
//   tolls.csv   period,edge,toll (nonzero entries; per toll_log config)
//   final_tolls.csv  edge,toll
// plus metrics.csv, summary.csv (mean and stderr across seeds) and
// metadata.txt at the top level.
void write_output_bundle(const std::string& dir, const Scenario& scenario,
                         const std::vector<RunResult>& results);

// Human-readable metric table, one row per policy.
std::string summarize(const Scenario& scenario, const std::vector<RunResult>& results);

struct SweepRow {
    PolicyKind policy;
    std::int64_t horizon = 0;
    double mean_violation_linf = 0.0;
    double mean_abs_regret = 0.0;
    double mean_regret = 0.0;
};

struct SweepOutcome {
    std::vector<SweepRow> rows;
    // Fits per policy over the horizon grid: L-infinity violation always,
    // |regret| only when every mean regret magnitude is positive.
    struct Fit {
        PolicyKind policy;
        std::string metric;
        SlopeFit fit;
    };
    std::vector<Fit> fits;
};

SweepOutcome run_sweep(const Scenario& scenario, const std::vector<std::int64_t>& horizons);

void write_sweep_outputs(const std::string& dir, const Scenario& scenario,
                         const SweepOutcome& outcome);

std::string summarize_sweep(const SweepOutcome& outcome);

} // namespace tollsim
