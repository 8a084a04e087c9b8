#pragma once

#include <string>
#include <vector>

#include "tollsim/lp_oracle.hpp"
#include "tollsim/scenario.hpp"

namespace tollsim {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Random instance within the exact-oracle envelope: at most 4 nodes,
// 6 edges, 4 users, every user's O-D pair reachable.
struct SmallInstance {
    Network net;
    std::vector<LpUser> users;
    std::vector<double> capacities;

    LpInstance lp() const { return LpInstance{&net, users, capacities}; }
};

SmallInstance make_small_instance(std::uint64_t seed);

// Individual checks, also run standalone by the acceptance suite.
CheckResult check_market_clearing_suite(int instances);
CheckResult check_toll_boundedness(bool fast);
CheckResult check_projection_mutation(bool fast);
CheckResult check_step_sign_mutation(bool fast);
CheckResult check_vcg_suite(int instances);
CheckResult check_solver_cross(int instances);
CheckResult check_accounting_identity(int instances);

// The invariant suite behind `tollsim verify`: market clearing and strong
// duality on random instances, toll boundedness with its mutation check,
// the telescoping violation bound, the step-sign mutation check, VCG
// parallel/counterexample checks, and the solver cross-check. `fast`
// shrinks the instance counts.
std::vector<CheckResult> run_verification(bool fast);

std::string render_checks(const std::vector<CheckResult>& checks);
bool all_pass(const std::vector<CheckResult>& checks);

// Shared helpers for the acceptance suite.
double max_outside_cost(const PopulationModel& population);

// Checks 0 <= tau_e <= max-outside + max-capacity + users on every period
// of the trace; returns the first offending period or -1.
std::int64_t find_toll_bound_violation(const RunTrace& trace, double bound);

// Componentwise telescoping bound sum_t (x^t - c) <= tau^(T+1) / gamma.
bool telescoping_holds(const RunTrace& trace, double gamma, double tol = 1e-6);

} // namespace tollsim
