#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tollsim/lp_oracle.hpp"
#include "tollsim/metrics.hpp"
#include "tollsim/population.hpp"
#include "tollsim/toller.hpp"

namespace tollsim {

enum class ScenarioKind { SiouxFalls, LowerBound, ParallelSynth, Counterexample };

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::LowerBound;
    std::string network_file; // TNTP paths, SiouxFalls only
    std::string trips_file;

    std::int64_t horizon = 100;
    int seed_count = 1;
    std::uint64_t base_seed = 1;
    std::vector<PolicyKind> policies = {PolicyKind::OnlineGradient};

    double gamma = 0.0; // 0: use recommended_step(T)
    double delta = 0.1;
    double noise_halfwidth = 5e-4;

    double demand_scale = 0.5;
    double demand_divisor = 1.0;   // file demand units per simulated user
    double capacity_divisor = 1.0; // file capacity units per simulated slot
    double vot_spread = 0.2;
    double od_resample_prob = 0.0;
    double outside_factor = 1.5;
    double min_vot = 5.0;
    double max_vot = 100.0;
    int oracle_stride = 1; // solve the offline LP every k-th period

    int parallel_edges = 4; // ParallelSynth only
    int parallel_users = 12;

    std::string toll_log = "sparse"; // sparse | final | none

    double effective_gamma(std::int64_t T) const;
};

// "key = value" lines, '#' comments. Unknown keys are errors.
ScenarioConfig parse_scenario_config(const std::string& text);

// Reads a config file; relative data paths resolve against the config's
// directory, then against $TOLLSIM_DATA_DIR.
ScenarioConfig load_scenario_config(const std::string& path);

const char* to_string(ScenarioKind kind);
const char* to_string(PolicyKind policy);

// A fully built experiment: network, calibrated population, working
// capacities, static benchmark tolls, and the feasible-minimum travel
// time used for normalization.
struct Scenario {
    ScenarioConfig config;
    Network net;
    std::vector<double> capacities;
    PopulationModel population{{}, {}, 0};
    TollVector static_population_tolls;
    TollVector static_group_tolls;
    double min_travel_time = 0.0;
    std::vector<std::string> notes;
};

Scenario build_scenario(const ScenarioConfig& cfg);

// The individual builders behind build_scenario.
Scenario build_sioux_falls(const ScenarioConfig& cfg, const TntpData& data);
Scenario build_lower_bound(const ScenarioConfig& cfg);
Scenario build_parallel_synth(const ScenarioConfig& cfg);
Scenario build_counterexample_scenario(const ScenarioConfig& cfg);

// One online run: per period, sample users, compute the equilibrium under
// the current tolls, update the policy from (c, x^t), and solve the
// complete-information LP for U_t*. Deterministic given (scenario, seed).
RunTrace run_experiment(const Scenario& scenario, PolicyKind policy, std::uint64_t seed,
                        std::int64_t horizon = 0);

// Same loop for several policies in one pass; user draws and oracle
// solves are shared since both depend only on (seed, period).
std::vector<RunTrace> run_policies(const Scenario& scenario, std::span<const PolicyKind> policies,
                                   std::uint64_t seed, std::int64_t horizon = 0);

// Monte-Carlo estimate of the one-edge lower-bound regret gap
// 2 E[(S_1 - T)_+], where S_1 counts type-I arrivals over the horizon.
double lower_bound_regret_gap(std::int64_t horizon, int samples, std::uint64_t base_seed);

} // namespace tollsim
