#include "tollsim/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tollsim/exact.hpp"
#include "tollsim/vcg.hpp"

namespace tollsim {

SmallInstance make_small_instance(std::uint64_t seed) {
    // Rejection-sample until every user has a reachable O-D pair.
    for (std::uint64_t attempt = 0;; ++attempt) {
        const CounterRng rng(seed * 7919 + attempt);
        const int nodes = 2 + static_cast<int>(rng.below(3, CounterRng::kInstanceGen, 1));
        const int edges = 1 + static_cast<int>(rng.below(6, CounterRng::kInstanceGen, 2));
        Network net(nodes);
        for (int e = 0; e < edges; ++e) {
            const int tail = static_cast<int>(rng.below(nodes, CounterRng::kInstanceGen, 10, e));
            int head = static_cast<int>(rng.below(nodes, CounterRng::kInstanceGen, 11, e));
            if (head == tail) head = (head + 1) % nodes;
            const double latency = rng.uniform(0.1, 2.0, CounterRng::kInstanceGen, 12, e);
            const double capacity =
                1.0 + static_cast<double>(rng.below(3, CounterRng::kInstanceGen, 13, e));
            net.add_edge(tail, head, latency, capacity);
        }

        std::vector<std::pair<int, int>> reachable;
        const std::vector<double> latencies = net.latencies();
        for (int o = 0; o < nodes; ++o)
            for (int d = 0; d < nodes; ++d)
                if (o != d && shortest_path(net, o, d, latencies)) reachable.emplace_back(o, d);
        if (reachable.empty()) continue;

        const int users = 1 + static_cast<int>(rng.below(4, CounterRng::kInstanceGen, 3));
        SmallInstance inst;
        inst.net = std::move(net);
        inst.capacities = inst.net.capacities();
        for (int u = 0; u < users; ++u) {
            const auto od =
                reachable[rng.below(reachable.size(), CounterRng::kInstanceGen, 20, u)];
            LpUser user;
            user.origin = od.first;
            user.destination = od.second;
            user.value_of_time = rng.uniform(0.5, 5.0, CounterRng::kInstanceGen, 21, u);
            user.outside_cost = rng.uniform(0.5, 8.0, CounterRng::kInstanceGen, 22, u);
            inst.users.push_back(user);
        }
        return inst;
    }
}

double max_outside_cost(const PopulationModel& population) {
    double best = 0.0;
    if (population.kind() == PopulationModel::Kind::PeriodTypeMixture) best = 2.0;
    for (const UserGroup& g : population.groups()) best = std::max(best, g.outside_cost);
    return best;
}

std::int64_t find_toll_bound_violation(const RunTrace& trace, double bound) {
    for (std::int64_t t = 0; t < trace.horizon; ++t)
        for (double tau : trace.tolls[t])
            if (tau < 0.0 || tau > bound) return t + 1;
    for (double tau : trace.final_tolls)
        if (tau < 0.0 || tau > bound) return trace.horizon + 1;
    return -1;
}

bool telescoping_holds(const RunTrace& trace, double gamma, double tol) {
    const int n_edges = static_cast<int>(trace.capacities.size());
    for (int e = 0; e < n_edges; ++e) {
        double cumulative = 0.0;
        for (std::int64_t t = 0; t < trace.horizon; ++t)
            cumulative += trace.flows[t][e] - trace.capacities[e];
        if (cumulative > trace.final_tolls[e] / gamma + tol) return false;
    }
    return true;
}

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
    char buf[192];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

} // namespace

// Criterion-4 machinery: duality gap, market clearing, and the integral
// equilibrium-vs-brute-force equivalence on random small instances.
CheckResult check_market_clearing_suite(int count) {
    CheckResult result{"market_clearing_duality", true, ""};
    double worst_gap = 0.0, worst_residual = 0.0, worst_match = 0.0;
    int integral = 0;
    for (int k = 0; k < count; ++k) {
        const SmallInstance small = make_small_instance(1000 + k);
        const LpInstance inst = small.lp();
        const LpSolution sol = solve_lp(inst);
        if (sol.status != LpStatus::Optimal) {
            result.pass = false;
            result.detail = "solver hit iteration limit on instance " + std::to_string(k);
            return result;
        }
        double dual_value = -0.0;
        for (const auto& u : sol.users) dual_value += u.dual;
        for (int e = 0; e < small.net.edge_count(); ++e)
            dual_value -= sol.tolls[e] * inst.capacities[e];
        const double gap =
            std::abs(sol.objective - dual_value) / (1.0 + std::abs(sol.objective));
        worst_gap = std::max(worst_gap, gap);

        const MarketClearingReport report = check_market_clearing(inst, sol);
        worst_residual = std::max(
            {worst_residual, report.max_edge_residual, report.max_user_residual});

        // LP relaxation never exceeds the integral optimum.
        std::vector<ExactUser> exact(inst.users.size());
        for (std::size_t u = 0; u < inst.users.size(); ++u)
            exact[u] = ExactUser{inst.users[u].origin, inst.users[u].destination,
                                 inst.users[u].value_of_time, inst.users[u].outside_cost, true};
        const ExactAssignment ip = brute_force_system_optimum(small.net, exact,
                                                              inst.capacities);
        if (sol.objective > ip.cost + 1e-7) {
            result.pass = false;
            result.detail = "LP exceeded IP optimum on instance " + std::to_string(k);
            return result;
        }

        if (sol.integral()) {
            ++integral;
            std::vector<UserDraw> draws(inst.users.size());
            std::vector<TiePreference> prefs(inst.users.size());
            for (std::size_t u = 0; u < inst.users.size(); ++u) {
                draws[u].origin = inst.users[u].origin;
                draws[u].destination = inst.users[u].destination;
                draws[u].value_of_time = inst.users[u].value_of_time;
                draws[u].outside_cost = inst.users[u].outside_cost;
                if (sol.users[u].outside_flow > 0.5) {
                    prefs[u].outside = true;
                } else {
                    for (const auto& [path, flow] : sol.users[u].path_flows)
                        if (flow > 0.5) prefs[u].path = path;
                }
            }
            const AssignmentRecord rec =
                compute_equilibrium(small.net, draws, TollVector(sol.tolls), prefs);
            const double match =
                std::abs(rec.system_cost - ip.cost) / (1.0 + std::abs(ip.cost));
            worst_match = std::max(worst_match, match);
            for (int e = 0; e < small.net.edge_count(); ++e) {
                if (rec.edge_flows[e] > inst.capacities[e] + 1e-9) {
                    result.pass = false;
                    result.detail = "equilibrium violated capacity on instance " +
                                    std::to_string(k);
                    return result;
                }
            }
        }
    }
    if (worst_gap > 1e-6 || worst_residual > 1e-6 || worst_match > 1e-9) result.pass = false;
    std::ostringstream detail;
    detail << count << " instances, " << integral << " integral; max duality gap "
           << worst_gap << ", max clearing residual " << worst_residual
           << ", max equilibrium-IP mismatch " << worst_match;
    result.detail = detail.str();
    return result;
}

namespace {

ScenarioConfig lower_bound_config(std::int64_t T, int seeds) {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::LowerBound;
    cfg.horizon = T;
    cfg.seed_count = seeds;
    cfg.base_seed = 7;
    return cfg;
}

ScenarioConfig parallel_config(std::int64_t T) {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::ParallelSynth;
    cfg.horizon = T;
    cfg.parallel_edges = 4;
    cfg.parallel_users = 10;
    cfg.base_seed = 11;
    return cfg;
}

} // namespace

CheckResult check_toll_boundedness(bool fast) {
    CheckResult result{"toll_boundedness", true, ""};
    const std::int64_t T = fast ? 500 : 2000;
    for (const ScenarioConfig& cfg : {lower_bound_config(T, 3), parallel_config(T / 2)}) {
        const Scenario scenario = build_scenario(cfg);
        const double bound = max_outside_cost(scenario.population) +
                             *std::max_element(scenario.capacities.begin(),
                                               scenario.capacities.end()) +
                             scenario.population.total_users();
        for (int s = 0; s < cfg.seed_count; ++s) {
            const RunTrace trace =
                run_experiment(scenario, PolicyKind::OnlineGradient, cfg.base_seed + s);
            const std::int64_t bad = find_toll_bound_violation(trace, bound);
            if (bad >= 0) {
                result.pass = false;
                result.detail = to_string(cfg.kind) + std::string(" seed ") +
                                std::to_string(cfg.base_seed + s) + " period " +
                                std::to_string(bad);
                return result;
            }
            if (!telescoping_holds(trace, cfg.effective_gamma(trace.horizon))) {
                result.pass = false;
                result.detail = "telescoping bound failed";
                return result;
            }
        }
    }
    result.detail = "bound and telescoping inequality hold on every period";
    return result;
}

namespace {

// Runs the online loop with a mutated update rule and reports whether the
// toll-bound check catches it. The healthy rule must pass, the mutated
// ones must fail.
RunTrace run_mutated(const Scenario& scenario, double gamma, bool drop_projection,
                     bool flip_sign) {
    const Network& net = scenario.net;
    const std::int64_t T = scenario.config.horizon;
    std::vector<double> tau(net.edge_count(), 0.0);
    RunTrace trace;
    trace.horizon = T;
    trace.capacities = scenario.capacities;
    const PopulationModel& population = scenario.population;
    for (std::int64_t t = 1; t <= T; ++t) {
        // clip at zero only for the equilibrium input; the trace records the raw state
        std::vector<double> faced(tau);
        for (double& v : faced)
            if (v < 0.0) v = 0.0;
        const auto draws = population.sample_period(t);
        const AssignmentRecord rec = compute_equilibrium(net, draws, TollVector(faced));
        for (int e = 0; e < net.edge_count(); ++e) {
            const double grad = scenario.capacities[e] - rec.edge_flows[e];
            const double step = flip_sign ? gamma * grad : -gamma * grad;
            tau[e] = tau[e] + step;
            if (!drop_projection) tau[e] = std::max(0.0, tau[e]);
        }
        trace.system_cost.push_back(rec.system_cost);
        trace.oracle_cost.push_back(0.0);
        trace.oracle_ok.push_back(0);
        trace.flows.push_back(rec.edge_flows);
        trace.tolls.push_back(tau);
        trace.travel_time.push_back(rec.total_travel_time);
        trace.toll_revenue.push_back(rec.toll_revenue);
        trace.outside_users.push_back(rec.outside_count);
    }
    trace.final_tolls = tau;
    return trace;
}

} // namespace

CheckResult check_projection_mutation(bool fast) {
    CheckResult result{"toll_boundedness_mutation", false, ""};
    const ScenarioConfig cfg = lower_bound_config(fast ? 500 : 2000, 1);
    const Scenario scenario = build_scenario(cfg);
    const double gamma = cfg.effective_gamma(cfg.horizon);
    const double bound = max_outside_cost(scenario.population) +
                         *std::max_element(scenario.capacities.begin(),
                                           scenario.capacities.end()) +
                         scenario.population.total_users();
    const RunTrace healthy = run_mutated(scenario, gamma, false, false);
    const RunTrace mutated = run_mutated(scenario, gamma, true, false);
    const bool healthy_ok = find_toll_bound_violation(healthy, bound) < 0;
    const bool mutated_caught = find_toll_bound_violation(mutated, bound) >= 0;
    result.pass = healthy_ok && mutated_caught;
    result.detail = std::string("projection removed -> bound check ") +
                    (mutated_caught ? "fails as expected" : "was not triggered");
    return result;
}

CheckResult check_step_sign_mutation(bool fast) {
    CheckResult result{"step_sign_mutation", false, ""};
    const std::vector<std::int64_t> horizons = fast ? std::vector<std::int64_t>{100, 400, 1600}
                                                    : std::vector<std::int64_t>{100, 1000, 10000};
    const int seeds = 8; // single runs can end with the toll walked back to zero
    std::vector<std::pair<double, double>> healthy_points, mutated_points;
    for (std::int64_t T : horizons) {
        double healthy_mean = 0.0, mutated_mean = 0.0;
        for (int s = 0; s < seeds; ++s) {
            ScenarioConfig cfg = lower_bound_config(T, 1);
            cfg.base_seed += static_cast<std::uint64_t>(s);
            const Scenario scenario = build_scenario(cfg);
            const double gamma = cfg.effective_gamma(T);
            healthy_mean += violation(run_mutated(scenario, gamma, false, false)).linf;
            mutated_mean += violation(run_mutated(scenario, gamma, false, true)).linf;
        }
        healthy_mean /= seeds;
        mutated_mean /= seeds;
        if (healthy_mean > 0.0)
            healthy_points.emplace_back(static_cast<double>(T), healthy_mean);
        if (mutated_mean > 0.0)
            mutated_points.emplace_back(static_cast<double>(T), mutated_mean);
    }
    if (healthy_points.size() < 3 || mutated_points.size() < 3) {
        result.detail = "violation vanished on some horizon";
        return result;
    }
    const SlopeFit healthy = loglog_slope(healthy_points);
    const SlopeFit mutated = loglog_slope(mutated_points);
    // A flipped step sign turns cumulative violation linear in T.
    result.pass = healthy.slope >= 0.35 && healthy.slope <= 0.65 && mutated.slope > 0.8;
    result.detail = fmt("healthy slope %.3f, mutated slope %.3f", healthy.slope, mutated.slope);
    return result;
}

CheckResult check_vcg_suite(int count) {
    CheckResult result{"vcg_parallel", true, ""};
    double worst = 0.0;
    for (int k = 0; k < count; ++k) {
        const CounterRng rng(5000 + k);
        const int edges = 2 + static_cast<int>(rng.below(5, CounterRng::kInstanceGen, 1));
        ParallelInstance inst;
        double latency = rng.uniform(0.1, 0.5, CounterRng::kInstanceGen, 2);
        for (int e = 0; e < edges; ++e) {
            inst.latencies.push_back(latency);
            latency += rng.uniform(0.05, 0.8, CounterRng::kInstanceGen, 3, e);
            inst.capacities.push_back(
                1 + static_cast<int>(rng.below(3, CounterRng::kInstanceGen, 4, e)));
        }
        int total_cap = 0;
        for (int c : inst.capacities) total_cap += c;
        const int users =
            1 + static_cast<int>(rng.below(total_cap, CounterRng::kInstanceGen, 5));
        double vot = rng.uniform(20.0, 40.0, CounterRng::kInstanceGen, 6);
        for (int u = 0; u < users; ++u) {
            inst.vots.push_back(vot);
            vot -= rng.uniform(0.1, 3.0, CounterRng::kInstanceGen, 7, u);
            vot = std::max(vot, 0.05);
        }
        std::sort(inst.vots.rbegin(), inst.vots.rend());

        const std::vector<double> payments = vcg_payments_parallel(inst);
        const Network net = make_parallel_network(inst);
        std::vector<VcgUser> vcg_users(users);
        for (int u = 0; u < users; ++u) vcg_users[u] = VcgUser{0, 1, inst.vots[u]};

        const int last_edge = inst.edge_of_user(users - 1);
        std::vector<double> edge_tolls(net.edge_count(), 0.0);
        for (int u = 0; u < users; ++u) {
            const double general =
                vcg_payment_general(net, vcg_users, net.capacities(), u);
            worst = std::max(worst, std::abs(general - payments[u]));
            const int e = inst.edge_of_user(u);
            edge_tolls[e] = payments[u];
            // payments constant within an edge class
            if (u > 0 && inst.edge_of_user(u - 1) == e)
                worst = std::max(worst, std::abs(payments[u] - payments[u - 1]));
        }
        if (std::abs(payments[users - 1]) > 0.0) {
            result.pass = false;
            result.detail = "last-edge payment nonzero on instance " + std::to_string(k);
            return result;
        }
        (void)last_edge;

        const VcgEquilibriumReport eq = check_vcg_equilibrium(
            net, vcg_users, net.capacities(), TollVector(std::move(edge_tolls)));
        if (!eq.is_equilibrium) {
            result.pass = false;
            result.detail = "VCG tolls not an equilibrium on instance " + std::to_string(k);
            return result;
        }
    }
    if (worst > 1e-9) result.pass = false;

    // The single O-D counterexample: a profitable deviation must exist and
    // belong to the low-VoT user, toward the middle path.
    const CounterexampleFixture fx = make_counterexample();
    const VcgEquilibriumReport eq =
        check_vcg_equilibrium(fx.network, fx.users, fx.capacities, fx.vcg_tolls);
    const bool counterexample_ok =
        !eq.is_equilibrium && eq.deviating_user == 1 && eq.deviation == fx.p2;
    if (!counterexample_ok) {
        result.pass = false;
        result.detail = "counterexample deviation not detected";
        return result;
    }
    result.detail = fmt("max parallel-vs-general payment gap %.2e; counterexample deviates",
                        worst);
    return result;
}

CheckResult check_solver_cross(int count) {
    CheckResult result{"solver_cross_check", true, ""};
    double worst_sub = 0.0, worst_strong = 0.0;
    for (int k = 0; k < count; ++k) {
        const SmallInstance small = make_small_instance(9000 + k);
        const LpInstance inst = small.lp();
        const LpSolution sol = solve_lp(inst);
        const double dual_at_tolls =
            dual_objective(small.net, inst.users, sol.tolls, inst.capacities);
        worst_strong = std::max(worst_strong, std::abs(dual_at_tolls - sol.objective) /
                                                  (1.0 + std::abs(sol.objective)));

        const TollVector sub = subgradient_solve(inst, 20000, 1.0);
        const double sub_value =
            dual_objective(small.net, inst.users, sub.span(), inst.capacities);
        worst_sub = std::max(worst_sub, (sol.objective - sub_value) /
                                            (1.0 + std::abs(sol.objective)));
    }
    if (worst_strong > 1e-6 || worst_sub > 1e-3) result.pass = false;
    result.detail = fmt("max strong-duality residual %.2e, max subgradient gap %.2e",
                        worst_strong, worst_sub);
    return result;
}

CheckResult check_accounting_identity(int count) {
    CheckResult result{"equilibrium_accounting", true, ""};
    double worst = 0.0;
    for (int k = 0; k < count; ++k) {
        const SmallInstance small = make_small_instance(12000 + k);
        const CounterRng rng(31 + k);
        std::vector<double> tolls(small.net.edge_count());
        for (double& t : tolls) t = rng.uniform(0.0, 2.0, CounterRng::kInstanceGen, 40);
        std::vector<UserDraw> draws(small.users.size());
        for (std::size_t u = 0; u < small.users.size(); ++u)
            draws[u] = UserDraw{0, small.users[u].origin, small.users[u].destination,
                                small.users[u].value_of_time, small.users[u].outside_cost};
        const AssignmentRecord rec = compute_equilibrium(small.net, draws, TollVector(tolls));
        double toll_paid = 0.0;
        for (int e = 0; e < small.net.edge_count(); ++e)
            toll_paid += tolls[e] * rec.edge_flows[e];
        worst = std::max(worst,
                         std::abs(rec.system_cost + toll_paid - rec.min_cost_total));
    }
    result.pass = worst <= 1e-6;
    result.detail = fmt("max accounting residual %.2e", worst);
    return result;
}

std::vector<CheckResult> run_verification(bool fast) {
    std::vector<CheckResult> checks;
    checks.push_back(check_market_clearing_suite(fast ? 50 : 200));
    checks.push_back(check_toll_boundedness(fast));
    checks.push_back(check_projection_mutation(fast));
    checks.push_back(check_step_sign_mutation(fast));
    checks.push_back(check_vcg_suite(fast ? 30 : 100));
    checks.push_back(check_solver_cross(fast ? 10 : 50));
    checks.push_back(check_accounting_identity(fast ? 40 : 150));
    return checks;
}

std::string render_checks(const std::vector<CheckResult>& checks) {
    std::ostringstream out;
    for (const CheckResult& c : checks)
        out << (c.pass ? "PASS" : "FAIL") << "  " << c.name << ": " << c.detail << "\n";
    return out.str();
}

bool all_pass(const std::vector<CheckResult>& checks) {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.pass; });
}

} // namespace tollsim
