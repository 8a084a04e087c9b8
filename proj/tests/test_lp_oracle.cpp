#include "tollsim/lp_oracle.hpp"

#include <cmath>

#include "doctest.h"
#include "tollsim/exact.hpp"
#include "tollsim/rng.hpp"
#include "tollsim/verify.hpp"

using namespace tollsim;

namespace {

LpUser user(int o, int d, double vot, double outside) { return LpUser{o, d, vot, outside}; }

double dual_from_solution(const LpInstance& inst, const LpSolution& sol) {
    double value = 0.0;
    for (const auto& u : sol.users) value += u.dual;
    for (std::size_t e = 0; e < inst.capacities.size(); ++e)
        value -= sol.tolls[e] * inst.capacities[e];
    return value;
}

} // namespace

TEST_CASE("one-edge two-user instance: fractional optimum, market-clearing dual") {
    Network net(2);
    net.add_edge(0, 1, 1.0, 1.0);
    LpInstance inst{&net, {user(0, 1, 1.0, 2.0), user(0, 1, 1.0, 2.0)}, {1.0}};
    const LpSolution sol = solve_lp(inst);
    REQUIRE(sol.status == LpStatus::Optimal);

    // One unit rides, one unit stays outside: 1*1 + 1*2.
    CHECK(sol.objective == doctest::Approx(3.0));
    CHECK(sol.edge_flows[0] == doctest::Approx(1.0));

    // Independent check: enumerate the four integral assignments, then
    // confirm no fractional split beats them on this instance.
    std::vector<ExactUser> exact{{0, 1, 1.0, 2.0, true}, {0, 1, 1.0, 2.0, true}};
    const ExactAssignment ip = brute_force_system_optimum(net, exact, inst.capacities);
    CHECK(ip.cost == doctest::Approx(3.0));
    CHECK(sol.objective <= ip.cost + 1e-9);
    for (double split = 0.0; split <= 1.0 + 1e-9; split += 0.125) {
        // both users ride fraction f with f1 + f2 <= 1
        const double f = split / 2.0;
        const double cost = 2.0 * (f * 1.0 + (1.0 - f) * 2.0);
        CHECK(sol.objective <= cost + 1e-9);
    }

    const MarketClearingReport report = check_market_clearing(inst, sol);
    CHECK(report.clears(1e-6));
    CHECK(sol.users[0].dual == doctest::Approx(2.0)); // min(1 + tau, 2) with tau = 1

    const double gap = std::abs(sol.objective - dual_from_solution(inst, sol));
    CHECK(gap <= 1e-6 * (1.0 + std::abs(sol.objective)));
}

TEST_CASE("uncapacitated network routes everyone at zero tolls") {
    Network net(3);
    net.add_edge(0, 1, 0.5, 1e6);
    net.add_edge(1, 2, 0.5, 1e6);
    net.add_edge(0, 2, 2.0, 1e6);
    LpInstance inst{&net,
                    {user(0, 2, 1.0, 9.0), user(0, 2, 2.0, 9.0), user(0, 1, 1.0, 9.0)},
                    net.capacities()};
    const LpSolution sol = solve_lp(inst);
    REQUIRE(sol.status == LpStatus::Optimal);
    for (double t : sol.tolls) CHECK(t == doctest::Approx(0.0));
    CHECK(sol.objective == doctest::Approx(1.0 + 2.0 + 0.5));
    for (const auto& u : sol.users) CHECK(u.outside_flow == doctest::Approx(0.0));
    CHECK(check_market_clearing(inst, sol).clears(1e-6));
}

TEST_CASE("zero outside costs park everyone outside") {
    Network net(2);
    net.add_edge(0, 1, 1.0, 4.0);
    LpInstance inst{&net, {user(0, 1, 1.0, 0.0), user(0, 1, 2.0, 0.0)}, {4.0}};
    const LpSolution sol = solve_lp(inst);
    CHECK(sol.objective == doctest::Approx(0.0));
    for (const auto& u : sol.users) CHECK(u.outside_flow == doctest::Approx(1.0));
}

TEST_CASE("dual objective evaluates the toll-only program") {
    Network net(2);
    net.add_edge(0, 1, 1.0, 1.0);
    const std::vector<LpUser> users{user(0, 1, 1.0, 2.0)};
    const std::vector<double> caps{1.0};
    SUBCASE("single toll point") {
        const std::vector<double> tau{0.5};
        CHECK(dual_objective(net, users, tau, caps) == doctest::Approx(1.0));
    }
    SUBCASE("zero tolls reduce to untolled shortest times") {
        const std::vector<double> tau{0.0};
        CHECK(dual_objective(net, users, tau, caps) == doctest::Approx(1.0));
    }
    SUBCASE("strong duality at the LP duals") {
        LpInstance inst{&net, {user(0, 1, 1.0, 2.0), user(0, 1, 1.0, 2.0)}, {1.0}};
        const LpSolution sol = solve_lp(inst);
        const double at_tolls =
            dual_objective(net, inst.users, sol.tolls, inst.capacities);
        CHECK(at_tolls ==
              doctest::Approx(sol.objective).epsilon(1e-6));
    }
}

TEST_CASE("strong duality and market clearing hold across random instances") {
    for (int k = 0; k < 60; ++k) {
        const SmallInstance small = make_small_instance(500 + k);
        const LpInstance inst = small.lp();
        const LpSolution sol = solve_lp(inst);
        REQUIRE(sol.status == LpStatus::Optimal);

        const double gap = std::abs(sol.objective - dual_from_solution(inst, sol));
        CHECK(gap <= 1e-6 * (1.0 + std::abs(sol.objective)));
        CHECK(check_market_clearing(inst, sol).clears(1e-6));

        // primal feasibility: allocation rows and capacities
        for (const auto& u : sol.users) {
            double total = u.outside_flow;
            for (const auto& [path, flow] : u.path_flows) {
                total += flow;
                CHECK(flow >= -1e-8);
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
        }
        for (std::size_t e = 0; e < inst.capacities.size(); ++e)
            CHECK(sol.edge_flows[e] <= inst.capacities[e] + 1e-8);

        // the relaxation lower-bounds the integral optimum
        std::vector<ExactUser> exact;
        for (const LpUser& u : inst.users)
            exact.push_back({u.origin, u.destination, u.value_of_time, u.outside_cost, true});
        const ExactAssignment ip = brute_force_system_optimum(small.net, exact,
                                                              inst.capacities);
        CHECK(sol.objective <= ip.cost + 1e-7);
    }
}

TEST_CASE("dual objective is concave in the tolls") {
    for (int k = 0; k < 40; ++k) {
        const SmallInstance small = make_small_instance(800 + k);
        const CounterRng rng(k);
        const int n = small.net.edge_count();
        std::vector<double> a(n), b(n), mid(n);
        for (int e = 0; e < n; ++e) {
            a[e] = rng.uniform(0.0, 3.0, CounterRng::kGeneric, 1, e);
            b[e] = rng.uniform(0.0, 3.0, CounterRng::kGeneric, 2, e);
            mid[e] = 0.5 * (a[e] + b[e]);
        }
        const double va = dual_objective(small.net, small.users, a, small.capacities);
        const double vb = dual_objective(small.net, small.users, b, small.capacities);
        const double vm = dual_objective(small.net, small.users, mid, small.capacities);
        CHECK(vm >= 0.5 * va + 0.5 * vb - 1e-9);
    }
}

TEST_CASE("subgradient solver approaches the simplex dual value") {
    SUBCASE("zero tolls are never better than the returned iterate") {
        const SmallInstance small = make_small_instance(42);
        const LpInstance inst = small.lp();
        const TollVector tau = subgradient_solve(inst, 2000, 0.5);
        const std::vector<double> zero(small.net.edge_count(), 0.0);
        CHECK(dual_objective(small.net, inst.users, tau.span(), inst.capacities) >=
              dual_objective(small.net, inst.users, zero, inst.capacities) - 1e-12);
    }
    SUBCASE("three-route instance converges to the LP value") {
        Network net(2);
        net.add_edge(0, 1, 1.0, 1.0);
        net.add_edge(0, 1, 1.5, 1.0);
        net.add_edge(0, 1, 2.0, 1.0);
        LpInstance inst{&net,
                        {user(0, 1, 2.0, 9.0), user(0, 1, 1.5, 9.0), user(0, 1, 1.0, 9.0),
                         user(0, 1, 0.5, 9.0)},
                        net.capacities()};
        const LpSolution sol = solve_lp(inst);
        const TollVector tau = subgradient_solve(inst, 10000, 0.5);
        const double sub = dual_objective(net, inst.users, tau.span(), inst.capacities);
        CHECK(std::abs(sol.objective - sub) / (1.0 + std::abs(sol.objective)) < 1e-3);
    }
    SUBCASE("slack capacity drives tolls to zero") {
        Network net(2);
        net.add_edge(0, 1, 1.0, 5.0);
        LpInstance inst{&net, {user(0, 1, 1.0, 4.0)}, {5.0}};
        const TollVector tau = subgradient_solve(inst, 4000, 0.25);
        CHECK(tau[0] <= 0.05);
    }
}

TEST_CASE("market-clearing saturates the tolled edge") {
    Network net(2);
    net.add_edge(0, 1, 1.0, 1.0);
    net.add_edge(0, 1, 3.0, 5.0);
    LpInstance inst{&net, {user(0, 1, 1.0, 9.0), user(0, 1, 2.0, 9.0)}, {1.0, 5.0}};
    const LpSolution sol = solve_lp(inst);
    REQUIRE(sol.status == LpStatus::Optimal);
    if (sol.tolls[0] > 1e-9) CHECK(sol.edge_flows[0] == doctest::Approx(1.0));
    CHECK(check_market_clearing(inst, sol).clears(1e-6));
}

TEST_CASE("integral LP optimum matches the equilibrium under its tolls") {
    int integral_seen = 0;
    for (int k = 0; k < 120 && integral_seen < 25; ++k) {
        const SmallInstance small = make_small_instance(2200 + k);
        const LpInstance inst = small.lp();
        const LpSolution sol = solve_lp(inst);
        if (sol.status != LpStatus::Optimal || !sol.integral()) continue;
        ++integral_seen;

        std::vector<ExactUser> exact;
        for (const LpUser& u : inst.users)
            exact.push_back({u.origin, u.destination, u.value_of_time, u.outside_cost, true});
        const ExactAssignment ip =
            brute_force_system_optimum(small.net, exact, inst.capacities);

        std::vector<UserDraw> draws;
        std::vector<TiePreference> prefs(inst.users.size());
        for (std::size_t u = 0; u < inst.users.size(); ++u) {
            draws.push_back(UserDraw{0, inst.users[u].origin, inst.users[u].destination,
                                     inst.users[u].value_of_time, inst.users[u].outside_cost});
            if (sol.users[u].outside_flow > 0.5)
                prefs[u].outside = true;
            else
                for (const auto& [path, flow] : sol.users[u].path_flows)
                    if (flow > 0.5) prefs[u].path = path;
        }
        const AssignmentRecord rec =
            compute_equilibrium(small.net, draws, TollVector(sol.tolls), prefs);
        CHECK(rec.system_cost == doctest::Approx(ip.cost).epsilon(1e-9));
        for (int e = 0; e < small.net.edge_count(); ++e)
            CHECK(rec.edge_flows[e] <= inst.capacities[e] + 1e-9);
    }
    CHECK(integral_seen >= 25);
}

TEST_CASE("iteration limit reports best-so-far") {
    Network net(2);
    net.add_edge(0, 1, 1.0, 1.0);
    net.add_edge(0, 1, 1.5, 1.0);
    LpInstance inst{&net, {user(0, 1, 1.0, 5.0), user(0, 1, 2.0, 5.0)}, net.capacities()};
    LpOptions opts;
    opts.max_pivots = 1;
    const LpSolution sol = solve_lp(inst, opts);
    CHECK(sol.status == LpStatus::IterationLimit);
    CHECK(sol.objective > 0.0);
}

TEST_CASE("empty instance is trivially optimal") {
    Network net(2);
    net.add_edge(0, 1, 1.0, 1.0);
    LpInstance inst{&net, {}, {1.0}};
    const LpSolution sol = solve_lp(inst);
    CHECK(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(0.0));
}
