#include "tollsim/vcg.hpp"

#include <cmath>

#include "doctest.h"
#include "tollsim/rng.hpp"

using namespace tollsim;

TEST_CASE("two-edge parallel instance: externality prices the slower edge") {
    ParallelInstance inst;
    inst.latencies = {1.0, 2.0};
    inst.capacities = {1, 1};
    inst.vots = {10.0, 1.0};
    const auto payments = vcg_payments_parallel(inst);
    REQUIRE(payments.size() == 2);
    CHECK(payments[0] == doctest::Approx(1.0)); // v_2 (l_2 - l_1)
    CHECK(payments[1] == doctest::Approx(0.0)); // last used edge rides free

    // cross-check against the general externality formula
    const Network net = make_parallel_network(inst);
    const std::vector<VcgUser> users{{0, 1, 10.0}, {0, 1, 1.0}};
    CHECK(vcg_payment_general(net, users, net.capacities(), 0) == doctest::Approx(1.0));
    CHECK(vcg_payment_general(net, users, net.capacities(), 1) == doctest::Approx(0.0));
}

TEST_CASE("single roomy edge means zero externality for everyone") {
    ParallelInstance inst;
    inst.latencies = {1.5};
    inst.capacities = {10};
    inst.vots = {5.0, 4.0, 3.0};
    for (double p : vcg_payments_parallel(inst)) CHECK(p == doctest::Approx(0.0));
}

TEST_CASE("payments are constant within an edge class on random instances") {
    const CounterRng rng(101);
    for (int k = 0; k < 50; ++k) {
        ParallelInstance inst;
        const int edges = 2 + static_cast<int>(rng.below(4, CounterRng::kInstanceGen, k, 1));
        double l = rng.uniform(0.2, 0.6, CounterRng::kInstanceGen, k, 2);
        int total_cap = 0;
        for (int e = 0; e < edges; ++e) {
            inst.latencies.push_back(l);
            l += rng.uniform(0.1, 1.0, CounterRng::kInstanceGen, k, 10 + e);
            inst.capacities.push_back(
                1 + static_cast<int>(rng.below(3, CounterRng::kInstanceGen, k, 20 + e)));
            total_cap += inst.capacities.back();
        }
        const int users = 1 + static_cast<int>(
                                  rng.below(total_cap, CounterRng::kInstanceGen, k, 3));
        double v = 30.0;
        for (int u = 0; u < users; ++u) {
            inst.vots.push_back(v);
            v = std::max(0.1, v - rng.uniform(0.05, 2.0, CounterRng::kInstanceGen, k, 40 + u));
        }
        const auto payments = vcg_payments_parallel(inst);
        for (int u = 1; u < users; ++u) {
            if (inst.edge_of_user(u) == inst.edge_of_user(u - 1))
                CHECK(payments[u] == doctest::Approx(payments[u - 1]));
            else
                CHECK(payments[u] <= payments[u - 1] + 1e-12); // later edges pay less
        }
        CHECK(payments.back() == doctest::Approx(0.0));
        for (double p : payments) CHECK(p >= 0.0);
    }
}

TEST_CASE("vcg payments are nonnegative in general networks") {
    const auto fx = make_counterexample();
    for (int u = 0; u < 2; ++u)
        CHECK(vcg_payment_general(fx.network, fx.users, fx.capacities, u) >= 0.0);

    SUBCASE("removing an irrelevant user changes nothing") {
        // two users, two disjoint roomy edges: zero externality
        Network net(2);
        net.add_edge(0, 1, 1.0, 5.0);
        const std::vector<VcgUser> users{{0, 1, 3.0}, {0, 1, 2.0}};
        CHECK(vcg_payment_general(net, users, net.capacities(), 0) == doctest::Approx(0.0));
        CHECK(vcg_payment_general(net, users, net.capacities(), 1) == doctest::Approx(0.0));
    }
}

TEST_CASE("parallel VCG tolls induce the optimum as an equilibrium") {
    const CounterRng rng(55);
    for (int k = 0; k < 30; ++k) {
        ParallelInstance inst;
        const int edges = 2 + static_cast<int>(rng.below(3, CounterRng::kInstanceGen, k, 1));
        double l = 0.3;
        int cap_total = 0;
        for (int e = 0; e < edges; ++e) {
            inst.latencies.push_back(l);
            l += rng.uniform(0.2, 0.9, CounterRng::kInstanceGen, k, 5 + e);
            inst.capacities.push_back(
                1 + static_cast<int>(rng.below(2, CounterRng::kInstanceGen, k, 15 + e)));
            cap_total += inst.capacities.back();
        }
        const int users =
            1 + static_cast<int>(rng.below(cap_total, CounterRng::kInstanceGen, k, 2));
        double v = 20.0;
        for (int u = 0; u < users; ++u) {
            inst.vots.push_back(v);
            v = std::max(0.1, v - rng.uniform(0.1, 2.0, CounterRng::kInstanceGen, k, 30 + u));
        }
        const auto payments = vcg_payments_parallel(inst);
        const Network net = make_parallel_network(inst);
        std::vector<double> tolls(net.edge_count(), 0.0);
        std::vector<VcgUser> users_v;
        for (int u = 0; u < users; ++u) {
            tolls[inst.edge_of_user(u)] = payments[u];
            users_v.push_back({0, 1, inst.vots[u]});
        }
        const auto report =
            check_vcg_equilibrium(net, users_v, net.capacities(), TollVector(tolls));
        CHECK(report.is_equilibrium);

        // dual feasibility pattern: assigned edge minimizes v_u l_e + tau_e
        for (int u = 0; u < users; ++u) {
            const int mine = inst.edge_of_user(u);
            for (int e = 0; e < edges; ++e)
                CHECK(inst.vots[u] * inst.latencies[mine] + tolls[mine] <=
                      inst.vots[u] * inst.latencies[e] + tolls[e] + 1e-9);
        }
    }
}

TEST_CASE("the counterexample fixture rejects VCG tolls") {
    const auto fx = make_counterexample();

    SUBCASE("exactly the three stated paths exist") {
        const PathSet paths = enumerate_paths(fx.network, 0, 5, 10);
        REQUIRE(paths.exhaustive);
        REQUIRE(paths.paths.size() == 3);
        CHECK(paths.paths[0] == fx.p1);
        CHECK(paths.paths[1] == fx.p2);
        CHECK(paths.paths[2] == fx.p3);
        CHECK(fx.p1.total_latency(fx.network) == doctest::Approx(1.0));
        CHECK(fx.p2.total_latency(fx.network) == doctest::Approx(2.0));
        CHECK(fx.p3.total_latency(fx.network) == doctest::Approx(3.0));
    }

    SUBCASE("payments follow the appendix formulas") {
        const double p_high =
            vcg_payment_general(fx.network, fx.users, fx.capacities, 0);
        const double p_low = vcg_payment_general(fx.network, fx.users, fx.capacities, 1);
        CHECK(p_high == doctest::Approx(1.0 * (3.0 - 1.0))); // v_low (l_P3 - l_P1)
        CHECK(p_low == doctest::Approx(10.0 * (2.0 - 1.0))); // v_high (l_P2 - l_P1)
    }

    SUBCASE("the low-VoT user profitably deviates to the middle path") {
        const auto report =
            check_vcg_equilibrium(fx.network, fx.users, fx.capacities, fx.vcg_tolls);
        CHECK_FALSE(report.is_equilibrium);
        CHECK(report.deviating_user == 1);
        CHECK(report.deviation == fx.p2);
        CHECK(report.gain > 0.0);
    }
}

TEST_CASE("zero tolls on a roomy network are an equilibrium exactly at the optimum") {
    Network net(3);
    net.add_edge(0, 1, 0.5, 10.0);
    net.add_edge(1, 2, 0.5, 10.0);
    net.add_edge(0, 2, 0.8, 10.0);
    const std::vector<VcgUser> users{{0, 2, 2.0}, {0, 2, 1.0}};
    const auto report =
        check_vcg_equilibrium(net, users, net.capacities(), TollVector::zeros(3));
    CHECK(report.is_equilibrium); // optimum = untolled shortest path for everyone
}

TEST_CASE("instance validation rejects broken orderings") {
    ParallelInstance bad;
    bad.latencies = {2.0, 1.0};
    bad.capacities = {1, 1};
    bad.vots = {1.0};
    CHECK_THROWS_AS(vcg_payments_parallel(bad), std::invalid_argument);

    ParallelInstance short_cap;
    short_cap.latencies = {1.0};
    short_cap.capacities = {1};
    short_cap.vots = {2.0, 1.0};
    CHECK_THROWS_AS(vcg_payments_parallel(short_cap), std::invalid_argument);
}
