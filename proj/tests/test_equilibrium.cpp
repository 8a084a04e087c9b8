#include "tollsim/equilibrium.hpp"

#include <cmath>

#include "doctest.h"
#include "tollsim/rng.hpp"

using namespace tollsim;

namespace {

Network parallel_two() {
    Network net(2);
    net.add_edge(0, 1, 1.0, 1.0);
    net.add_edge(0, 1, 2.0, 1.0);
    return net;
}

UserDraw draw(int origin, int destination, double vot, double outside) {
    return UserDraw{0, origin, destination, vot, outside};
}

} // namespace

TEST_CASE("best response picks the cheapest of paths and outside option") {
    const Network net = parallel_two();
    SUBCASE("untolled: fast edge wins") {
        const auto out = best_response(net, draw(0, 1, 1.0, 10.0), TollVector::zeros(2));
        CHECK(out.traveled);
        CHECK(out.path.edges == std::vector<int>{0});
        CHECK(out.cost == doctest::Approx(1.0));
    }
    SUBCASE("toll pushes the user to the slow edge") {
        const auto out =
            best_response(net, draw(0, 1, 1.0, 10.0), TollVector({1.5, 0.0}));
        CHECK(out.traveled);
        CHECK(out.path.edges == std::vector<int>{1});
        CHECK(out.cost == doctest::Approx(2.0));
    }
    SUBCASE("cheap outside option wins") {
        const auto out = best_response(net, draw(0, 1, 1.0, 0.5), TollVector::zeros(2));
        CHECK_FALSE(out.traveled);
        CHECK(out.cost == doctest::Approx(0.5));
    }
    SUBCASE("exact tie resolves to the path") {
        const auto out = best_response(net, draw(0, 1, 1.0, 1.0), TollVector::zeros(2));
        CHECK(out.traveled);
        CHECK(out.cost == doctest::Approx(1.0));
    }
    SUBCASE("perturbing the outside cost by 1e-9 flips the tie") {
        const auto at_tie = best_response(net, draw(0, 1, 1.0, 1.0), TollVector::zeros(2));
        const auto below = best_response(net, draw(0, 1, 1.0, 1.0 - 1e-9), TollVector::zeros(2));
        CHECK(at_tie.traveled);
        CHECK_FALSE(below.traveled);
    }
    SUBCASE("unreachable destination falls back to the outside option") {
        Network disconnected(3);
        disconnected.add_edge(0, 1, 1.0, 1.0);
        const auto out =
            best_response(disconnected, draw(0, 2, 1.0, 4.0), TollVector::zeros(1));
        CHECK_FALSE(out.traveled);
        CHECK(out.cost == doctest::Approx(4.0));
    }
}

TEST_CASE("one-edge equilibrium matches the hand computation") {
    Network net(2);
    net.add_edge(0, 1, 1.0, 1.0);
    const std::vector<UserDraw> users{draw(0, 1, 1.0, 2.0), draw(0, 1, 1.0, 2.0)};

    SUBCASE("untolled: both users ride, capacity blind") {
        const auto rec = compute_equilibrium(net, users, TollVector::zeros(1));
        CHECK(rec.edge_flows == std::vector<int>{2});
        CHECK(rec.system_cost == doctest::Approx(2.0));
        CHECK(rec.outside_count == 0);
    }
    SUBCASE("toll 1.5 prices both users out") {
        const auto rec = compute_equilibrium(net, users, TollVector({1.5}));
        CHECK(rec.edge_flows == std::vector<int>{0});
        CHECK(rec.system_cost == doctest::Approx(4.0));
        CHECK(rec.outside_count == 2);
    }
    SUBCASE("no users, empty record") {
        const auto rec = compute_equilibrium(net, {}, TollVector::zeros(1));
        CHECK(rec.edge_flows == std::vector<int>{0});
        CHECK(rec.system_cost == doctest::Approx(0.0));
    }
}

TEST_CASE("flows never depend on capacities") {
    Network small(2);
    small.add_edge(0, 1, 1.0, 1.0);
    Network large(2);
    large.add_edge(0, 1, 1.0, 1000.0);
    const std::vector<UserDraw> users{draw(0, 1, 2.0, 9.0), draw(0, 1, 3.0, 9.0)};
    const auto a = compute_equilibrium(small, users, TollVector::zeros(1));
    const auto b = compute_equilibrium(large, users, TollVector::zeros(1));
    CHECK(a.edge_flows == b.edge_flows);
    CHECK(a.system_cost == doctest::Approx(b.system_cost));
}

TEST_CASE("accounting identity: system cost plus toll revenue equals total incurred cost") {
    const CounterRng rng(77);
    for (int k = 0; k < 30; ++k) {
        Network net(4);
        net.add_edge(0, 1, 0.5, 1.0);
        net.add_edge(1, 3, 0.5, 1.0);
        net.add_edge(0, 2, 0.4, 1.0);
        net.add_edge(2, 3, 0.9, 1.0);
        net.add_edge(0, 3, 1.7, 1.0);
        std::vector<double> tolls(5);
        for (int e = 0; e < 5; ++e)
            tolls[e] = rng.uniform(0.0, 2.0, CounterRng::kGeneric, k, e);
        std::vector<UserDraw> users;
        for (int u = 0; u < 6; ++u)
            users.push_back(draw(0, 3, rng.uniform(0.5, 4.0, CounterRng::kGeneric, 100 + k, u),
                                 rng.uniform(0.5, 6.0, CounterRng::kGeneric, 200 + k, u)));
        const auto rec = compute_equilibrium(net, users, TollVector(tolls));
        double toll_paid = 0.0;
        for (int e = 0; e < 5; ++e) toll_paid += tolls[e] * rec.edge_flows[e];
        CHECK(rec.system_cost + toll_paid ==
              doctest::Approx(rec.min_cost_total).epsilon(1e-9));
        CHECK(toll_paid == doctest::Approx(rec.toll_revenue).epsilon(1e-9));
    }
}

TEST_CASE("raising one toll never lowers any user's cost or raises that edge's flow") {
    const CounterRng rng(5);
    Network net(3);
    net.add_edge(0, 1, 1.0, 1.0);
    net.add_edge(1, 2, 1.0, 1.0);
    net.add_edge(0, 2, 2.5, 1.0);
    for (int k = 0; k < 40; ++k) {
        std::vector<double> tolls(3);
        for (int e = 0; e < 3; ++e) tolls[e] = rng.uniform(0.0, 1.5, CounterRng::kGeneric, k, e);
        std::vector<UserDraw> users;
        for (int u = 0; u < 5; ++u)
            users.push_back(draw(0, 2, rng.uniform(0.5, 3.0, CounterRng::kGeneric, 50 + k, u),
                                 rng.uniform(1.0, 8.0, CounterRng::kGeneric, 90 + k, u)));
        const auto before = compute_equilibrium(net, users, TollVector(tolls));
        const int bumped = static_cast<int>(rng.below(3, CounterRng::kGeneric, 300 + k));
        std::vector<double> higher(tolls);
        higher[bumped] += rng.uniform(0.1, 1.0, CounterRng::kGeneric, 400 + k);
        const auto after = compute_equilibrium(net, users, TollVector(higher));
        for (std::size_t u = 0; u < users.size(); ++u)
            CHECK(after.choices[u].cost >= before.choices[u].cost - 1e-12);
        CHECK(after.edge_flows[bumped] <= before.edge_flows[bumped]);
    }
}

TEST_CASE("tie preferences steer only genuine ties") {
    const Network net = parallel_two();
    const std::vector<UserDraw> users{draw(0, 1, 1.0, 10.0)};
    std::vector<TiePreference> prefs(1);
    prefs[0].path = Path{0, 1, {1}}; // slow edge costs 2 > 1: not a tie
    const auto rec = compute_equilibrium(net, users, TollVector::zeros(2), prefs);
    CHECK(rec.choices[0].path.edges == std::vector<int>{0});

    // With a toll equalizing the two edges the preference binds.
    const auto tied = compute_equilibrium(net, users, TollVector({1.0, 0.0}), prefs);
    CHECK(tied.choices[0].path.edges == std::vector<int>{1});

    std::vector<TiePreference> outside(1);
    outside[0].outside = true;
    const auto rec2 =
        compute_equilibrium(net, users, TollVector({9.0, 8.0}), outside); // both routes cost 10
    CHECK_FALSE(rec2.choices[0].traveled);
}

TEST_CASE("toll vector rejects negative entries and size mismatches") {
    CHECK_THROWS_AS(TollVector({-0.1}), std::invalid_argument);
    Network net(2);
    net.add_edge(0, 1, 1.0, 1.0);
    CHECK_THROWS_AS(
        (void)compute_equilibrium(net, std::vector<UserDraw>{}, TollVector::zeros(2)),
        std::invalid_argument);
}
