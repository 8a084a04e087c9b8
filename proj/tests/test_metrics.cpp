#include "tollsim/metrics.hpp"

#include <cmath>

#include "doctest.h"
#include "tollsim/rng.hpp"

using namespace tollsim;

namespace {

RunTrace make_trace(std::int64_t T, double capacity) {
    RunTrace trace;
    trace.horizon = T;
    trace.capacities = {capacity};
    trace.system_cost.assign(T, 0.0);
    trace.oracle_cost.assign(T, 0.0);
    trace.oracle_ok.assign(T, 1);
    trace.flows.assign(T, {0});
    trace.tolls.assign(T, {0.0});
    trace.travel_time.assign(T, 0.0);
    trace.toll_revenue.assign(T, 0.0);
    trace.outside_users.assign(T, 0);
    trace.final_tolls = {0.0};
    return trace;
}

} // namespace

TEST_CASE("regret accumulates the per-period optimality gap") {
    RunTrace trace = make_trace(10, 1.0);
    SUBCASE("achieving the oracle cost means zero regret") {
        for (int t = 0; t < 10; ++t) trace.system_cost[t] = trace.oracle_cost[t] = 5.0;
        CHECK(regret(trace) == doctest::Approx(0.0));
    }
    SUBCASE("a constant gap accumulates linearly") {
        for (int t = 0; t < 10; ++t) {
            trace.system_cost[t] = 7.5;
            trace.oracle_cost[t] = 5.0;
        }
        CHECK(regret(trace) == doctest::Approx(25.0));
    }
    SUBCASE("capacity violations can push regret negative") {
        // the one-edge two-user instance at zero tolls: U_t = 2, U*_t = 3
        for (int t = 0; t < 10; ++t) {
            trace.system_cost[t] = 2.0;
            trace.oracle_cost[t] = 3.0;
            trace.flows[t] = {2};
        }
        CHECK(regret(trace) == doctest::Approx(-10.0));
    }
}

TEST_CASE("violation is the positive part of the cumulative excess") {
    SUBCASE("staying within capacity leaves no violation") {
        RunTrace trace = make_trace(50, 2.0);
        for (int t = 0; t < 50; ++t) trace.flows[t] = {t % 3 == 0 ? 2 : 0};
        const ViolationReport v = violation(trace);
        CHECK(v.linf == doctest::Approx(0.0));
        CHECK(v.l2 == doctest::Approx(0.0));
        CHECK(v.argmax_edge == -1);
    }
    SUBCASE("persistent overload accumulates linearly") {
        RunTrace trace = make_trace(40, 1.0);
        for (int t = 0; t < 40; ++t) trace.flows[t] = {2};
        const ViolationReport v = violation(trace);
        CHECK(v.linf == doctest::Approx(40.0));
        CHECK(v.l2 == doctest::Approx(40.0));
        CHECK(v.argmax_edge == 0);
    }
    SUBCASE("excess nets against later slack before the positive part") {
        RunTrace trace = make_trace(4, 1.0);
        trace.flows[0] = {3};
        trace.flows[1] = {0};
        trace.flows[2] = {0};
        trace.flows[3] = {1};
        const ViolationReport v = violation(trace); // 2 - 1 - 1 + 0 = 0
        CHECK(v.linf == doctest::Approx(0.0));
    }
    SUBCASE("matches an independent recomputation on random traces") {
        const CounterRng rng(3);
        RunTrace trace = make_trace(200, 2.0);
        trace.capacities = {2.0, 1.0};
        double sum0 = 0.0, sum1 = 0.0;
        for (int t = 0; t < 200; ++t) {
            const int f0 = static_cast<int>(rng.below(5, CounterRng::kGeneric, t, 0));
            const int f1 = static_cast<int>(rng.below(3, CounterRng::kGeneric, t, 1));
            trace.flows[t] = {f0, f1};
            sum0 += f0 - 2.0;
            sum1 += f1 - 1.0;
        }
        const ViolationReport v = violation(trace);
        CHECK(v.vector_part[0] == doctest::Approx(std::max(0.0, sum0)));
        CHECK(v.vector_part[1] == doctest::Approx(std::max(0.0, sum1)));
        CHECK(v.l2 == doctest::Approx(std::sqrt(std::max(0.0, sum0) * std::max(0.0, sum0) +
                                                std::max(0.0, sum1) * std::max(0.0, sum1))));
    }
}

TEST_CASE("normalized metrics follow the stated ratios") {
    RunTrace trace = make_trace(10, 2.0);
    for (int t = 0; t < 10; ++t) {
        trace.system_cost[t] = 11.0;
        trace.oracle_cost[t] = 10.0;
        trace.travel_time[t] = 4.0;
        trace.flows[t] = {3}; // excess 1 per period
    }
    const MetricReport report = normalized_metrics(trace, 4.0);
    CHECK(report.normalized_regret == doctest::Approx(10.0 / 100.0));
    CHECK(report.normalized_violation == doctest::Approx(10.0 / (10.0 * 2.0)));
    CHECK(report.normalized_travel_time == doctest::Approx(1.0));

    SUBCASE("violation-free run scores zero") {
        for (int t = 0; t < 10; ++t) trace.flows[t] = {0};
        CHECK(normalized_metrics(trace, 4.0).normalized_violation == doctest::Approx(0.0));
    }
    SUBCASE("zero denominators are rejected") {
        for (int t = 0; t < 10; ++t) trace.oracle_cost[t] = 0.0;
        CHECK_THROWS_AS(normalized_metrics(trace, 4.0), std::invalid_argument);
    }
}

TEST_CASE("log-log slope fitting") {
    SUBCASE("exact square root has slope one half") {
        std::vector<std::pair<double, double>> pts;
        for (double T : {100.0, 1000.0, 10000.0}) pts.emplace_back(T, std::sqrt(T));
        const SlopeFit fit = loglog_slope(pts);
        CHECK(fit.slope == doctest::Approx(0.5));
        CHECK(fit.rmse == doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("linear growth has slope one") {
        std::vector<std::pair<double, double>> pts;
        for (double T : {100.0, 300.0, 1000.0, 5000.0}) pts.emplace_back(T, 3.0 * T);
        CHECK(loglog_slope(pts).slope == doctest::Approx(1.0));
    }
    SUBCASE("multiplicative noise keeps the slope near one half") {
        const CounterRng rng(11);
        double worst = 0.0;
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<std::pair<double, double>> pts;
            for (double T : {100.0, 200.0, 500.0, 1000.0, 2000.0, 5000.0}) {
                const double noise = rng.uniform(-0.01, 0.01, CounterRng::kGeneric, rep,
                                                 static_cast<std::uint64_t>(T));
                pts.emplace_back(T, std::sqrt(T) * (1.0 + noise));
            }
            worst = std::max(worst, std::abs(loglog_slope(pts).slope - 0.5));
        }
        CHECK(worst < 0.02);
    }
    SUBCASE("nonpositive values are rejected") {
        std::vector<std::pair<double, double>> pts{{10.0, 1.0}, {20.0, 0.0}, {30.0, 2.0}};
        CHECK_THROWS_AS(loglog_slope(pts), std::invalid_argument);
        CHECK_THROWS_AS(loglog_slope({{1.0, 1.0}, {2.0, 2.0}}), std::invalid_argument);
    }
}
