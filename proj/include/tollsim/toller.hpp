#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tollsim/equilibrium.hpp"
#include "tollsim/rng.hpp"

namespace tollsim {

enum class PolicyKind {
    OnlineGradient,       // tau <- (tau - gamma (c - x))_+
    Reactive,             // fixed +/- delta per edge
    StaticPopulationMean, // dual tolls of the population-mean instance, re-noised each period
    StaticGroupMean,      // dual tolls of the group-mean instance, re-noised each period
};

// Componentwise projected step tau' = max(0, tau - gamma (c - x)).
TollVector gradient_update(const TollVector& tolls, std::span<const double> capacities,
                           std::span<const double> observed_flows, double gamma);

// Fixed-increment update: +delta where flow exceeds capacity, -delta
// (floored at zero) where flow is below, unchanged at equality.
TollVector reactive_update(const TollVector& tolls, std::span<const double> capacities,
                           std::span<const double> observed_flows, double delta);

// Base tolls plus per-edge i.i.d. Uniform[-h, h] tie-breaking noise,
// clipped at zero. Noise is keyed by (rng seed, period, edge) so each
// period re-draws it.
TollVector static_tolls(const TollVector& base, double noise_halfwidth, const CounterRng& rng,
                        std::int64_t period);

// Theoretical step size 1/sqrt(T).
double recommended_step(std::int64_t horizon);

// Single-owner toll policy state, advanced once per period.
class Toller {
public:
    Toller(PolicyKind kind, int edge_count, double gamma, double delta,
           double noise_halfwidth, TollVector static_base, std::uint64_t noise_seed);

    PolicyKind kind() const { return kind_; }
    const TollVector& tolls() const { return tolls_; }
    std::int64_t period() const { return period_; }

    // Tolls the users face at period t (statics re-draw their noise here).
    const TollVector& begin_period(std::int64_t t);

    // Consumes the observed flows of period t and advances the state.
    void observe(std::span<const double> capacities, std::span<const double> observed_flows);

private:
    PolicyKind kind_;
    TollVector tolls_;
    double gamma_ = 0.0;
    double delta_ = 0.0;
    double noise_halfwidth_ = 0.0;
    TollVector static_base_;
    CounterRng noise_rng_;
    std::int64_t period_ = 0;
};

} // namespace tollsim
