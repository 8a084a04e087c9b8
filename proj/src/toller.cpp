#include "tollsim/toller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tollsim {

namespace {

void check_sizes(const TollVector& tolls, std::span<const double> capacities,
                 std::span<const double> flows) {
    if (static_cast<int>(capacities.size()) != tolls.size() ||
        static_cast<int>(flows.size()) != tolls.size())
        throw std::invalid_argument("capacity/flow vector size mismatch");
}

} // namespace

TollVector gradient_update(const TollVector& tolls, std::span<const double> capacities,
                           std::span<const double> observed_flows, double gamma) {
    check_sizes(tolls, capacities, observed_flows);
    std::vector<double> next(tolls.size());
    for (int e = 0; e < tolls.size(); ++e)
        next[e] = std::max(0.0, tolls[e] - gamma * (capacities[e] - observed_flows[e]));
    return TollVector(std::move(next));
}

TollVector reactive_update(const TollVector& tolls, std::span<const double> capacities,
                           std::span<const double> observed_flows, double delta) {
    check_sizes(tolls, capacities, observed_flows);
    std::vector<double> next(tolls.size());
    for (int e = 0; e < tolls.size(); ++e) {
        if (observed_flows[e] > capacities[e])
            next[e] = tolls[e] + delta;
        else if (observed_flows[e] < capacities[e])
            next[e] = std::max(0.0, tolls[e] - delta);
        else
            next[e] = tolls[e];
    }
    return TollVector(std::move(next));
}

TollVector static_tolls(const TollVector& base, double noise_halfwidth, const CounterRng& rng,
                        std::int64_t period) {
    std::vector<double> next(base.size());
    for (int e = 0; e < base.size(); ++e) {
        const double noise = rng.uniform(-noise_halfwidth, noise_halfwidth,
                                         CounterRng::kTollNoise, period, e);
        next[e] = std::max(0.0, base[e] + noise);
    }
    return TollVector(std::move(next));
}

double recommended_step(std::int64_t horizon) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    return 1.0 / std::sqrt(static_cast<double>(horizon));
}

Toller::Toller(PolicyKind kind, int edge_count, double gamma, double delta,
               double noise_halfwidth, TollVector static_base, std::uint64_t noise_seed)
    : kind_(kind),
      tolls_(TollVector::zeros(edge_count)),
      gamma_(gamma),
      delta_(delta),
      noise_halfwidth_(noise_halfwidth),
      static_base_(std::move(static_base)),
      noise_rng_(noise_seed) {
    if (kind_ == PolicyKind::StaticPopulationMean || kind_ == PolicyKind::StaticGroupMean) {
        if (static_base_.size() != edge_count)
            throw std::invalid_argument("static policy needs base tolls");
    }
}

const TollVector& Toller::begin_period(std::int64_t t) {
    period_ = t;
    if (kind_ == PolicyKind::StaticPopulationMean || kind_ == PolicyKind::StaticGroupMean)
        tolls_ = static_tolls(static_base_, noise_halfwidth_, noise_rng_, t);
    return tolls_;
}

void Toller::observe(std::span<const double> capacities, std::span<const double> observed_flows) {
    switch (kind_) {
        case PolicyKind::OnlineGradient:
            tolls_ = gradient_update(tolls_, capacities, observed_flows, gamma_);
            break;
        case PolicyKind::Reactive:
            tolls_ = reactive_update(tolls_, capacities, observed_flows, delta_);
            break;
        case PolicyKind::StaticPopulationMean:
        case PolicyKind::StaticGroupMean:
            break; // stateless between periods
    }
}

} // namespace tollsim
