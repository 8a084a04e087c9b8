#include "tollsim/population.hpp"

#include <stdexcept>

namespace tollsim {

PopulationModel::PopulationModel(std::vector<UserGroup> groups,
                                 std::vector<std::pair<int, int>> od_universe,
                                 std::uint64_t seed)
    : groups_(std::move(groups)), od_universe_(std::move(od_universe)), seed_(seed) {
    for (const UserGroup& g : groups_) {
        if (g.demand < 1) throw std::invalid_argument("group demand must be >= 1");
        if (g.vot_spread < 0.0 || g.vot_spread >= 1.0)
            throw std::invalid_argument("vot spread must be in [0, 1)");
        if (g.od_resample_prob < 0.0 || g.od_resample_prob > 1.0)
            throw std::invalid_argument("od resample probability must be in [0, 1]");
    }
}

PopulationModel PopulationModel::period_type_mixture(int origin, int destination, int users,
                                                     TypeMixture mixture,
                                                     std::uint64_t seed) {
    UserGroup g;
    g.id = 0;
    g.origin = origin;
    g.destination = destination;
    g.demand = users;
    g.mean_vot = mixture.vot_a;
    g.vot_spread = 0.0;
    g.outside_cost = mixture.outside_a;
    PopulationModel model({g}, {{origin, destination}}, seed);
    model.kind_ = Kind::PeriodTypeMixture;
    model.mixture_ = mixture;
    return model;
}

int PopulationModel::total_users() const {
    int total = 0;
    for (const UserGroup& g : groups_) total += g.demand;
    return total;
}

bool PopulationModel::calibrated() const {
    for (const UserGroup& g : groups_)
        if (g.outside_cost < 0.0) return false;
    return true;
}

std::vector<UserDraw> PopulationModel::sample_period(std::int64_t t) const {
    if (!calibrated())
        throw std::logic_error("population not calibrated: outside costs unset");
    const CounterRng rng(seed_);
    std::vector<UserDraw> draws;
    draws.reserve(total_users());

    if (kind_ == Kind::PeriodTypeMixture) {
        const bool type_a = rng.bernoulli(mixture_.prob_a, CounterRng::kPeriodType, t);
        for (const UserGroup& g : groups_) {
            for (int i = 0; i < g.demand; ++i) {
                UserDraw d;
                d.group = g.id;
                d.origin = g.origin;
                d.destination = g.destination;
                d.value_of_time = type_a ? mixture_.vot_a : mixture_.vot_b;
                d.outside_cost = type_a ? mixture_.outside_a : mixture_.outside_b;
                draws.push_back(d);
            }
        }
        return draws;
    }

    std::uint64_t user_index = 0;
    for (const UserGroup& g : groups_) {
        const double lo = (1.0 - g.vot_spread) * g.mean_vot;
        const double hi = (1.0 + g.vot_spread) * g.mean_vot;
        // One value-of-time draw per group and period, shared by all of
        // the group's users; O-D resampling stays per user.
        const double group_vot =
            rng.uniform(lo, hi, CounterRng::kValueOfTime, t, static_cast<std::uint64_t>(g.id));
        for (int i = 0; i < g.demand; ++i, ++user_index) {
            UserDraw d;
            d.group = g.id;
            d.origin = g.origin;
            d.destination = g.destination;
            d.value_of_time = group_vot;
            d.outside_cost = g.outside_cost;
            if (g.od_resample_prob > 0.0 &&
                rng.bernoulli(g.od_resample_prob, CounterRng::kOdResample, t, user_index)) {
                const auto& od = od_universe_[rng.below(od_universe_.size(),
                                                        CounterRng::kOdPick, t, user_index)];
                d.origin = od.first;
                d.destination = od.second;
            }
            draws.push_back(d);
        }
    }
    return draws;
}

void sample_mean_vots(PopulationModel& model, double lo, double hi) {
    const CounterRng rng(model.seed());
    for (UserGroup& g : model.groups())
        g.mean_vot = rng.uniform(lo, hi, CounterRng::kMeanVot, static_cast<std::uint64_t>(g.id));
}

void calibrate_outside_option(PopulationModel& model, const Network& net,
                              std::span<const double> tolls, double factor) {
    std::vector<double> cost(net.edge_count());
    for (UserGroup& g : model.groups()) {
        for (const Edge& e : net.edges()) cost[e.id] = g.mean_vot * e.latency + tolls[e.id];
        const auto sp = shortest_path(net, g.origin, g.destination, cost);
        if (!sp)
            throw std::runtime_error("group " + std::to_string(g.id) +
                                     ": default O-D pair unreachable");
        g.outside_cost = factor * sp->cost;
    }
}

} // namespace tollsim
