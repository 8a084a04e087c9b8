#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tollsim/network.hpp"
#include "tollsim/rng.hpp"

namespace tollsim {

struct UserGroup {
    int id = -1;
    int origin = -1;
    int destination = -1;
    int demand = 1;              // users per period
    double mean_vot = 0.0;       // $/hr
    double vot_spread = 0.2;     // fraction of mean
    double od_resample_prob = 0.0;
    double outside_cost = -1.0;  // dollars; set by calibrate_outside_option
};

struct UserDraw {
    int group = -1;
    int origin = -1;
    int destination = -1;
    double value_of_time = 0.0; // $/hr
    double outside_cost = 0.0;  // dollars
};

// Per-period i.i.d. generator for users' trip attributes. Immutable after
// calibration; draws for distinct periods are independent because every
// draw is keyed by (seed, period, user index).
class PopulationModel {
public:
    enum class Kind {
        GroupUniform,      // VoT uniform around each group mean
        PeriodTypeMixture, // whole period is type A or type B (one-edge lower-bound setup)
    };

    // Two-point mixture parameters used by the lower-bound construction.
    struct TypeMixture {
        double prob_a = 0.5;
        double vot_a = 1.0, outside_a = 2.0;
        double vot_b = 0.0, outside_b = 0.0;
    };

    PopulationModel(std::vector<UserGroup> groups,
                    std::vector<std::pair<int, int>> od_universe, std::uint64_t seed);

    static PopulationModel period_type_mixture(int origin, int destination, int users,
                                               TypeMixture mixture, std::uint64_t seed);

    const std::vector<UserGroup>& groups() const { return groups_; }
    std::vector<UserGroup>& groups() { return groups_; }
    const std::vector<std::pair<int, int>>& od_universe() const { return od_universe_; }
    std::uint64_t seed() const { return seed_; }
    Kind kind() const { return kind_; }

    int total_users() const;
    bool calibrated() const;

    // One UserDraw per user; reproducible given (seed, t).
    std::vector<UserDraw> sample_period(std::int64_t t) const;

private:
    Kind kind_ = Kind::GroupUniform;
    std::vector<UserGroup> groups_;
    std::vector<std::pair<int, int>> od_universe_;
    std::uint64_t seed_ = 0;
    TypeMixture mixture_;
};

// Draws each group's mean value of time uniformly from [lo, hi] $/hr.
void sample_mean_vots(PopulationModel& model, double lo = 5.0, double hi = 100.0);

// Sets each group's outside cost to factor times the cost, travel time
// plus tolls, of the group's cheapest default-pair path at the group mean
// value of time.
void calibrate_outside_option(PopulationModel& model, const Network& net,
                              std::span<const double> tolls, double factor);

} // namespace tollsim
