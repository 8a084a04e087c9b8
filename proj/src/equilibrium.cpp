#include "tollsim/equilibrium.hpp"

#include <map>
#include <stdexcept>

namespace tollsim {

TollVector::TollVector(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_)
        if (v < 0.0) throw std::invalid_argument("tolls must be nonnegative");
}

namespace {

UserOutcome respond(const Network& net, const UserDraw& draw, const TollVector& tolls,
                    std::vector<double>& cost_buf) {
    cost_buf.resize(net.edge_count());
    for (const Edge& e : net.edges())
        cost_buf[e.id] = draw.value_of_time * e.latency + tolls[e.id];

    UserOutcome out;
    std::optional<PathResult> sp;
    if (draw.origin != draw.destination)
        sp = shortest_path(net, draw.origin, draw.destination, cost_buf);
    if (!sp) {
        out.traveled = false;
        out.cost = draw.outside_cost;
        return out;
    }
    // Tie with the outside option resolves to the path.
    if (sp->cost <= draw.outside_cost) {
        out.traveled = true;
        out.path = sp->path;
        out.cost = sp->cost;
    } else {
        out.traveled = false;
        out.cost = draw.outside_cost;
    }
    return out;
}

} // namespace

UserOutcome best_response(const Network& net, const UserDraw& draw, const TollVector& tolls) {
    if (tolls.size() != net.edge_count())
        throw std::invalid_argument("toll vector size mismatch");
    std::vector<double> buf;
    return respond(net, draw, tolls, buf);
}

AssignmentRecord compute_equilibrium(const Network& net, std::span<const UserDraw> draws,
                                     const TollVector& tolls,
                                     std::span<const TiePreference> tie_preference,
                                     double tie_eps) {
    if (tolls.size() != net.edge_count())
        throw std::invalid_argument("toll vector size mismatch");
    if (!tie_preference.empty() && tie_preference.size() != draws.size())
        throw std::invalid_argument("tie preference size mismatch");

    AssignmentRecord rec;
    rec.choices.resize(draws.size());
    rec.edge_flows.assign(net.edge_count(), 0);

    std::vector<double> cost_buf;
    // Identical (O-D, VoT) draws reuse one shortest-path result; the
    // outside comparison happens per user against their own cost.
    std::map<std::tuple<int, int, double>, std::optional<PathResult>> memo;

    for (std::size_t u = 0; u < draws.size(); ++u) {
        const UserDraw& d = draws[u];
        const auto key = std::make_tuple(d.origin, d.destination, d.value_of_time);
        auto hit = memo.find(key);
        if (hit == memo.end()) {
            std::optional<PathResult> sp;
            if (d.origin != d.destination) {
                cost_buf.resize(net.edge_count());
                for (const Edge& e : net.edges())
                    cost_buf[e.id] = d.value_of_time * e.latency + tolls[e.id];
                sp = shortest_path(net, d.origin, d.destination, cost_buf);
            }
            hit = memo.emplace(key, std::move(sp)).first;
        }

        UserOutcome out;
        if (hit->second && hit->second->cost <= d.outside_cost) {
            out.traveled = true;
            out.path = hit->second->path;
            out.cost = hit->second->cost;
        } else {
            out.traveled = false;
            out.cost = d.outside_cost;
        }

        if (!tie_preference.empty()) {
            const TiePreference& pref = tie_preference[u];
            if (pref.path.has_value()) {
                cost_buf.resize(net.edge_count());
                for (const Edge& e : net.edges())
                    cost_buf[e.id] = d.value_of_time * e.latency + tolls[e.id];
                const double pref_cost = pref.path->total_over(cost_buf);
                if (pref_cost <= out.cost + tie_eps) {
                    out.traveled = true;
                    out.path = *pref.path;
                    out.cost = pref_cost;
                }
            } else if (pref.outside && d.outside_cost <= out.cost + tie_eps) {
                out.traveled = false;
                out.path = Path{};
                out.cost = d.outside_cost;
            }
        }

        rec.min_cost_total += out.cost;
        if (out.traveled) {
            for (int e : out.path.edges) {
                rec.edge_flows[e] += 1;
                rec.toll_revenue += tolls[e];
            }
            const double latency = out.path.total_latency(net);
            rec.total_travel_time += latency;
            rec.system_cost += d.value_of_time * latency;
        } else {
            rec.system_cost += d.outside_cost;
            rec.outside_count += 1;
        }
        rec.choices[u] = std::move(out);
    }
    return rec;
}

} // namespace tollsim
