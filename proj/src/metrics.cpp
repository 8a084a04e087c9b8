#include "tollsim/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace tollsim {

bool RunTrace::complete() const {
    const auto t = static_cast<std::size_t>(horizon);
    return system_cost.size() == t && oracle_cost.size() == t && flows.size() == t &&
           tolls.size() == t && travel_time.size() == t && oracle_ok.size() == t;
}

double regret(const RunTrace& trace) {
    if (!trace.complete()) throw std::invalid_argument("incomplete trace");
    double sum = 0.0;
    for (std::int64_t t = 0; t < trace.horizon; ++t)
        sum += trace.system_cost[t] - trace.oracle_cost[t];
    return sum;
}

ViolationReport violation(const RunTrace& trace) {
    if (!trace.complete()) throw std::invalid_argument("incomplete trace");
    const int n_edges = static_cast<int>(trace.capacities.size());
    std::vector<double> cumulative(n_edges, 0.0);
    for (std::int64_t t = 0; t < trace.horizon; ++t)
        for (int e = 0; e < n_edges; ++e)
            cumulative[e] += trace.flows[t][e] - trace.capacities[e];

    ViolationReport report;
    report.vector_part.resize(n_edges);
    double sq = 0.0;
    for (int e = 0; e < n_edges; ++e) {
        const double v = std::max(0.0, cumulative[e]);
        report.vector_part[e] = v;
        sq += v * v;
        if (v > report.linf) {
            report.linf = v;
            report.argmax_edge = e;
        }
    }
    report.l2 = std::sqrt(sq);
    return report;
}

MetricReport normalized_metrics(const RunTrace& trace, double min_travel_time) {
    if (!trace.complete()) throw std::invalid_argument("incomplete trace");
    MetricReport report;
    report.regret = regret(trace);
    report.violation = violation(trace);

    double oracle_total = 0.0, ttt = 0.0;
    for (std::int64_t t = 0; t < trace.horizon; ++t) {
        oracle_total += trace.oracle_cost[t];
        ttt += trace.travel_time[t];
    }
    if (oracle_total <= 0.0) throw std::invalid_argument("oracle total system cost must be > 0");
    if (min_travel_time <= 0.0) throw std::invalid_argument("minimum travel time must be > 0");

    report.normalized_regret = report.regret / oracle_total;
    // L-infinity numerator over T times the capacity of the edge at which
    // the max is attained (per-edge utilization excess).
    if (report.violation.argmax_edge >= 0) {
        const double cap = trace.capacities[report.violation.argmax_edge];
        report.normalized_violation =
            report.violation.linf / (static_cast<double>(trace.horizon) * cap);
    }
    report.mean_travel_time = ttt / static_cast<double>(trace.horizon);
    report.normalized_travel_time = report.mean_travel_time / min_travel_time;
    return report;
}

SlopeFit loglog_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("need at least 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [t, value] : points) {
        if (value <= 0.0 || t <= 0.0)
            throw std::invalid_argument("log-log fit needs positive values");
        const double x = std::log(t), y = std::log(value);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(points.size());
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("degenerate abscissae");
    SlopeFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (const auto& [t, value] : points) {
        const double r = std::log(value) - (intercept + fit.slope * std::log(t));
        ss += r * r;
    }
    fit.rmse = std::sqrt(ss / n);
    return fit;
}

} // namespace tollsim
