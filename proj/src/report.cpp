#include "tollsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace tollsim {

namespace fs = std::filesystem;

std::string fmt_money(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    return buf;
}

std::vector<RunResult> execute_runs(const Scenario& scenario, std::int64_t horizon) {
    const ScenarioConfig& cfg = scenario.config;
    const int seeds = cfg.seed_count;
    std::vector<std::vector<RunTrace>> per_seed(seeds);

    // One worker per seed batch; traces are collected by index so the
    // result order never depends on scheduling.
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(seeds));
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    auto work = [&] {
        for (int s = next.fetch_add(1); s < seeds; s = next.fetch_add(1))
            per_seed[s] = run_policies(scenario, cfg.policies,
                                       cfg.base_seed + static_cast<std::uint64_t>(s), horizon);
    };
    for (unsigned w = 0; w + 1 < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    std::vector<RunResult> results;
    results.reserve(static_cast<std::size_t>(seeds) * cfg.policies.size());
    for (std::size_t p = 0; p < cfg.policies.size(); ++p) {
        for (int s = 0; s < seeds; ++s) {
            RunResult r;
            r.policy = cfg.policies[p];
            r.seed = cfg.base_seed + static_cast<std::uint64_t>(s);
            r.trace = std::move(per_seed[s][p]);
            r.metrics = normalized_metrics(r.trace, scenario.min_travel_time);
            results.push_back(std::move(r));
        }
    }
    return results;
}

namespace {

void write_trace_csv(const fs::path& file, const RunTrace& trace) {
    std::ofstream out(file);
    out << "period,system_cost,oracle_cost,oracle_ok,travel_time,toll_revenue,"
           "outside_users,toll_sum,toll_max,max_excess\n";
    for (std::int64_t t = 0; t < trace.horizon; ++t) {
        double toll_sum = 0.0, toll_max = 0.0, max_excess = 0.0;
        for (std::size_t e = 0; e < trace.capacities.size(); ++e) {
            toll_sum += trace.tolls[t][e];
            toll_max = std::max(toll_max, trace.tolls[t][e]);
            max_excess = std::max(max_excess, trace.flows[t][e] - trace.capacities[e]);
        }
        out << (t + 1) << ',' << fmt_money(trace.system_cost[t]) << ','
            << fmt_money(trace.oracle_cost[t]) << ',' << int(trace.oracle_ok[t]) << ','
            << fmt_money(trace.travel_time[t]) << ',' << fmt_money(trace.toll_revenue[t]) << ','
            << trace.outside_users[t] << ',' << fmt_money(toll_sum) << ',' << fmt_money(toll_max)
            << ',' << static_cast<long long>(std::llround(max_excess)) << '\n';
    }
}

void write_toll_csv(const fs::path& file, const RunTrace& trace) {
    std::ofstream out(file);
    out << "period,edge,toll\n";
    for (std::int64_t t = 0; t < trace.horizon; ++t)
        for (std::size_t e = 0; e < trace.tolls[t].size(); ++e)
            if (trace.tolls[t][e] > 0.0)
                out << (t + 1) << ',' << e << ',' << fmt_money(trace.tolls[t][e]) << '\n';
}

void write_final_tolls_csv(const fs::path& file, const RunTrace& trace) {
    std::ofstream out(file);
    out << "edge,toll\n";
    for (std::size_t e = 0; e < trace.final_tolls.size(); ++e)
        out << e << ',' << fmt_money(trace.final_tolls[e]) << '\n';
}

struct Stats {
    double mean = 0.0, stderr_ = 0.0;
};

Stats mean_stderr(const std::vector<double>& xs) {
    Stats st;
    if (xs.empty()) return st;
    for (double x : xs) st.mean += x;
    st.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - st.mean) * (x - st.mean);
        st.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1)) /
                     std::sqrt(static_cast<double>(xs.size()));
    }
    return st;
}

} // namespace

void write_output_bundle(const std::string& dir, const Scenario& scenario,
                         const std::vector<RunResult>& results) {
    const ScenarioConfig& cfg = scenario.config;
    fs::create_directories(dir);

    std::ofstream metrics_csv(fs::path(dir) / "metrics.csv");
    metrics_csv << "policy,seed,horizon,regret,violation_l2,violation_linf,"
                   "normalized_regret,normalized_violation,normalized_travel_time\n";

    for (const RunResult& r : results) {
        const fs::path run_dir =
            fs::path(dir) / to_string(r.policy) / ("seed_" + std::to_string(r.seed));
        fs::create_directories(run_dir);
        write_trace_csv(run_dir / "trace.csv", r.trace);
        if (cfg.toll_log == "sparse") write_toll_csv(run_dir / "tolls.csv", r.trace);
        if (cfg.toll_log != "none") write_final_tolls_csv(run_dir / "final_tolls.csv", r.trace);

        metrics_csv << to_string(r.policy) << ',' << r.seed << ',' << r.trace.horizon << ','
                    << fmt_money(r.metrics.regret) << ',' << fmt_money(r.metrics.violation.l2)
                    << ',' << fmt_money(r.metrics.violation.linf) << ','
                    << fmt_money(r.metrics.normalized_regret) << ','
                    << fmt_money(r.metrics.normalized_violation) << ','
                    << fmt_money(r.metrics.normalized_travel_time) << '\n';
    }

    std::ofstream summary(fs::path(dir) / "summary.csv");
    summary << "policy,metric,mean,stderr\n";
    for (PolicyKind policy : cfg.policies) {
        std::map<std::string, std::vector<double>> columns;
        for (const RunResult& r : results) {
            if (r.policy != policy) continue;
            columns["regret"].push_back(r.metrics.regret);
            columns["violation_linf"].push_back(r.metrics.violation.linf);
            columns["normalized_regret"].push_back(r.metrics.normalized_regret);
            columns["normalized_violation"].push_back(r.metrics.normalized_violation);
            columns["normalized_travel_time"].push_back(r.metrics.normalized_travel_time);
        }
        for (const auto& [metric, xs] : columns) {
            const Stats st = mean_stderr(xs);
            summary << to_string(policy) << ',' << metric << ',' << fmt_money(st.mean) << ','
                    << fmt_money(st.stderr_) << '\n';
        }
    }

    std::ofstream meta(fs::path(dir) / "metadata.txt");
    meta << "tollsim output bundle\n";
    meta << "scenario = " << to_string(cfg.kind) << "\n";
    meta << "horizon = " << cfg.horizon << "\n";
    meta << "seeds = " << cfg.seed_count << " (base " << cfg.base_seed << ")\n";
    meta << "policies =";
    for (PolicyKind p : cfg.policies) meta << ' ' << to_string(p);
    meta << "\n";
    meta << "gamma = " << (cfg.gamma > 0 ? std::to_string(cfg.gamma) : std::string("auto"))
         << ", delta = " << cfg.delta << ", noise = " << cfg.noise_halfwidth << "\n";
    meta << "demand_scale = " << cfg.demand_scale << ", demand_divisor = " << cfg.demand_divisor
         << ", capacity_divisor = " << cfg.capacity_divisor << "\n";
    meta << "vot_spread = " << cfg.vot_spread << ", od_resample_prob = " << cfg.od_resample_prob
         << ", outside_factor = " << cfg.outside_factor << "\n";
    meta << "oracle_stride = " << cfg.oracle_stride << "\n";
    meta << "users_per_period = " << scenario.population.total_users() << "\n";
    meta << "min_travel_time = " << scenario.min_travel_time << "\n";
    for (const std::string& note : scenario.notes) meta << "note: " << note << "\n";
}

std::string summarize(const Scenario& scenario, const std::vector<RunResult>& results) {
    std::ostringstream out;
    out << "scenario " << to_string(scenario.config.kind) << ", T=" << scenario.config.horizon
        << ", users/period=" << scenario.population.total_users() << "\n";
    out << "policy              regret        viol_linf  norm_regret  norm_viol  norm_ttt\n";
    for (PolicyKind policy : scenario.config.policies) {
        std::vector<double> regret_s, viol, nreg, nviol, nttt;
        for (const RunResult& r : results) {
            if (r.policy != policy) continue;
            regret_s.push_back(r.metrics.regret);
            viol.push_back(r.metrics.violation.linf);
            nreg.push_back(r.metrics.normalized_regret);
            nviol.push_back(r.metrics.normalized_violation);
            nttt.push_back(r.metrics.normalized_travel_time);
        }
        char line[256];
        std::snprintf(line, sizeof line, "%-18s %12.4f %12.2f %12.5f %10.5f %9.4f\n",
                      to_string(policy), mean_stderr(regret_s).mean, mean_stderr(viol).mean,
                      mean_stderr(nreg).mean, mean_stderr(nviol).mean, mean_stderr(nttt).mean);
        out << line;
    }
    return out.str();
}

SweepOutcome run_sweep(const Scenario& scenario, const std::vector<std::int64_t>& horizons) {
    if (horizons.size() < 3) throw std::invalid_argument("sweep needs at least 3 horizons");
    SweepOutcome outcome;
    const ScenarioConfig& cfg = scenario.config;

    for (PolicyKind policy : cfg.policies) {
        std::vector<std::pair<double, double>> viol_points, regret_points;
        bool regret_fittable = true;
        for (std::int64_t T : horizons) {
            Scenario local = scenario; // gamma is 1/sqrt(T) per horizon unless fixed
            local.config.policies = {policy};
            const std::vector<RunResult> runs = execute_runs(local, T);
            std::vector<double> viol, reg;
            for (const RunResult& r : runs) {
                viol.push_back(r.metrics.violation.linf);
                reg.push_back(r.metrics.regret);
            }
            SweepRow row;
            row.policy = policy;
            row.horizon = T;
            row.mean_violation_linf = mean_stderr(viol).mean;
            row.mean_regret = mean_stderr(reg).mean;
            std::vector<double> abs_reg;
            for (double x : reg) abs_reg.push_back(std::abs(x));
            row.mean_abs_regret = mean_stderr(abs_reg).mean;
            outcome.rows.push_back(row);

            if (row.mean_violation_linf > 0.0)
                viol_points.emplace_back(static_cast<double>(T), row.mean_violation_linf);
            if (row.mean_abs_regret > 0.0)
                regret_points.emplace_back(static_cast<double>(T), row.mean_abs_regret);
            else
                regret_fittable = false;
        }
        if (viol_points.size() >= 3)
            outcome.fits.push_back({policy, "violation_linf", loglog_slope(viol_points)});
        if (regret_fittable && regret_points.size() >= 3)
            outcome.fits.push_back({policy, "abs_regret", loglog_slope(regret_points)});
    }
    return outcome;
}

void write_sweep_outputs(const std::string& dir, const Scenario& scenario,
                         const SweepOutcome& outcome) {
    fs::create_directories(dir);
    std::ofstream values(fs::path(dir) / "sweep_values.csv");
    values << "policy,horizon,mean_violation_linf,mean_regret,mean_abs_regret\n";
    for (const SweepRow& row : outcome.rows)
        values << to_string(row.policy) << ',' << row.horizon << ','
               << fmt_money(row.mean_violation_linf) << ',' << fmt_money(row.mean_regret) << ','
               << fmt_money(row.mean_abs_regret) << '\n';

    std::ofstream slopes(fs::path(dir) / "slopes.csv");
    slopes << "policy,metric,slope,rmse,points\n";
    for (const auto& fit : outcome.fits) {
        std::size_t points = 0;
        for (const SweepRow& row : outcome.rows)
            if (row.policy == fit.policy) ++points;
        slopes << to_string(fit.policy) << ',' << fit.metric << ',' << fmt_money(fit.fit.slope)
               << ',' << fmt_money(fit.fit.rmse) << ',' << points << '\n';
    }

    std::ofstream meta(fs::path(dir) / "metadata.txt");
    meta << "tollsim sweep bundle\n";
    meta << "scenario = " << to_string(scenario.config.kind) << "\n";
    meta << "seeds = " << scenario.config.seed_count << " (base " << scenario.config.base_seed
         << ")\n";
}

std::string summarize_sweep(const SweepOutcome& outcome) {
    std::ostringstream out;
    out << "policy              horizon  mean_viol_linf  mean_regret\n";
    for (const SweepRow& row : outcome.rows) {
        char line[192];
        std::snprintf(line, sizeof line, "%-18s %8lld %15.3f %12.3f\n", to_string(row.policy),
                      static_cast<long long>(row.horizon), row.mean_violation_linf,
                      row.mean_regret);
        out << line;
    }
    for (const auto& fit : outcome.fits) {
        char line[192];
        std::snprintf(line, sizeof line, "fit %-14s %-15s slope=%.3f rmse=%.3f\n",
                      to_string(fit.policy), fit.metric.c_str(), fit.fit.slope, fit.fit.rmse);
        out << line;
    }
    return out.str();
}

} // namespace tollsim
