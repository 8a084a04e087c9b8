#include "tollsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tollsim/vcg.hpp"

namespace tollsim {

double ScenarioConfig::effective_gamma(std::int64_t T) const {
    return gamma > 0.0 ? gamma : recommended_step(T);
}

const char* to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::SiouxFalls: return "sioux_falls";
        case ScenarioKind::LowerBound: return "lower_bound";
        case ScenarioKind::ParallelSynth: return "parallel";
        case ScenarioKind::Counterexample: return "counterexample";
    }
    return "?";
}

const char* to_string(PolicyKind policy) {
    switch (policy) {
        case PolicyKind::OnlineGradient: return "online";
        case PolicyKind::Reactive: return "reactive";
        case PolicyKind::StaticPopulationMean: return "static_population";
        case PolicyKind::StaticGroupMean: return "static_group";
    }
    return "?";
}

namespace {

PolicyKind parse_policy(const std::string& name) {
    if (name == "online") return PolicyKind::OnlineGradient;
    if (name == "reactive") return PolicyKind::Reactive;
    if (name == "static_population") return PolicyKind::StaticPopulationMean;
    if (name == "static_group") return PolicyKind::StaticGroupMean;
    throw std::invalid_argument("unknown policy '" + name + "'");
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

ScenarioConfig parse_scenario_config(const std::string& text) {
    ScenarioConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto fail = [&line_no](const std::string& what) {
        throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) fail("empty value for '" + key + "'");
        try {
            if (key == "scenario") {
                if (value == "sioux_falls") cfg.kind = ScenarioKind::SiouxFalls;
                else if (value == "lower_bound") cfg.kind = ScenarioKind::LowerBound;
                else if (value == "parallel") cfg.kind = ScenarioKind::ParallelSynth;
                else if (value == "counterexample") cfg.kind = ScenarioKind::Counterexample;
                else fail("unknown scenario '" + value + "'");
            } else if (key == "network") cfg.network_file = value;
            else if (key == "trips") cfg.trips_file = value;
            else if (key == "horizon") cfg.horizon = std::stoll(value);
            else if (key == "seeds") cfg.seed_count = std::stoi(value);
            else if (key == "seed") cfg.base_seed = std::stoull(value);
            else if (key == "policies") {
                cfg.policies.clear();
                std::istringstream list(value);
                std::string name;
                while (std::getline(list, name, ','))
                    cfg.policies.push_back(parse_policy(trim(name)));
            } else if (key == "gamma") cfg.gamma = value == "auto" ? 0.0 : std::stod(value);
            else if (key == "delta") cfg.delta = std::stod(value);
            else if (key == "noise") cfg.noise_halfwidth = std::stod(value);
            else if (key == "demand_scale") cfg.demand_scale = std::stod(value);
            else if (key == "demand_divisor") cfg.demand_divisor = std::stod(value);
            else if (key == "capacity_divisor") cfg.capacity_divisor = std::stod(value);
            else if (key == "vot_spread") cfg.vot_spread = std::stod(value);
            else if (key == "od_resample_prob") cfg.od_resample_prob = std::stod(value);
            else if (key == "outside_factor") cfg.outside_factor = std::stod(value);
            else if (key == "min_vot") cfg.min_vot = std::stod(value);
            else if (key == "max_vot") cfg.max_vot = std::stod(value);
            else if (key == "oracle_stride") cfg.oracle_stride = std::stoi(value);
            else if (key == "parallel_edges") cfg.parallel_edges = std::stoi(value);
            else if (key == "parallel_users") cfg.parallel_users = std::stoi(value);
            else if (key == "toll_log") {
                if (value != "sparse" && value != "final" && value != "none")
                    fail("toll_log must be sparse, final, or none");
                cfg.toll_log = value;
            } else fail("unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception&) {
            fail("malformed value '" + value + "' for '" + key + "'");
        }
    }
    if (cfg.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (cfg.seed_count < 1) throw std::invalid_argument("seeds must be >= 1");
    if (cfg.demand_scale <= 0.0) throw std::invalid_argument("demand_scale must be > 0");
    if (cfg.demand_divisor <= 0.0 || cfg.capacity_divisor <= 0.0)
        throw std::invalid_argument("divisors must be > 0");
    if (cfg.oracle_stride < 1) throw std::invalid_argument("oracle_stride must be >= 1");
    return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    ScenarioConfig cfg = parse_scenario_config(buf.str());

    const auto resolve = [&path](const std::string& name) -> std::string {
        if (name.empty()) return name;
        namespace fs = std::filesystem;
        fs::path p(name);
        if (p.is_absolute() && fs::exists(p)) return p.string();
        const fs::path beside = fs::path(path).parent_path() / p;
        if (fs::exists(beside)) return beside.string();
        if (const char* data_dir = std::getenv("TOLLSIM_DATA_DIR")) {
            const fs::path in_data = fs::path(data_dir) / p;
            if (fs::exists(in_data)) return in_data.string();
        }
        return name; // let the loader report the failure
    };
    cfg.network_file = resolve(cfg.network_file);
    cfg.trips_file = resolve(cfg.trips_file);
    return cfg;
}

namespace {

// Mean-VoT variant of the population: one LP user per group member at the
// chosen value of time. Used for static benchmark tolls, calibration, and
// the minimum-travel-time reference.
std::vector<LpUser> mean_instance_users(const PopulationModel& pop, bool population_mean,
                                        double vot_override = -1.0) {
    double pop_mean = 0.0;
    int total = 0;
    for (const UserGroup& g : pop.groups()) {
        pop_mean += g.mean_vot * g.demand;
        total += g.demand;
    }
    pop_mean /= std::max(1, total);

    std::vector<LpUser> users;
    users.reserve(total);
    for (const UserGroup& g : pop.groups()) {
        LpUser u;
        u.origin = g.origin;
        u.destination = g.destination;
        u.value_of_time = vot_override > 0.0 ? vot_override
                          : population_mean  ? pop_mean
                                             : g.mean_vot;
        u.outside_cost = g.outside_cost;
        for (int i = 0; i < g.demand; ++i) users.push_back(u);
    }
    return users;
}

// Calibration and benchmark solves shared by the scenario builders.
void finalize_scenario(Scenario& s) {
    const ScenarioConfig& cfg = s.config;

    if (!s.population.calibrated()) {
        // Outside costs depend on the optimal tolls, which need an LP on
        // the mean instance; that LP uses surrogate outside costs large
        // enough never to bind when the instance is routable.
        std::vector<double> latencies = s.net.latencies();
        double surrogate = 0.0;
        for (UserGroup& g : s.population.groups()) {
            const auto sp = shortest_path(s.net, g.origin, g.destination, latencies);
            if (!sp)
                throw std::runtime_error("group default O-D pair unreachable");
            surrogate = std::max(surrogate, 50.0 * g.mean_vot * std::max(sp->cost, 1e-6));
        }
        std::vector<UserGroup>& groups = s.population.groups();
        std::vector<double> saved;
        for (UserGroup& g : groups) {
            saved.push_back(g.outside_cost);
            g.outside_cost = surrogate;
        }
        LpInstance calib{&s.net, mean_instance_users(s.population, false), s.capacities};
        const LpSolution pre = solve_lp(calib);
        double outside_share = 0.0;
        for (const auto& u : pre.users) outside_share += u.outside_flow;
        if (outside_share > 1e-6)
            s.notes.push_back("calibration: " + std::to_string(outside_share) +
                              " users at the surrogate outside option; capacities are tight");
        for (std::size_t i = 0; i < groups.size(); ++i) groups[i].outside_cost = saved[i];
        calibrate_outside_option(s.population, s.net, pre.tolls, cfg.outside_factor);
    }

    LpInstance group_mean{&s.net, mean_instance_users(s.population, false), s.capacities};
    s.static_group_tolls = TollVector(solve_lp(group_mean).tolls);
    LpInstance pop_mean{&s.net, mean_instance_users(s.population, true), s.capacities};
    s.static_population_tolls = TollVector(solve_lp(pop_mean).tolls);

    LpInstance unit_vot{&s.net, mean_instance_users(s.population, false, 1.0), s.capacities};
    const LpSolution ttt = solve_lp(unit_vot);
    s.min_travel_time = ttt.routed_travel_time;
}

} // namespace

Scenario build_sioux_falls(const ScenarioConfig& cfg, const TntpData& data) {
    Scenario s;
    s.config = cfg;
    s.net = data.network;
    s.capacities = s.net.capacities();
    // Scaled capacities are rounded to whole vehicle slots; fractional
    // slots cannot clear against atomic users and would accrue sub-unit
    // violations every period.
    for (double& c : s.capacities)
        c = std::max(1.0, std::floor(c / cfg.capacity_divisor + 0.5));

    std::vector<UserGroup> groups;
    std::vector<std::pair<int, int>> universe;
    long dropped = 0;
    for (const auto& [od, demand] : data.base_demand) {
        universe.push_back(od);
        const double scaled = cfg.demand_scale * demand / cfg.demand_divisor;
        const int users = static_cast<int>(std::floor(scaled + 0.5)); // round half up
        if (users < 1) {
            ++dropped;
            continue;
        }
        UserGroup g;
        g.id = static_cast<int>(groups.size());
        g.origin = od.first;
        g.destination = od.second;
        g.demand = users;
        g.vot_spread = cfg.vot_spread;
        g.od_resample_prob = cfg.od_resample_prob;
        groups.push_back(g);
    }
    if (groups.empty()) throw std::runtime_error("demand scaling left no users");
    s.notes.push_back("demand rounding half-up; O-D pairs dropped at zero users: " +
                      std::to_string(dropped));

    s.population = PopulationModel(std::move(groups), std::move(universe), cfg.base_seed);
    sample_mean_vots(s.population, cfg.min_vot, cfg.max_vot);
    finalize_scenario(s);
    return s;
}

Scenario build_lower_bound(const ScenarioConfig& cfg) {
    Scenario s;
    s.config = cfg;
    s.net = Network(2);
    s.net.add_edge(0, 1, 1.0, 1.0);
    s.capacities = s.net.capacities();
    PopulationModel::TypeMixture mixture; // type I: v=1, outside 2; type II: v=0, outside 0
    s.population = PopulationModel::period_type_mixture(0, 1, 2, mixture, cfg.base_seed);
    finalize_scenario(s);
    return s;
}

Scenario build_parallel_synth(const ScenarioConfig& cfg) {
    if (cfg.parallel_edges < 1 || cfg.parallel_users < 1)
        throw std::invalid_argument("parallel scenario needs edges and users");
    Scenario s;
    s.config = cfg;
    s.net = Network(2);
    const CounterRng rng(cfg.base_seed);
    std::vector<double> latencies(cfg.parallel_edges);
    for (int e = 0; e < cfg.parallel_edges; ++e)
        latencies[e] = rng.uniform(0.05, 0.3, CounterRng::kInstanceGen, 1, e);
    std::sort(latencies.begin(), latencies.end());
    const int per_edge = std::max(1, cfg.parallel_users / cfg.parallel_edges);
    for (int e = 0; e < cfg.parallel_edges; ++e) {
        const double cap = static_cast<double>(
            1 + static_cast<int>(rng.below(2 * per_edge, CounterRng::kInstanceGen, 2, e)));
        s.net.add_edge(0, 1, latencies[e], cap);
    }
    s.capacities = s.net.capacities();

    std::vector<UserGroup> groups;
    int remaining = cfg.parallel_users;
    int gid = 0;
    while (remaining > 0) {
        UserGroup g;
        g.id = gid++;
        g.origin = 0;
        g.destination = 1;
        g.demand = std::min(remaining, 4);
        g.vot_spread = cfg.vot_spread;
        groups.push_back(g);
        remaining -= g.demand;
    }
    s.population = PopulationModel(std::move(groups), {{0, 1}}, cfg.base_seed);
    sample_mean_vots(s.population, cfg.min_vot, cfg.max_vot);
    finalize_scenario(s);
    return s;
}

Scenario build_counterexample_scenario(const ScenarioConfig& cfg) {
    Scenario s;
    s.config = cfg;
    const auto fx = make_counterexample();
    s.net = fx.network;
    s.capacities = s.net.capacities();
    std::vector<UserGroup> groups(2);
    for (int i = 0; i < 2; ++i) {
        groups[i].id = i;
        groups[i].origin = fx.users[i].origin;
        groups[i].destination = fx.users[i].destination;
        groups[i].demand = 1;
        groups[i].mean_vot = fx.users[i].value_of_time;
        groups[i].vot_spread = 0.0;
    }
    s.population = PopulationModel(std::move(groups), {{0, 5}}, cfg.base_seed);
    finalize_scenario(s);
    return s;
}

Scenario build_scenario(const ScenarioConfig& cfg) {
    switch (cfg.kind) {
        case ScenarioKind::SiouxFalls: {
            if (cfg.network_file.empty() || cfg.trips_file.empty())
                throw std::invalid_argument("sioux_falls scenario needs network and trips files");
            return build_sioux_falls(cfg, load_tntp_files(cfg.network_file, cfg.trips_file));
        }
        case ScenarioKind::LowerBound: return build_lower_bound(cfg);
        case ScenarioKind::ParallelSynth: return build_parallel_synth(cfg);
        case ScenarioKind::Counterexample: return build_counterexample_scenario(cfg);
    }
    throw std::logic_error("unknown scenario kind");
}

namespace {

PopulationModel with_seed(const PopulationModel& base, std::uint64_t seed) {
    PopulationModel copy = base;
    if (copy.seed() == seed) return copy;
    // Rebuild preserving groups/universe; mean VoTs stay as calibrated.
    if (base.kind() == PopulationModel::Kind::PeriodTypeMixture) {
        const UserGroup& g = base.groups().front();
        PopulationModel::TypeMixture mixture;
        mixture.vot_a = g.mean_vot;
        mixture.outside_a = g.outside_cost;
        return PopulationModel::period_type_mixture(g.origin, g.destination, g.demand, mixture,
                                                    seed);
    }
    return PopulationModel(base.groups(), base.od_universe(), seed);
}

Toller make_toller(const Scenario& s, PolicyKind policy, std::int64_t T, std::uint64_t seed) {
    const ScenarioConfig& cfg = s.config;
    TollVector base;
    if (policy == PolicyKind::StaticPopulationMean) base = s.static_population_tolls;
    if (policy == PolicyKind::StaticGroupMean) base = s.static_group_tolls;
    return Toller(policy, s.net.edge_count(), cfg.effective_gamma(T), cfg.delta,
                  cfg.noise_halfwidth, std::move(base), seed ^ 0x5DEECE66DULL);
}

} // namespace

std::vector<RunTrace> run_policies(const Scenario& scenario, std::span<const PolicyKind> policies,
                                   std::uint64_t seed, std::int64_t horizon) {
    const ScenarioConfig& cfg = scenario.config;
    const std::int64_t T = horizon > 0 ? horizon : cfg.horizon;
    const PopulationModel population = with_seed(scenario.population, seed);
    const Network& net = scenario.net;

    std::vector<Toller> tollers;
    std::vector<RunTrace> traces(policies.size());
    for (std::size_t p = 0; p < policies.size(); ++p) {
        tollers.push_back(make_toller(scenario, policies[p], T, seed));
        RunTrace& trace = traces[p];
        trace.horizon = T;
        trace.capacities = scenario.capacities;
        trace.system_cost.reserve(T);
        trace.flows.reserve(T);
    }

    std::vector<double> flow_buf(net.edge_count());
    std::vector<std::int64_t> solved_at;
    for (std::int64_t t = 1; t <= T; ++t) {
        const std::vector<UserDraw> draws = population.sample_period(t);

        double oracle_cost = 0.0;
        bool oracle_ok = false;
        const bool solve_now = ((t - 1) % cfg.oracle_stride) == 0;
        if (solve_now) {
            LpInstance inst;
            inst.net = &net;
            inst.capacities = scenario.capacities;
            inst.users.reserve(draws.size());
            for (const UserDraw& d : draws)
                inst.users.push_back(LpUser{d.origin, d.destination, d.value_of_time,
                                            d.outside_cost});
            const LpSolution sol = solve_lp(inst);
            oracle_cost = sol.objective;
            oracle_ok = sol.status == LpStatus::Optimal;
            solved_at.push_back(t);
        }

        for (std::size_t p = 0; p < policies.size(); ++p) {
            Toller& toller = tollers[p];
            RunTrace& trace = traces[p];
            const TollVector tolls = toller.begin_period(t); // copy: observe() mutates state
            const AssignmentRecord rec = compute_equilibrium(net, draws, tolls);
            for (int e = 0; e < net.edge_count(); ++e)
                flow_buf[e] = static_cast<double>(rec.edge_flows[e]);
            toller.observe(scenario.capacities, flow_buf);

            trace.system_cost.push_back(rec.system_cost);
            trace.oracle_cost.push_back(solve_now ? oracle_cost : 0.0);
            trace.oracle_ok.push_back(solve_now && oracle_ok);
            trace.flows.push_back(rec.edge_flows);
            trace.tolls.push_back(tolls.values());
            trace.travel_time.push_back(rec.total_travel_time);
            trace.toll_revenue.push_back(rec.toll_revenue);
            trace.outside_users.push_back(rec.outside_count);
        }
    }

    // Fill skipped oracle periods by linear interpolation between solves.
    if (cfg.oracle_stride > 1 && !solved_at.empty()) {
        for (RunTrace& trace : traces) {
            for (std::size_t k = 0; k + 1 < solved_at.size(); ++k) {
                const std::int64_t a = solved_at[k], b = solved_at[k + 1];
                for (std::int64_t t = a + 1; t < b; ++t) {
                    const double w = static_cast<double>(t - a) / static_cast<double>(b - a);
                    trace.oracle_cost[t - 1] =
                        (1.0 - w) * trace.oracle_cost[a - 1] + w * trace.oracle_cost[b - 1];
                }
            }
            for (std::int64_t t = solved_at.back() + 1; t <= T; ++t)
                trace.oracle_cost[t - 1] = trace.oracle_cost[solved_at.back() - 1];
        }
    }

    for (std::size_t p = 0; p < policies.size(); ++p)
        traces[p].final_tolls = tollers[p].tolls().values();
    return traces;
}

RunTrace run_experiment(const Scenario& scenario, PolicyKind policy, std::uint64_t seed,
                        std::int64_t horizon) {
    const PolicyKind single[] = {policy};
    return std::move(run_policies(scenario, single, seed, horizon).front());
}

double lower_bound_regret_gap(std::int64_t horizon, int samples, std::uint64_t base_seed) {
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    // Two type-I users arrive per heads period; the clairvoyant oracle
    // routes one per period, so the excess beyond T pays the outside cost.
    double total = 0.0;
    for (int s = 0; s < samples; ++s) {
        const CounterRng rng(base_seed + static_cast<std::uint64_t>(s));
        std::int64_t type_one = 0;
        for (std::int64_t t = 1; t <= horizon; ++t)
            if (rng.bernoulli(0.5, CounterRng::kPeriodType, t)) type_one += 2;
        const double excess = static_cast<double>(type_one - horizon);
        total += excess > 0.0 ? 2.0 * excess : 0.0;
    }
    return total / static_cast<double>(samples);
}

} // namespace tollsim
