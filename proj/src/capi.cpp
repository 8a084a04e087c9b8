#include "tollsim.h"

#include <cstring>
#include <string>

#include "tollsim/network.hpp"
#include "tollsim/report.hpp"
#include "tollsim/scenario.hpp"
#include "tollsim/toller.hpp"
#include "tollsim/verify.hpp"

namespace {

thread_local std::string g_last_error;

tollsim_status fail(tollsim_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
tollsim_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const tollsim::ParseError& e) {
        return fail(TOLLSIM_ERR_PARSE, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(TOLLSIM_ERR_INVALID, e.what());
    } catch (const std::exception& e) {
        return fail(TOLLSIM_ERR_INTERNAL, e.what());
    }
}

} // namespace

struct tollsim_network {
    tollsim::TntpData data;
};

struct tollsim_scenario {
    tollsim::Scenario scenario;
};

extern "C" {

const char* tollsim_version(void) { return "0.1.0"; }

const char* tollsim_last_error(void) { return g_last_error.c_str(); }

void tollsim_string_free(char* s) { delete[] s; }

tollsim_status tollsim_network_load_tntp(const char* net_text, const char* trips_text,
                                         tollsim_network** out) {
    if (!net_text || !trips_text || !out)
        return fail(TOLLSIM_ERR_INVALID, "null argument");
    return guarded([&]() {
        auto* handle = new tollsim_network{tollsim::load_tntp(net_text, trips_text)};
        *out = handle;
        return TOLLSIM_OK;
    });
}

tollsim_status tollsim_network_load_tntp_files(const char* net_path, const char* trips_path,
                                               tollsim_network** out) {
    if (!net_path || !trips_path || !out)
        return fail(TOLLSIM_ERR_INVALID, "null argument");
    return guarded([&]() {
        auto* handle = new tollsim_network{tollsim::load_tntp_files(net_path, trips_path)};
        *out = handle;
        return TOLLSIM_OK;
    });
}

void tollsim_network_free(tollsim_network* net) { delete net; }

tollsim_status tollsim_network_counts(const tollsim_network* net, int32_t* nodes,
                                      int32_t* edges, int32_t* od_pairs) {
    if (!net) return fail(TOLLSIM_ERR_INVALID, "null network");
    if (nodes) *nodes = net->data.network.node_count();
    if (edges) *edges = net->data.network.edge_count();
    if (od_pairs) *od_pairs = static_cast<int32_t>(net->data.base_demand.size());
    return TOLLSIM_OK;
}

tollsim_status tollsim_network_shortest_path(const tollsim_network* net, int32_t origin,
                                             int32_t destination, const double* edge_costs,
                                             int32_t* path_buf, int32_t buf_len,
                                             int32_t* path_len, double* cost,
                                             int32_t* reachable) {
    if (!net || !path_len || !cost || !reachable)
        return fail(TOLLSIM_ERR_INVALID, "null argument");
    return guarded([&]() {
        const tollsim::Network& network = net->data.network;
        std::vector<double> costs;
        if (edge_costs)
            costs.assign(edge_costs, edge_costs + network.edge_count());
        else
            costs = network.latencies();
        const auto result = tollsim::shortest_path(network, origin, destination, costs);
        if (!result) {
            *reachable = 0;
            *path_len = 0;
            *cost = 0.0;
            return TOLLSIM_OK;
        }
        *reachable = 1;
        *cost = result->cost;
        const int32_t n = static_cast<int32_t>(result->path.edges.size());
        *path_len = n;
        if (path_buf && buf_len < n)
            return fail(TOLLSIM_ERR_INVALID, "path buffer too small");
        if (path_buf)
            for (int32_t i = 0; i < n; ++i) path_buf[i] = result->path.edges[i];
        return TOLLSIM_OK;
    });
}

tollsim_status tollsim_gradient_step(double* tolls, const double* capacities,
                                     const double* flows, int32_t n, double gamma) {
    if (!tolls || !capacities || !flows || n < 0)
        return fail(TOLLSIM_ERR_INVALID, "null argument");
    return guarded([&]() {
        std::vector<double> current(tolls, tolls + n);
        const tollsim::TollVector next = tollsim::gradient_update(
            tollsim::TollVector(std::move(current)), {capacities, static_cast<std::size_t>(n)},
            {flows, static_cast<std::size_t>(n)}, gamma);
        for (int32_t e = 0; e < n; ++e) tolls[e] = next[e];
        return TOLLSIM_OK;
    });
}

tollsim_status tollsim_scenario_load(const char* config_path, tollsim_scenario** out) {
    if (!config_path || !out) return fail(TOLLSIM_ERR_INVALID, "null argument");
    return guarded([&]() {
        const auto cfg = tollsim::load_scenario_config(config_path);
        auto* handle = new tollsim_scenario{tollsim::build_scenario(cfg)};
        *out = handle;
        return TOLLSIM_OK;
    });
}

void tollsim_scenario_free(tollsim_scenario* scenario) { delete scenario; }

tollsim_status tollsim_run(tollsim_scenario* scenario, const char* out_dir, char** summary) {
    if (!scenario || !out_dir) return fail(TOLLSIM_ERR_INVALID, "null argument");
    return guarded([&]() {
        const auto results = tollsim::execute_runs(scenario->scenario);
        tollsim::write_output_bundle(out_dir, scenario->scenario, results);
        if (summary) *summary = dup_string(tollsim::summarize(scenario->scenario, results));
        return TOLLSIM_OK;
    });
}

tollsim_status tollsim_sweep(tollsim_scenario* scenario, const int64_t* horizons,
                             int32_t horizon_count, const char* out_dir, char** summary) {
    if (!scenario || !out_dir || !horizons || horizon_count < 3)
        return fail(TOLLSIM_ERR_INVALID, "sweep needs at least 3 horizons");
    return guarded([&]() {
        const std::vector<std::int64_t> grid(horizons, horizons + horizon_count);
        const auto outcome = tollsim::run_sweep(scenario->scenario, grid);
        tollsim::write_sweep_outputs(out_dir, scenario->scenario, outcome);
        if (summary) *summary = dup_string(tollsim::summarize_sweep(outcome));
        return TOLLSIM_OK;
    });
}

tollsim_status tollsim_verify(int32_t fast, char** report) {
    return guarded([&]() {
        const auto checks = tollsim::run_verification(fast != 0);
        if (report) *report = dup_string(tollsim::render_checks(checks));
        if (!tollsim::all_pass(checks))
            return fail(TOLLSIM_ERR_CRITERIA, "verification checks failed");
        return TOLLSIM_OK;
    });
}

} // extern "C"
