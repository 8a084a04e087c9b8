#include "tollsim/lp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "tollsim/rng.hpp"

namespace tollsim {

bool LpSolution::integral(double tol) const {
    auto near01 = [tol](double f) { return f <= tol || f >= 1.0 - tol; };
    for (const LpUserSolution& u : users) {
        if (!near01(u.outside_flow)) return false;
        for (const auto& [path, flow] : u.path_flows)
            if (!near01(flow)) return false;
    }
    return true;
}

namespace {

struct Column {
    double cost = 0.0;
    int group = -1;      // convexity row; -1 for slack columns
    int slack_edge = -1; // capacity row; -1 for user columns
    bool outside = false;
    Path path; // valid for user path columns
};

// Dense revised simplex over the restricted master. Rows: one convexity
// row per merged user group, one capacity row per edge. The identity
// start basis (outside columns + slacks) is primal feasible.
class Master {
public:
    Master(int groups, std::span<const double> group_weights, std::span<const double> capacities)
        : n_groups_(groups), n_edges_(static_cast<int>(capacities.size())) {
        m_ = n_groups_ + n_edges_;
        rhs_.resize(m_);
        for (int g = 0; g < n_groups_; ++g) rhs_[g] = group_weights[g];
        for (int e = 0; e < n_edges_; ++e) rhs_[n_groups_ + e] = capacities[e];
        binv_.assign(m_ * m_, 0.0);
        for (int i = 0; i < m_; ++i) binv_[i * m_ + i] = 1.0;
        x_basic_ = rhs_;
        basis_.resize(m_);
    }

    int rows() const { return m_; }

    // Column constraint rows: convexity row (if any) then capacity rows.
    void column_rows(const Column& col, std::vector<int>& rows) const {
        rows.clear();
        if (col.group >= 0) rows.push_back(col.group);
        if (col.slack_edge >= 0) rows.push_back(n_groups_ + col.slack_edge);
        for (int e : col.path.edges) rows.push_back(n_groups_ + e);
    }

    void set_basis(std::vector<int> basis) { basis_ = std::move(basis); }
    const std::vector<int>& basis() const { return basis_; }
    const std::vector<double>& basic_values() const { return x_basic_; }

    void compute_duals(const std::vector<Column>& pool, std::vector<double>& y) const {
        y.assign(m_, 0.0);
        for (int k = 0; k < m_; ++k) {
            const double ck = pool[basis_[k]].cost;
            if (ck == 0.0) continue;
            const double* row = &binv_[k * m_];
            for (int i = 0; i < m_; ++i) y[i] += ck * row[i];
        }
    }

    // Rebuilds B^-1 and the basic values from scratch; bounds the drift
    // of the running eta updates.
    void refactorize(const std::vector<Column>& pool) {
        std::vector<double> b(m_ * m_, 0.0);
        std::vector<int> rows;
        for (int k = 0; k < m_; ++k) {
            column_rows(pool[basis_[k]], rows);
            for (int r : rows) b[r * m_ + k] = 1.0;
        }
        std::vector<double> inv(m_ * m_, 0.0);
        for (int i = 0; i < m_; ++i) inv[i * m_ + i] = 1.0;
        for (int col = 0; col < m_; ++col) {
            int piv = col;
            for (int r = col + 1; r < m_; ++r)
                if (std::abs(b[r * m_ + col]) > std::abs(b[piv * m_ + col])) piv = r;
            if (std::abs(b[piv * m_ + col]) < 1e-12)
                throw std::logic_error("singular basis during refactorization");
            if (piv != col) {
                for (int k = 0; k < m_; ++k) {
                    std::swap(b[piv * m_ + k], b[col * m_ + k]);
                    std::swap(inv[piv * m_ + k], inv[col * m_ + k]);
                }
            }
            const double scale = b[col * m_ + col];
            for (int k = 0; k < m_; ++k) {
                b[col * m_ + k] /= scale;
                inv[col * m_ + k] /= scale;
            }
            for (int r = 0; r < m_; ++r) {
                if (r == col) continue;
                const double f = b[r * m_ + col];
                if (f == 0.0) continue;
                for (int k = 0; k < m_; ++k) {
                    b[r * m_ + k] -= f * b[col * m_ + k];
                    inv[r * m_ + k] -= f * inv[col * m_ + k];
                }
            }
        }
        binv_ = std::move(inv);
        for (int i = 0; i < m_; ++i) {
            double acc = 0.0;
            const double* row = &binv_[i * m_];
            for (int k = 0; k < m_; ++k) acc += row[k] * rhs_[k];
            x_basic_[i] = std::max(acc, 0.0);
        }
    }

    // Primal simplex to optimality over the given pool. Returns false if
    // the pivot limit was exhausted first.
    bool optimize(const std::vector<Column>& pool, double reduced_cost_tol, int max_pivots,
                  int& pivots_used) {
        std::vector<double> y(m_), w(m_);
        std::vector<int> rows;
        int degenerate_streak = 0;
        int since_refactor = 0;
        while (true) {
            if (pivots_used >= max_pivots) return false;
            if (++since_refactor > 500) {
                refactorize(pool);
                since_refactor = 0;
            }
            compute_duals(pool, y);

            const bool bland = degenerate_streak > 40;
            int entering = -1;
            double best = -reduced_cost_tol;
            for (int j = 0; j < static_cast<int>(pool.size()); ++j) {
                if (in_basis_.count(j)) continue;
                column_rows(pool[j], rows);
                double d = pool[j].cost;
                for (int r : rows) d -= y[r];
                if (bland) {
                    if (d < -reduced_cost_tol) {
                        entering = j;
                        break;
                    }
                } else if (d < best) {
                    best = d;
                    entering = j;
                }
            }
            if (entering < 0) return true;

            column_rows(pool[entering], rows);
            std::fill(w.begin(), w.end(), 0.0);
            for (int i = 0; i < m_; ++i) {
                const double* row = &binv_[i * m_];
                double acc = 0.0;
                for (int r : rows) acc += row[r];
                w[i] = acc;
            }

            int leave = -1;
            double theta = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m_; ++i) {
                if (w[i] > 1e-11) {
                    const double ratio = x_basic_[i] / w[i];
                    if (ratio < theta - 1e-12 || (ratio < theta + 1e-12 && leave >= 0 &&
                                                  basis_[i] < basis_[leave])) {
                        theta = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0) throw std::logic_error("master LP unbounded");

            degenerate_streak = theta < 1e-12 ? degenerate_streak + 1 : 0;

            for (int i = 0; i < m_; ++i)
                if (i != leave) x_basic_[i] -= theta * w[i];
            x_basic_[leave] = theta;

            const double pivot = w[leave];
            double* prow = &binv_[leave * m_];
            for (int i = 0; i < m_; ++i) prow[i] /= pivot;
            for (int i = 0; i < m_; ++i) {
                if (i == leave || w[i] == 0.0) continue;
                const double factor = w[i];
                double* row = &binv_[i * m_];
                for (int k = 0; k < m_; ++k) row[k] -= factor * prow[k];
            }

            in_basis_.erase(basis_[leave]);
            basis_[leave] = entering;
            in_basis_.insert(entering);
            ++pivots_used;

            for (double& v : x_basic_)
                if (v < 0.0 && v > -1e-9) v = 0.0;
        }
    }

    void init_basis_tracking() {
        in_basis_ = std::set<int>(basis_.begin(), basis_.end());
    }

    double objective(const std::vector<Column>& pool) const {
        double obj = 0.0;
        for (int k = 0; k < m_; ++k) obj += pool[basis_[k]].cost * x_basic_[k];
        return obj;
    }

private:
    int n_groups_ = 0;
    int n_edges_ = 0;
    int m_ = 0;
    std::vector<double> rhs_;
    std::vector<double> binv_; // row-major m x m
    std::vector<double> x_basic_;
    std::vector<int> basis_;
    std::set<int> in_basis_;
};

struct MergedGroup {
    LpUser user;
    double weight = 0.0;
    std::vector<int> members; // original user indices
};

std::vector<MergedGroup> merge_users(const LpInstance& inst) {
    std::map<std::tuple<int, int, double, double>, int> index;
    std::vector<MergedGroup> groups;
    for (int u = 0; u < static_cast<int>(inst.users.size()); ++u) {
        const LpUser& user = inst.users[u];
        const auto key = std::make_tuple(user.origin, user.destination, user.value_of_time,
                                         user.outside_cost);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, static_cast<int>(groups.size())).first;
            groups.push_back(MergedGroup{user, 0.0, {}});
        }
        groups[it->second].weight += 1.0;
        groups[it->second].members.push_back(u);
    }
    return groups;
}

std::uint64_t path_signature(const Path& p) {
    std::uint64_t h = 1469598103934665603ULL;
    for (int e : p.edges) {
        h ^= static_cast<std::uint64_t>(e) + 0x9E3779B97F4A7C15ULL;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace

LpSolution solve_lp(const LpInstance& inst, const LpOptions& opts) {
    const Network& net = *inst.net;
    const int n_edges = net.edge_count();
    if (static_cast<int>(inst.capacities.size()) != n_edges)
        throw std::invalid_argument("capacity vector size mismatch");

    const auto groups = merge_users(inst);
    const int n_groups = static_cast<int>(groups.size());

    LpSolution sol;
    sol.tolls.assign(n_edges, 0.0);
    sol.edge_flows.assign(n_edges, 0.0);
    sol.users.resize(inst.users.size());
    if (n_groups == 0) return sol;

    std::vector<double> weights(n_groups);
    for (int g = 0; g < n_groups; ++g) weights[g] = groups[g].weight;

    Master master(n_groups, weights, inst.capacities);
    const int m = master.rows();
    const int max_pivots = opts.max_pivots > 0 ? opts.max_pivots : 200 * m + 5000;

    std::vector<Column> pool;
    std::vector<int> basis(m);
    for (int g = 0; g < n_groups; ++g) {
        Column c;
        c.cost = groups[g].user.outside_cost;
        c.group = g;
        c.outside = true;
        pool.push_back(std::move(c));
        basis[g] = g;
    }
    for (int e = 0; e < n_edges; ++e) {
        Column c;
        c.slack_edge = e;
        pool.push_back(std::move(c));
        basis[n_groups + e] = n_groups + e;
    }
    master.set_basis(std::move(basis));
    master.init_basis_tracking();

    std::vector<std::set<std::uint64_t>> known_paths(n_groups);
    std::vector<double> y(m), edge_cost(n_edges);
    bool hit_limit = false;

    for (int round = 0; round < opts.max_pricing_rounds; ++round) {
        ++sol.pricing_rounds;
        if (!master.optimize(pool, opts.reduced_cost_tol, max_pivots, sol.pivots)) {
            hit_limit = true;
            break;
        }
        master.compute_duals(pool, y);
        for (int e = 0; e < n_edges; ++e) sol.tolls[e] = std::max(0.0, -y[n_groups + e]);

        int added = 0;
        for (int g = 0; g < n_groups; ++g) {
            const LpUser& user = groups[g].user;
            if (user.origin == user.destination) continue;
            for (const Edge& e : net.edges())
                edge_cost[e.id] = user.value_of_time * e.latency + sol.tolls[e.id];
            const auto sp = shortest_path(net, user.origin, user.destination, edge_cost);
            if (!sp) continue;
            if (sp->cost - y[g] < -opts.reduced_cost_tol) {
                const auto sig = path_signature(sp->path);
                if (!known_paths[g].insert(sig).second) continue;
                Column c;
                c.cost = user.value_of_time * sp->path.total_latency(net);
                c.group = g;
                c.path = sp->path;
                pool.push_back(std::move(c));
                ++added;
            }
        }
        if (added == 0) {
            sol.status = LpStatus::Optimal;
            break;
        }
        if (round + 1 == opts.max_pricing_rounds) hit_limit = true;
    }
    if (hit_limit) sol.status = LpStatus::IterationLimit;

    master.compute_duals(pool, y);
    for (int e = 0; e < n_edges; ++e) sol.tolls[e] = std::max(0.0, -y[n_groups + e]);
    sol.objective = master.objective(pool);

    // Per-group flows from the final basis, expanded to original users.
    std::vector<double> group_outside(n_groups, 0.0);
    std::vector<std::map<std::uint64_t, std::pair<Path, double>>> group_paths(n_groups);
    const auto& values = master.basic_values();
    for (int k = 0; k < m; ++k) {
        const Column& col = pool[master.basis()[k]];
        const double flow = values[k];
        if (flow <= 0.0 || col.group < 0) continue;
        if (col.outside) {
            group_outside[col.group] += flow;
        } else {
            sol.routed_travel_time += flow * col.path.total_latency(net);
            for (int e : col.path.edges) sol.edge_flows[e] += flow;
            auto& entry = group_paths[col.group][path_signature(col.path)];
            entry.first = col.path;
            entry.second += flow;
        }
    }
    for (int g = 0; g < n_groups; ++g) {
        const double w = groups[g].weight;
        for (int member : groups[g].members) {
            LpUserSolution& us = sol.users[member];
            us.dual = y[g];
            us.outside_flow = group_outside[g] / w;
            us.path_flows.clear();
            for (const auto& [sig, pf] : group_paths[g])
                us.path_flows.emplace_back(pf.first, pf.second / w);
        }
    }
    return sol;
}

double dual_objective(const Network& net, std::span<const LpUser> users,
                      std::span<const double> tolls, std::span<const double> capacities) {
    std::vector<double> edge_cost(net.edge_count());
    double value = 0.0;
    std::map<std::pair<std::pair<int, int>, double>, double> memo;
    for (const LpUser& u : users) {
        const auto key = std::make_pair(std::make_pair(u.origin, u.destination), u.value_of_time);
        double best_path = std::numeric_limits<double>::infinity();
        auto it = memo.find(key);
        if (it != memo.end()) {
            best_path = it->second;
        } else if (u.origin != u.destination) {
            for (const Edge& e : net.edges())
                edge_cost[e.id] = u.value_of_time * e.latency + tolls[e.id];
            const auto sp = shortest_path(net, u.origin, u.destination, edge_cost);
            if (sp) best_path = sp->cost;
            memo.emplace(key, best_path);
        }
        value += std::min(best_path, u.outside_cost);
    }
    for (int e = 0; e < net.edge_count(); ++e) value -= tolls[e] * capacities[e];
    return value;
}

TollVector subgradient_solve(const LpInstance& inst, int iterations, double step0) {
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    const Network& net = *inst.net;
    const int n_edges = net.edge_count();

    const auto groups = merge_users(inst);
    std::vector<double> tau(n_edges, 0.0), avg(n_edges, 0.0), edge_cost(n_edges);
    std::vector<double> flows(n_edges, 0.0);

    std::vector<double> best_tau = tau;
    double best_value = -std::numeric_limits<double>::infinity();

    for (int k = 0; k < iterations; ++k) {
        std::fill(flows.begin(), flows.end(), 0.0);
        double dual = 0.0;
        for (const auto& g : groups) {
            double best_path = std::numeric_limits<double>::infinity();
            Path chosen;
            if (g.user.origin != g.user.destination) {
                for (const Edge& e : net.edges())
                    edge_cost[e.id] = g.user.value_of_time * e.latency + tau[e.id];
                const auto sp = shortest_path(net, g.user.origin, g.user.destination, edge_cost);
                if (sp) {
                    best_path = sp->cost;
                    chosen = sp->path;
                }
            }
            if (best_path <= g.user.outside_cost) {
                dual += g.weight * best_path;
                for (int e : chosen.edges) flows[e] += g.weight;
            } else {
                dual += g.weight * g.user.outside_cost;
            }
        }
        for (int e = 0; e < n_edges; ++e) dual -= tau[e] * inst.capacities[e];
        if (dual > best_value) {
            best_value = dual;
            best_tau = tau;
        }

        const double step = step0 / std::sqrt(static_cast<double>(k + 1));
        for (int e = 0; e < n_edges; ++e) {
            tau[e] = std::max(0.0, tau[e] - step * (inst.capacities[e] - flows[e]));
            avg[e] += (tau[e] - avg[e]) / static_cast<double>(k + 1);
        }
    }

    const double avg_value =
        dual_objective(net, inst.users, avg, inst.capacities);
    if (avg_value > best_value) best_tau = avg;
    return TollVector(std::move(best_tau));
}

MarketClearingReport check_market_clearing(const LpInstance& inst, const LpSolution& sol) {
    const Network& net = *inst.net;
    MarketClearingReport report;
    report.edge_residuals.resize(net.edge_count());
    for (int e = 0; e < net.edge_count(); ++e) {
        report.edge_residuals[e] = std::abs(sol.tolls[e] * (inst.capacities[e] - sol.edge_flows[e]));
        report.max_edge_residual = std::max(report.max_edge_residual, report.edge_residuals[e]);
    }
    std::vector<double> edge_cost(net.edge_count());
    report.user_residuals.resize(inst.users.size());
    for (std::size_t u = 0; u < inst.users.size(); ++u) {
        const LpUser& user = inst.users[u];
        double best_path = std::numeric_limits<double>::infinity();
        if (user.origin != user.destination) {
            for (const Edge& e : net.edges())
                edge_cost[e.id] = user.value_of_time * e.latency + sol.tolls[e.id];
            const auto sp = shortest_path(net, user.origin, user.destination, edge_cost);
            if (sp) best_path = sp->cost;
        }
        const double expected = std::min(best_path, user.outside_cost);
        report.user_residuals[u] = std::abs(sol.users[u].dual - expected);
        report.max_user_residual = std::max(report.max_user_residual, report.user_residuals[u]);
    }
    return report;
}

} // namespace tollsim
