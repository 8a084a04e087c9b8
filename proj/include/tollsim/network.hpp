#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tollsim {

struct Edge {
    int id = -1;
    int tail = -1;
    int head = -1;
    double latency = 0.0;  // hours
    double capacity = 0.0; // vehicles per period
};

// Directed capacitated graph, immutable after construction. Node ids are
// dense 0..node_count-1, edge ids dense 0..edge_count-1.
class Network {
public:
    Network() = default;
    explicit Network(int node_count) : node_count_(node_count), out_edges_(node_count) {}

    int add_edge(int tail, int head, double latency, double capacity);

    int node_count() const { return node_count_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const Edge& edge(int id) const { return edges_[id]; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<int>& out_edges(int node) const { return out_edges_[node]; }

    std::vector<double> latencies() const;
    std::vector<double> capacities() const;

    // True when the graph is a set of parallel edges over a single
    // origin/destination pair.
    bool is_parallel() const;

    // Offset between the ids used in the source file and the internal
    // 0-based ids (1 for TNTP input, 0 for programmatic construction).
    int file_node_offset = 0;

private:
    int node_count_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> out_edges_;
};

struct Path {
    int origin = -1;
    int destination = -1;
    std::vector<int> edges;

    double total_latency(const Network& net) const;
    double total_over(std::span<const double> edge_values) const;
    bool operator==(const Path& other) const = default;
};

// Lexicographic order on the edge-id sequence; the deterministic
// tie-break used everywhere paths of equal cost compete.
bool path_lex_less(const Path& a, const Path& b);

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

using DemandTable = std::map<std::pair<int, int>, double>;

struct TntpData {
    Network network;
    DemandTable base_demand; // (origin, destination) -> vehicles per period, 0-based ids
};

// Parses TNTP network and trips text. Latency is length / speed when the
// speed field is positive, otherwise the free-flow time.
TntpData load_tntp(const std::string& net_text, const std::string& trips_text);

TntpData load_tntp_files(const std::string& net_path, const std::string& trips_path);

struct PathResult {
    Path path;
    double cost = 0.0;
};

// Minimum-cost simple path under the supplied nonnegative edge costs.
// Equal-cost ties resolve to the lexicographically smallest edge-id
// sequence. Returns nullopt when the destination is unreachable.
// origin == destination is a contract violation (no self-trips).
std::optional<PathResult> shortest_path(const Network& net, int origin, int destination,
                                        std::span<const double> edge_cost);

struct PathSet {
    std::vector<Path> paths; // nondecreasing latency
    bool exhaustive = false;
};

// Up to `limit` simple paths in nondecreasing latency order. The set is
// flagged exhaustive when it contains every simple path between the pair.
PathSet enumerate_paths(const Network& net, int origin, int destination, int limit);

} // namespace tollsim
