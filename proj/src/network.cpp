#include "tollsim/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

namespace tollsim {

int Network::add_edge(int tail, int head, double latency, double capacity) {
    if (tail < 0 || tail >= node_count_ || head < 0 || head >= node_count_)
        throw std::invalid_argument("edge endpoint outside node range");
    if (latency < 0.0) throw std::invalid_argument("negative latency");
    if (capacity <= 0.0) throw std::invalid_argument("capacity must be positive");
    const int id = static_cast<int>(edges_.size());
    edges_.push_back(Edge{id, tail, head, latency, capacity});
    out_edges_[tail].push_back(id);
    return id;
}

std::vector<double> Network::latencies() const {
    std::vector<double> out(edges_.size());
    for (const Edge& e : edges_) out[e.id] = e.latency;
    return out;
}

std::vector<double> Network::capacities() const {
    std::vector<double> out(edges_.size());
    for (const Edge& e : edges_) out[e.id] = e.capacity;
    return out;
}

bool Network::is_parallel() const {
    if (edges_.empty()) return false;
    const int tail = edges_.front().tail;
    const int head = edges_.front().head;
    return std::all_of(edges_.begin(), edges_.end(), [&](const Edge& e) {
        return e.tail == tail && e.head == head;
    });
}

double Path::total_latency(const Network& net) const {
    double sum = 0.0;
    for (int e : edges) sum += net.edge(e).latency;
    return sum;
}

double Path::total_over(std::span<const double> edge_values) const {
    double sum = 0.0;
    for (int e : edges) sum += edge_values[e];
    return sum;
}

bool path_lex_less(const Path& a, const Path& b) {
    return std::lexicographical_compare(a.edges.begin(), a.edges.end(),
                                        b.edges.begin(), b.edges.end());
}

namespace {

struct LineReader {
    std::istringstream in;
    int line_no = 0;
    std::string current;

    explicit LineReader(const std::string& text) : in(text) {}

    // Next non-empty line with comments stripped; false at end of input.
    bool next() {
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_no;
            const auto tilde = raw.find('~');
            if (tilde != std::string::npos) raw.erase(tilde);
            const auto first = raw.find_first_not_of(" \t\r\n");
            if (first == std::string::npos) continue;
            const auto last = raw.find_last_not_of(" \t\r\n");
            current = raw.substr(first, last - first + 1);
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("line " + std::to_string(line_no) + ": " + what);
    }
};

// Reads "<KEY> value" metadata lines until <END OF METADATA>.
std::map<std::string, std::string> read_metadata(LineReader& r) {
    std::map<std::string, std::string> meta;
    bool ended = false;
    while (r.next()) {
        if (r.current.front() != '<') {
            // Some files omit the end tag; treat the first data line as such.
            r.fail("expected metadata line or <END OF METADATA>");
        }
        const auto close = r.current.find('>');
        if (close == std::string::npos) r.fail("unterminated metadata tag");
        std::string key = r.current.substr(1, close - 1);
        if (key == "END OF METADATA") {
            ended = true;
            break;
        }
        std::string value = r.current.substr(close + 1);
        const auto first = value.find_first_not_of(" \t");
        meta[key] = first == std::string::npos ? "" : value.substr(first);
    }
    if (!ended) throw ParseError("missing <END OF METADATA>");
    return meta;
}

long parse_long(const std::string& s, LineReader& r, const std::string& what) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        r.fail("malformed " + what + " '" + s + "'");
    }
}

} // namespace

TntpData load_tntp(const std::string& net_text, const std::string& trips_text) {
    LineReader net_reader(net_text);
    auto meta = read_metadata(net_reader);
    if (!meta.count("NUMBER OF NODES")) throw ParseError("missing <NUMBER OF NODES>");
    if (!meta.count("NUMBER OF LINKS")) throw ParseError("missing <NUMBER OF LINKS>");
    const long node_count = std::stol(meta["NUMBER OF NODES"]);
    const long link_count = std::stol(meta["NUMBER OF LINKS"]);
    if (node_count <= 0) throw ParseError("node count must be positive");

    TntpData data;
    data.network = Network(static_cast<int>(node_count));
    data.network.file_node_offset = 1;

    while (net_reader.next()) {
        std::istringstream fields(net_reader.current);
        long init = 0, term = 0;
        double capacity = 0, length = 0, fftime = 0, b = 0, power = 0, speed = 0, toll = 0;
        std::string init_s, term_s;
        if (!(fields >> init_s >> term_s >> capacity >> length >> fftime))
            net_reader.fail("link record needs at least 5 fields");
        init = parse_long(init_s, net_reader, "node id");
        term = parse_long(term_s, net_reader, "node id");
        fields >> b >> power >> speed >> toll; // optional trailing fields
        if (init < 1 || init > node_count || term < 1 || term > node_count)
            net_reader.fail("node id outside [1, " + std::to_string(node_count) + "]");
        if (capacity <= 0.0) net_reader.fail("capacity must be positive");
        const double latency = speed > 0.0 ? length / speed : fftime;
        if (latency < 0.0) net_reader.fail("negative travel time");
        data.network.add_edge(static_cast<int>(init - 1), static_cast<int>(term - 1),
                              latency, capacity);
    }
    if (data.network.edge_count() != link_count)
        throw ParseError("link count " + std::to_string(data.network.edge_count()) +
                         " does not match header " + std::to_string(link_count));

    LineReader trips_reader(trips_text);
    read_metadata(trips_reader);
    long origin = -1;
    while (trips_reader.next()) {
        std::istringstream fields(trips_reader.current);
        std::string word;
        fields >> word;
        if (word == "Origin") {
            std::string id;
            if (!(fields >> id)) trips_reader.fail("Origin without node id");
            origin = parse_long(id, trips_reader, "origin id");
            if (origin < 1 || origin > node_count) trips_reader.fail("origin id out of range");
            continue;
        }
        if (origin < 0) trips_reader.fail("demand entry before any Origin block");
        // "dest : demand; dest : demand; ..." entries, possibly several per line.
        std::istringstream entries(trips_reader.current);
        std::string chunk;
        while (std::getline(entries, chunk, ';')) {
            const auto colon = chunk.find(':');
            if (colon == std::string::npos) {
                if (chunk.find_first_not_of(" \t") != std::string::npos)
                    trips_reader.fail("expected 'destination : demand'");
                continue;
            }
            std::istringstream left(chunk.substr(0, colon)), right(chunk.substr(colon + 1));
            long dest = 0;
            double demand = 0;
            std::string dest_s;
            if (!(left >> dest_s) || !(right >> demand))
                trips_reader.fail("expected 'destination : demand'");
            dest = parse_long(dest_s, trips_reader, "destination id");
            if (dest < 1 || dest > node_count) trips_reader.fail("destination id out of range");
            if (demand < 0.0) trips_reader.fail("negative demand");
            if (demand == 0.0) continue;
            if (dest == origin) trips_reader.fail("positive self-trip demand unsupported");
            data.base_demand[{static_cast<int>(origin - 1), static_cast<int>(dest - 1)}] += demand;
        }
    }
    return data;
}

TntpData load_tntp_files(const std::string& net_path, const std::string& trips_path) {
    auto slurp = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open " + path);
        std::ostringstream out;
        out << in.rdbuf();
        return out.str();
    };
    return load_tntp(slurp(net_path), slurp(trips_path));
}

namespace {

// Rebuilds the origin->node edge sequence from predecessor links into
// `buf` (forward order). Returns buf.
std::vector<int>& trace_sequence(const std::vector<int>& pred_edge,
                                 const std::vector<const Edge*>& edges, int node,
                                 std::vector<int>& buf) {
    buf.clear();
    while (pred_edge[node] >= 0) {
        buf.push_back(pred_edge[node]);
        node = edges[pred_edge[node]]->tail;
    }
    std::reverse(buf.begin(), buf.end());
    return buf;
}

} // namespace

std::optional<PathResult> shortest_path(const Network& net, int origin, int destination,
                                        std::span<const double> edge_cost) {
    if (origin == destination)
        throw std::invalid_argument("no self-trips: origin equals destination");
    if (origin < 0 || origin >= net.node_count() || destination < 0 ||
        destination >= net.node_count())
        throw std::invalid_argument("node id out of range");
    if (static_cast<int>(edge_cost.size()) != net.edge_count())
        throw std::invalid_argument("edge cost vector size mismatch");

    const int n = net.node_count();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    thread_local std::vector<double> dist;
    thread_local std::vector<int> pred;
    thread_local std::vector<char> done;
    thread_local std::vector<const Edge*> edge_ptrs;
    dist.assign(n, kInf);
    pred.assign(n, -1);
    done.assign(n, 0);
    edge_ptrs.resize(net.edge_count());
    for (const Edge& e : net.edges()) edge_ptrs[e.id] = &e;

    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[origin] = 0.0;
    heap.emplace(0.0, origin);

    thread_local std::vector<int> seq_a, seq_b;
    while (!heap.empty()) {
        auto [d, node] = heap.top();
        heap.pop();
        if (done[node]) continue;
        done[node] = 1;
        if (node == destination) break;
        for (int eid : net.out_edges(node)) {
            const Edge& e = *edge_ptrs[eid];
            const double c = edge_cost[eid];
            if (c < 0.0) throw std::invalid_argument("negative edge cost");
            const double nd = d + c;
            if (nd < dist[e.head]) {
                dist[e.head] = nd;
                pred[e.head] = eid;
                heap.emplace(nd, e.head);
            } else if (nd == dist[e.head] && pred[e.head] >= 0 && !done[e.head]) {
                // Equal cost: keep the lexicographically smaller edge sequence.
                trace_sequence(pred, edge_ptrs, node, seq_a).push_back(eid);
                trace_sequence(pred, edge_ptrs, e.head, seq_b);
                if (std::lexicographical_compare(seq_a.begin(), seq_a.end(), seq_b.begin(),
                                                 seq_b.end())) {
                    pred[e.head] = eid;
                    heap.emplace(nd, e.head);
                }
            }
        }
    }

    if (dist[destination] == kInf) return std::nullopt;

    PathResult result;
    result.cost = dist[destination];
    result.path.origin = origin;
    result.path.destination = destination;
    trace_sequence(pred, edge_ptrs, destination, seq_a);
    result.path.edges = seq_a;
    return result;
}

PathSet enumerate_paths(const Network& net, int origin, int destination, int limit) {
    if (limit < 1) throw std::invalid_argument("limit must be >= 1");
    if (origin == destination)
        throw std::invalid_argument("no self-trips: origin equals destination");

    struct Partial {
        double latency;
        std::vector<int> edges;
        std::uint32_t visited; // node bitmask; enumeration targets small graphs
        int node;
    };
    struct Worse {
        bool operator()(const Partial& a, const Partial& b) const {
            if (a.latency != b.latency) return a.latency > b.latency;
            return std::lexicographical_compare(b.edges.begin(), b.edges.end(),
                                                a.edges.begin(), a.edges.end());
        }
    };
    if (net.node_count() > 32)
        throw std::invalid_argument("enumerate_paths supports at most 32 nodes");

    std::priority_queue<Partial, std::vector<Partial>, Worse> heap;
    heap.push(Partial{0.0, {}, 1u << origin, origin});

    PathSet out;
    while (!heap.empty()) {
        Partial top = heap.top();
        heap.pop();
        if (top.node == destination) {
            if (static_cast<int>(out.paths.size()) == limit) {
                // A (limit+1)-th path exists, so the returned set is partial.
                return out;
            }
            Path p;
            p.origin = origin;
            p.destination = destination;
            p.edges = std::move(top.edges);
            out.paths.push_back(std::move(p));
            continue;
        }
        for (int eid : net.out_edges(top.node)) {
            const Edge& e = net.edge(eid);
            if (top.visited & (1u << e.head)) continue;
            Partial next;
            next.latency = top.latency + e.latency;
            next.edges = top.edges;
            next.edges.push_back(eid);
            next.visited = top.visited | (1u << e.head);
            next.node = e.head;
            heap.push(std::move(next));
        }
    }
    out.exhaustive = true;
    return out;
}

} // namespace tollsim
