#pragma once

// Graph types shared by the searches: DAGs, patterns (CPDAGs and the
// intermediate mixed graphs PC and GES pass through), Meek closure,
// random DAG sampling and a d-separation oracle.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "npnsearch/errors.hpp"

namespace npnsearch {

/// Sorted, duplicate-free list of node indices.
using NodeSet = std::vector<int>;
/// List of node pairs. Unordered pairs are stored with first < second.
using EdgeList = std::vector<std::pair<int, int>>;

inline bool contains(const NodeSet& set, int node) {
    return std::binary_search(set.begin(), set.end(), node);
}

inline NodeSet set_union(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline NodeSet set_difference(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline NodeSet set_intersection(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline NodeSet with_node(NodeSet set, int node) {
    auto it = std::lower_bound(set.begin(), set.end(), node);
    if (it == set.end() || *it != node) set.insert(it, node);
    return set;
}

inline NodeSet without_node(NodeSet set, int node) {
    auto it = std::lower_bound(set.begin(), set.end(), node);
    if (it != set.end() && *it == node) set.erase(it);
    return set;
}

/// Directed acyclic graph over nodes 0..node_count-1. Immutable once built;
/// the constructor rejects cycles, self-loops, duplicates and bad indices.
class Dag {
public:
    Dag() = default;

    explicit Dag(int node_count) : node_count_(node_count), parents_(node_count), children_(node_count) {
        if (node_count < 0) throw GraphError("node count must be nonnegative");
    }

    Dag(int node_count, const EdgeList& edges) : Dag(node_count) {
        for (auto [from, to] : edges) {
            if (from < 0 || to < 0 || from >= node_count || to >= node_count)
                throw GraphError("edge index out of range");
            if (from == to) throw GraphError("self-loop on node " + std::to_string(from));
            if (contains(children_[from], to))
                throw GraphError("duplicate edge " + std::to_string(from) + " -> " + std::to_string(to));
            children_[from] = with_node(std::move(children_[from]), to);
            parents_[to] = with_node(std::move(parents_[to]), from);
        }
        edge_count_ = edges.size();
        if (topological_order().size() != static_cast<std::size_t>(node_count))
            throw GraphError("graph contains a directed cycle");
    }

    int node_count() const { return node_count_; }
    std::size_t edge_count() const { return edge_count_; }

    bool has_edge(int from, int to) const { return contains(children_[from], to); }
    bool adjacent(int a, int b) const { return has_edge(a, b) || has_edge(b, a); }

    const NodeSet& parents(int node) const { return parents_[node]; }
    const NodeSet& children(int node) const { return children_[node]; }

    /// All edges as (parent, child), sorted.
    EdgeList edges() const {
        EdgeList out;
        out.reserve(edge_count_);
        for (int from = 0; from < node_count_; ++from)
            for (int to : children_[from]) out.emplace_back(from, to);
        return out;
    }

    /// Kahn's algorithm, always releasing the smallest ready index first.
    /// Returns fewer than node_count nodes iff the edge set has a cycle.
    std::vector<int> topological_order() const {
        std::vector<int> indegree(node_count_);
        for (int v = 0; v < node_count_; ++v) indegree[v] = static_cast<int>(parents_[v].size());
        std::priority_queue<int, std::vector<int>, std::greater<>> ready;
        for (int v = 0; v < node_count_; ++v)
            if (indegree[v] == 0) ready.push(v);
        std::vector<int> order;
        order.reserve(node_count_);
        while (!ready.empty()) {
            int v = ready.top();
            ready.pop();
            order.push_back(v);
            for (int c : children_[v])
                if (--indegree[c] == 0) ready.push(c);
        }
        return order;
    }

    friend bool operator==(const Dag& a, const Dag& b) {
        return a.node_count_ == b.node_count_ && a.parents_ == b.parents_;
    }

private:
    int node_count_ = 0;
    std::size_t edge_count_ = 0;
    std::vector<NodeSet> parents_;
    std::vector<NodeSet> children_;
};

enum class Mark : std::uint8_t { none, tail, arrow };

/// Mixed graph with a mark at each end of every adjacency. Represents
/// CPDAGs as well as the partially oriented states of PC and GES,
/// including the bidirected edges PC can leave behind on collider conflicts.
class PatternGraph {
public:
    PatternGraph() = default;
    explicit PatternGraph(int node_count)
        : node_count_(node_count), marks_(static_cast<std::size_t>(node_count) * node_count, Mark::none) {}

    static PatternGraph complete_undirected(int node_count) {
        PatternGraph g(node_count);
        for (int i = 0; i < node_count; ++i)
            for (int j = i + 1; j < node_count; ++j) g.add_undirected(i, j);
        return g;
    }

    /// Every DAG edge becomes a directed edge.
    static PatternGraph from_dag(const Dag& dag) {
        PatternGraph g(dag.node_count());
        for (auto [from, to] : dag.edges()) g.add_directed(from, to);
        return g;
    }

    int node_count() const { return node_count_; }

    /// Mark at `at`'s end of the edge between `from` and `at`.
    Mark endpoint(int from, int at) const { return marks_[index(from, at)]; }

    bool adjacent(int a, int b) const { return endpoint(a, b) != Mark::none; }
    bool directed(int from, int to) const {
        return endpoint(to, from) == Mark::tail && endpoint(from, to) == Mark::arrow;
    }
    bool undirected(int a, int b) const {
        return endpoint(a, b) == Mark::tail && endpoint(b, a) == Mark::tail;
    }
    bool bidirected(int a, int b) const {
        return endpoint(a, b) == Mark::arrow && endpoint(b, a) == Mark::arrow;
    }

    void add_undirected(int a, int b) { set_marks(a, b, Mark::tail, Mark::tail); }
    void add_directed(int from, int to) { set_marks(from, to, Mark::tail, Mark::arrow); }
    void add_bidirected(int a, int b) { set_marks(a, b, Mark::arrow, Mark::arrow); }
    void remove_edge(int a, int b) { set_marks(a, b, Mark::none, Mark::none); }

    /// Puts an arrowhead at `at`'s end of an existing edge, keeping the other end.
    void add_arrowhead(int from, int at) {
        if (!adjacent(from, at)) throw GraphError("arrowhead on a non-adjacent pair");
        marks_[index(from, at)] = Mark::arrow;
    }

    NodeSet adjacent_nodes(int node) const {
        NodeSet out;
        for (int j = 0; j < node_count_; ++j)
            if (adjacent(node, j)) out.push_back(j);
        return out;
    }
    /// Nodes joined to `node` by an undirected edge.
    NodeSet neighbors(int node) const {
        NodeSet out;
        for (int j = 0; j < node_count_; ++j)
            if (undirected(node, j)) out.push_back(j);
        return out;
    }
    NodeSet parents(int node) const {
        NodeSet out;
        for (int j = 0; j < node_count_; ++j)
            if (directed(j, node)) out.push_back(j);
        return out;
    }
    NodeSet children(int node) const {
        NodeSet out;
        for (int j = 0; j < node_count_; ++j)
            if (directed(node, j)) out.push_back(j);
        return out;
    }

    /// Adjacent pairs as (i, j) with i < j, sorted.
    EdgeList adjacencies() const {
        EdgeList out;
        for (int i = 0; i < node_count_; ++i)
            for (int j = i + 1; j < node_count_; ++j)
                if (adjacent(i, j)) out.emplace_back(i, j);
        return out;
    }

    std::size_t edge_count() const { return adjacencies().size(); }

    bool has_bidirected() const {
        for (auto [i, j] : adjacencies())
            if (bidirected(i, j)) return true;
        return false;
    }

    friend bool operator==(const PatternGraph&, const PatternGraph&) = default;

private:
    std::size_t index(int from, int at) const {
        return static_cast<std::size_t>(from) * node_count_ + at;
    }
    void set_marks(int a, int b, Mark at_a, Mark at_b) {
        if (a == b) throw GraphError("self-loop on node " + std::to_string(a));
        marks_[index(b, a)] = at_a;
        marks_[index(a, b)] = at_b;
    }

    int node_count_ = 0;
    std::vector<Mark> marks_;
};

/// Uniformly random topological order, then edge_count distinct pairs drawn
/// without replacement and oriented along that order.
inline Dag random_dag(int node_count, std::size_t edge_count, std::uint64_t seed) {
    if (node_count <= 0) throw GraphError("node count must be positive");
    const std::size_t max_edges = static_cast<std::size_t>(node_count) * (node_count - 1) / 2;
    if (edge_count > max_edges)
        throw CapacityError("cannot place " + std::to_string(edge_count) + " edges on " +
                            std::to_string(node_count) + " nodes (max " + std::to_string(max_edges) + ")");
    std::mt19937_64 rng(seed);
    std::vector<int> order(node_count);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    EdgeList slots;
    slots.reserve(max_edges);
    for (int i = 0; i < node_count; ++i)
        for (int j = i + 1; j < node_count; ++j) slots.emplace_back(i, j);
    // Partial Fisher-Yates: the first edge_count slots end up a uniform sample.
    for (std::size_t k = 0; k < edge_count; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, slots.size() - 1);
        std::swap(slots[k], slots[pick(rng)]);
    }
    EdgeList edges;
    edges.reserve(edge_count);
    for (std::size_t k = 0; k < edge_count; ++k)
        edges.emplace_back(order[slots[k].first], order[slots[k].second]);
    std::sort(edges.begin(), edges.end());
    return Dag(node_count, edges);
}

namespace detail {

inline bool meek_orients(const PatternGraph& g, int a, int b) {
    const int n = g.node_count();
    for (int c = 0; c < n; ++c) {
        if (c == a || c == b) continue;
        // R1: c -> a -- b, c and b nonadjacent.
        if (g.directed(c, a) && !g.adjacent(c, b)) return true;
        // R2: a -> c -> b.
        if (g.directed(a, c) && g.directed(c, b)) return true;
    }
    for (int c = 0; c < n; ++c) {
        if (c == a || c == b || !g.undirected(a, c)) continue;
        for (int d = c + 1; d < n; ++d) {
            if (d == a || d == b || !g.undirected(a, d)) continue;
            // R3: a -- c -> b, a -- d -> b, c and d nonadjacent.
            if (g.directed(c, b) && g.directed(d, b) && !g.adjacent(c, d)) return true;
        }
    }
    for (int d = 0; d < n; ++d) {
        if (d == a || d == b || !g.undirected(a, d) || g.adjacent(d, b)) continue;
        // R4: a -- d -> c -> b with a adjacent to c, d and b nonadjacent.
        for (int c = 0; c < n; ++c) {
            if (c == a || c == b || c == d) continue;
            if (g.directed(d, c) && g.directed(c, b) && g.adjacent(a, c)) return true;
        }
    }
    return false;
}

}  // namespace detail

/// Closes `g` under Meek's rules R1-R4 in place. Only undirected edges
/// are ever oriented.
inline void meek_close(PatternGraph& g) {
    const int n = g.node_count();
    bool changed = true;
    while (changed) {
        changed = false;
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                if (a == b || !g.undirected(a, b)) continue;
                if (detail::meek_orients(g, a, b)) {
                    g.add_directed(a, b);
                    changed = true;
                }
            }
        }
    }
}

inline PatternGraph apply_meek_rules(PatternGraph pattern) {
    meek_close(pattern);
    return pattern;
}

/// Pattern of the Markov equivalence class of `dag`: skeleton, unshielded
/// colliders, then Meek closure.
inline PatternGraph dag_to_cpdag(const Dag& dag) {
    const int n = dag.node_count();
    PatternGraph g(n);
    for (auto [from, to] : dag.edges()) g.add_undirected(from, to);
    for (int z = 0; z < n; ++z) {
        const NodeSet& pa = dag.parents(z);
        for (std::size_t i = 0; i < pa.size(); ++i)
            for (std::size_t j = i + 1; j < pa.size(); ++j)
                if (!dag.adjacent(pa[i], pa[j])) {
                    g.add_directed(pa[i], z);
                    g.add_directed(pa[j], z);
                }
    }
    meek_close(g);
    return g;
}

/// Dor-Tarsi consistent extension: a DAG with the same skeleton and
/// directed edges as `pattern` and no new unshielded colliders, if one exists.
/// Bidirected edges have no extension.
inline std::optional<Dag> consistent_extension(const PatternGraph& pattern) {
    const int n = pattern.node_count();
    PatternGraph work = pattern;
    std::vector<bool> removed(n, false);
    EdgeList edges;
    for (auto [i, j] : pattern.adjacencies()) {
        if (pattern.bidirected(i, j)) return std::nullopt;
        if (pattern.directed(i, j)) edges.emplace_back(i, j);
        else if (pattern.directed(j, i)) edges.emplace_back(j, i);
    }
    for (int remaining = n; remaining > 0; --remaining) {
        int sink = -1;
        for (int x = 0; x < n && sink < 0; ++x) {
            if (removed[x]) continue;
            bool ok = true;
            NodeSet adj;
            for (int y = 0; y < n && ok; ++y) {
                if (removed[y] || !work.adjacent(x, y)) continue;
                if (work.directed(x, y)) ok = false;
                adj.push_back(y);
            }
            for (int y = 0; y < n && ok; ++y) {
                if (removed[y] || !work.undirected(x, y)) continue;
                for (int z : adj)
                    if (z != y && !work.adjacent(y, z)) {
                        ok = false;
                        break;
                    }
            }
            if (ok) sink = x;
        }
        if (sink < 0) return std::nullopt;
        for (int y = 0; y < n; ++y) {
            if (removed[y] || !work.undirected(sink, y)) continue;
            edges.emplace_back(y, sink);
        }
        for (int y = 0; y < n; ++y)
            if (work.adjacent(sink, y)) work.remove_edge(sink, y);
        removed[sink] = true;
    }
    std::sort(edges.begin(), edges.end());
    return Dag(n, edges);
}

/// True iff x and y are d-separated by `given` in `dag` (reachability
/// over (node, direction) states).
inline bool d_separated(const Dag& dag, int x, int y, const NodeSet& given) {
    const int n = dag.node_count();
    std::vector<bool> in_given(n, false), ancestor_of_given(n, false);
    for (int s : given) in_given[s] = true;
    {
        std::vector<int> stack(given.begin(), given.end());
        for (int s : given) ancestor_of_given[s] = true;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int p : dag.parents(v))
                if (!ancestor_of_given[p]) {
                    ancestor_of_given[p] = true;
                    stack.push_back(p);
                }
        }
    }
    // visited[2v] : reached v travelling up (from a child); visited[2v+1] : down (from a parent).
    std::vector<bool> visited(2 * static_cast<std::size_t>(n), false);
    std::vector<std::pair<int, bool>> stack{{x, true}};
    while (!stack.empty()) {
        auto [v, up] = stack.back();
        stack.pop_back();
        const std::size_t key = 2 * static_cast<std::size_t>(v) + (up ? 0 : 1);
        if (visited[key]) continue;
        visited[key] = true;
        if (v == y && !in_given[v]) return false;
        if (up) {
            if (in_given[v]) continue;
            for (int p : dag.parents(v)) stack.emplace_back(p, true);
            for (int c : dag.children(v)) stack.emplace_back(c, false);
        } else {
            if (!in_given[v])
                for (int c : dag.children(v)) stack.emplace_back(c, false);
            if (ancestor_of_given[v])
                for (int p : dag.parents(v)) stack.emplace_back(p, true);
        }
    }
    return true;
}

// Text format: "nodes: N" header, then one "i -> j", "i -- j" or "i <-> j" line per edge.

inline void write_graph(std::ostream& out, const PatternGraph& g) {
    out << "nodes: " << g.node_count() << '\n';
    for (auto [i, j] : g.adjacencies()) {
        if (g.directed(i, j)) out << i << " -> " << j << '\n';
        else if (g.directed(j, i)) out << j << " -> " << i << '\n';
        else if (g.undirected(i, j)) out << i << " -- " << j << '\n';
        else out << i << " <-> " << j << '\n';
    }
}

inline void write_graph(std::ostream& out, const Dag& dag) {
    out << "nodes: " << dag.node_count() << '\n';
    for (auto [from, to] : dag.edges()) out << from << " -> " << to << '\n';
}

inline std::string to_string(const PatternGraph& g) {
    std::ostringstream out;
    write_graph(out, g);
    return out.str();
}

inline PatternGraph read_pattern(std::istream& in) {
    std::string line;
    int n = -1;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream header(line);
        std::string key;
        if (!(header >> key >> n) || key != "nodes:" || n < 0) throw ParseError("expected 'nodes: N' header");
        break;
    }
    if (n < 0) throw ParseError("missing 'nodes: N' header");
    PatternGraph g(n);
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream fields(line);
        int a = -1, b = -1;
        std::string op;
        if (!(fields >> a >> op >> b) || a < 0 || b < 0 || a >= n || b >= n || a == b)
            throw ParseError("malformed edge line: " + line);
        if (op == "->") g.add_directed(a, b);
        else if (op == "--") g.add_undirected(a, b);
        else if (op == "<->") g.add_bidirected(a, b);
        else throw ParseError("unknown edge type '" + op + "'");
    }
    return g;
}

}  // namespace npnsearch
