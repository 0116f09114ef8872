#pragma once

// PC: adjacency search by conditional-independence pruning, collider
// orientation from separating sets, Meek closure.

#include <chrono>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "npnsearch/errors.hpp"
#include "npnsearch/gauss.hpp"
#include "npnsearch/graph.hpp"

namespace npnsearch {

/// How PC resolves two unshielded triples that orient one edge both ways.
enum class ColliderConflict {
    keep_bidirected,   // arrowheads accumulate, leaving a <-> edge
    last_writer_wins,  // the later triple overwrites the earlier orientation
};

struct PcConfig {
    double alpha = 0.001;
    std::optional<int> max_conditioning_size;  // unlimited when empty
    bool deterministic_order = true;
    ColliderConflict conflicts = ColliderConflict::keep_bidirected;
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// Separating set of every removed adjacency, keyed by (min, max) pair.
using SepsetMap = std::map<std::pair<int, int>, NodeSet>;

struct PcSkeleton {
    PatternGraph graph;  // undirected
    SepsetMap sepsets;
};

namespace detail {

inline void check_deadline(const std::optional<std::chrono::steady_clock::time_point>& deadline) {
    if (deadline && std::chrono::steady_clock::now() > *deadline) throw TimeoutError("search exceeded its time budget");
}

/// Calls visit(subset) for every size-k subset of `items` in lexicographic
/// order; stops early when visit returns true. Returns whether it stopped.
template <typename Visit>
bool for_each_subset(const NodeSet& items, std::size_t k, Visit&& visit) {
    if (k > items.size()) return false;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    NodeSet subset(k);
    while (true) {
        for (std::size_t i = 0; i < k; ++i) subset[i] = items[idx[i]];
        if (visit(subset)) return true;
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == items.size() - k + (i - 1)) --i;
        if (i == 0) return false;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace detail

/// Phase one of PC against an arbitrary independence test
/// `independent(x, y, given) -> bool`. Classic (not order-independent) PC:
/// removals take effect immediately within a depth.
template <typename IndependenceTest>
PcSkeleton pc_skeleton(int node_count, IndependenceTest&& independent, const PcConfig& config = {}) {
    PcSkeleton out{PatternGraph::complete_undirected(node_count), {}};
    PatternGraph& g = out.graph;
    for (std::size_t depth = 0;; ++depth) {
        if (config.max_conditioning_size && depth > static_cast<std::size_t>(*config.max_conditioning_size)) break;
        bool any_testable = false;
        for (int x = 0; x < node_count; ++x) {
            for (int y = 0; y < node_count; ++y) {
                if (x == y || !g.adjacent(x, y)) continue;
                const NodeSet candidates = without_node(g.adjacent_nodes(x), y);
                if (candidates.size() < depth) continue;
                any_testable = true;
                detail::check_deadline(config.deadline);
                detail::for_each_subset(candidates, depth, [&](const NodeSet& given) {
                    if (!independent(x, y, given)) return false;
                    g.remove_edge(x, y);
                    out.sepsets[{std::min(x, y), std::max(x, y)}] = given;
                    return true;
                });
            }
        }
        if (!any_testable) break;
    }
    return out;
}

/// Orients unshielded colliders from separating sets, then Meek-closes.
inline PatternGraph orient_pc_skeleton(PcSkeleton skeleton, const PcConfig& config = {}) {
    PatternGraph& g = skeleton.graph;
    const int n = g.node_count();
    const PatternGraph unoriented = g;
    for (int z = 0; z < n; ++z) {
        const NodeSet adj = unoriented.adjacent_nodes(z);
        for (std::size_t i = 0; i < adj.size(); ++i) {
            for (std::size_t j = i + 1; j < adj.size(); ++j) {
                const int x = adj[i], y = adj[j];
                if (unoriented.adjacent(x, y)) continue;
                const auto sep = skeleton.sepsets.find({x, y});
                if (sep != skeleton.sepsets.end() && contains(sep->second, z)) continue;
                if (config.conflicts == ColliderConflict::keep_bidirected) {
                    g.add_arrowhead(x, z);
                    g.add_arrowhead(y, z);
                } else {
                    g.add_directed(x, z);
                    g.add_directed(y, z);
                }
            }
        }
    }
    meek_close(g);
    return g;
}

template <typename IndependenceTest>
PatternGraph pc_search_with(int node_count, IndependenceTest&& independent, const PcConfig& config = {}) {
    return orient_pc_skeleton(pc_skeleton(node_count, std::forward<IndependenceTest>(independent), config), config);
}

/// Fisher-z test on a covariance summary; a failed test (singular block)
/// counts as dependence.
inline auto fisher_z_test(const CovarianceSummary& cov, double alpha) {
    return [&cov, alpha](int x, int y, const NodeSet& given) {
        try {
            return fisher_z_independent(cov, x, y, given, alpha);
        } catch (const SingularityError&) {
            return false;
        }
    };
}

inline PatternGraph pc_search(const CovarianceSummary& cov, const PcConfig& config = {}) {
    return pc_search_with(cov.variable_count(), fisher_z_test(cov, config.alpha), config);
}

inline EdgeList pc_adjacencies(const CovarianceSummary& cov, const PcConfig& config = {}) {
    return pc_skeleton(cov.variable_count(), fisher_z_test(cov, config.alpha), config).graph.adjacencies();
}

}  // namespace npnsearch
