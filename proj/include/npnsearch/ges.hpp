#pragma once

// Greedy Equivalence Search over CPDAGs with Chickering's Insert and
// Delete operators, scored by decomposable Gaussian AIC/BIC. Optionally
// restricted to a fixed set of admissible adjacencies (the PC-GES hybrid).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "npnsearch/gauss.hpp"
#include "npnsearch/graph.hpp"
#include "npnsearch/pc.hpp"

namespace npnsearch {

struct GesConfig {
    ScoreConfig score;
    std::optional<EdgeList> allowed_adjacencies;  // unrestricted when empty
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

enum class GesPhase { forward, backward };

/// One applied operator, reported after the pattern has been re-completed.
struct GesStep {
    GesPhase phase;
    int x;
    int y;
    NodeSet subset;  // T for Insert(x, y, T), H for Delete(x, y, H)
    double delta;
    const PatternGraph& pattern;
};

using GesObserver = std::function<void(const GesStep&)>;

namespace detail {

class GesSearch {
public:
    GesSearch(const CovarianceSummary& cov, const GesConfig& config)
        : score_(cov, config.score), config_(config), n_(cov.variable_count()), graph_(n_) {
        if (config.allowed_adjacencies) {
            allowed_.assign(static_cast<std::size_t>(n_) * n_, false);
            for (auto [a, b] : *config.allowed_adjacencies) {
                allowed_[static_cast<std::size_t>(a) * n_ + b] = true;
                allowed_[static_cast<std::size_t>(b) * n_ + a] = true;
            }
        }
    }

    PatternGraph run(const GesObserver& observer) {
        while (forward_step(observer)) {}
        while (backward_step(observer)) {}
        return graph_;
    }

private:
    struct Move {
        double delta;
        int x;
        int y;
        NodeSet subset;
        NodeSet blocked;  // NA_yx union T, for the deferred path check
    };

    bool allowed(int a, int b) const {
        return allowed_.empty() || allowed_[static_cast<std::size_t>(a) * n_ + b];
    }

    bool is_clique(const NodeSet& nodes) const {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            for (std::size_t j = i + 1; j < nodes.size(); ++j)
                if (!graph_.adjacent(nodes[i], nodes[j])) return false;
        return true;
    }

    /// Visits every subset S of `pool` (ascending size, then lexicographic)
    /// such that base union S is a clique, given that base already is one.
    template <typename Visit>
    void for_each_clique_extension(const NodeSet& base, const NodeSet& pool, Visit&& visit) const {
        std::vector<NodeSet> level{NodeSet{}};
        visit(NodeSet{});
        while (!level.empty()) {
            std::vector<NodeSet> next;
            for (const NodeSet& s : level) {
                const int start = s.empty() ? -1 : s.back();
                for (int v : pool) {
                    if (v <= start) continue;
                    bool ok = true;
                    for (int b : base) ok = ok && graph_.adjacent(v, b);
                    for (int u : s) ok = ok && graph_.adjacent(v, u);
                    if (!ok) continue;
                    NodeSet grown = s;
                    grown.push_back(v);
                    next.push_back(std::move(grown));
                }
            }
            for (const NodeSet& s : next) visit(s);
            level = std::move(next);
        }
    }

    /// True if some semi-directed path from `from` reaches `to` avoiding `blocked`.
    bool semi_directed_path(int from, int to, const NodeSet& blocked) const {
        std::vector<bool> seen(n_, false);
        for (int b : blocked) seen[b] = true;
        std::vector<int> stack{from};
        seen[from] = true;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n_; ++v) {
                if (seen[v] || !(graph_.directed(u, v) || graph_.undirected(u, v))) continue;
                if (v == to) return true;
                seen[v] = true;
                stack.push_back(v);
            }
        }
        return false;
    }

    void snapshot() {
        neighbors_.assign(n_, {});
        adjacent_.assign(n_, {});
        parents_.assign(n_, {});
        for (int v = 0; v < n_; ++v) {
            neighbors_[v] = graph_.neighbors(v);
            adjacent_[v] = graph_.adjacent_nodes(v);
            parents_[v] = graph_.parents(v);
        }
    }

    /// Delta of Insert(x, y, {}) when y has no undirected neighbors; it then
    /// depends on Pa(y) alone, so the whole row is memoized per parent set.
    double simple_insert_delta(int x, int y) {
        InsertRow& row = insert_rows_[y];
        if (!row.valid || row.parents != parents_[y]) {
            row.parents = parents_[y];
            row.valid = true;
            row.delta.assign(n_, std::nan(""));
            const double base = score_(y, row.parents);
            for (int v = 0; v < n_; ++v)
                if (v != y && !contains(row.parents, v)) row.delta[v] = score_(y, with_node(row.parents, v)) - base;
        }
        return row.delta[x];
    }

    void recomplete() {
        auto extension = consistent_extension(graph_);
        if (!extension) throw std::logic_error("GES produced a pattern without a consistent extension");
        graph_ = dag_to_cpdag(*extension);
    }

    static void sort_moves(std::vector<Move>& moves) {
        std::stable_sort(moves.begin(), moves.end(), [](const Move& a, const Move& b) { return a.delta > b.delta; });
    }

    bool forward_step(const GesObserver& observer) {
        check_deadline(config_.deadline);
        snapshot();
        std::vector<Move> moves;
        for (int x = 0; x < n_; ++x) {
            for (int y = 0; y < n_; ++y) {
                if (x == y || graph_.adjacent(x, y) || !allowed(x, y)) continue;
                if (neighbors_[y].empty()) {
                    const double delta = simple_insert_delta(x, y);
                    if (delta > 0.0) moves.push_back({delta, x, y, {}, {}});
                    continue;
                }
                const NodeSet na = set_intersection(neighbors_[y], adjacent_[x]);
                if (!is_clique(na)) continue;
                const NodeSet pool = set_difference(neighbors_[y], adjacent_[x]);
                const NodeSet fixed = set_union(parents_[y], na);
                for_each_clique_extension(na, pool, [&](const NodeSet& t) {
                    const NodeSet without = set_union(fixed, t);
                    const double delta = score_(y, with_node(without, x)) - score_(y, without);
                    if (delta > 0.0) moves.push_back({delta, x, y, t, set_union(na, t)});
                });
            }
        }
        sort_moves(moves);
        for (const Move& m : moves) {
            if (semi_directed_path(m.y, m.x, m.blocked)) continue;
            graph_.add_directed(m.x, m.y);
            for (int t : m.subset) graph_.add_directed(t, m.y);
            recomplete();
            if (observer) observer({GesPhase::forward, m.x, m.y, m.subset, m.delta, graph_});
            return true;
        }
        return false;
    }

    bool backward_step(const GesObserver& observer) {
        check_deadline(config_.deadline);
        snapshot();
        std::vector<Move> moves;
        for (int x = 0; x < n_; ++x) {
            for (int y = 0; y < n_; ++y) {
                if (x == y || !(graph_.directed(x, y) || graph_.undirected(x, y))) continue;
                const NodeSet na = set_intersection(neighbors_[y], adjacent_[x]);
                const NodeSet others = without_node(parents_[y], x);
                for_each_clique_extension({}, na, [&](const NodeSet& kept) {
                    const NodeSet without = set_union(others, kept);
                    const double delta = score_(y, without) - score_(y, with_node(without, x));
                    if (delta > 0.0) moves.push_back({delta, x, y, set_difference(na, kept), {}});
                });
            }
        }
        sort_moves(moves);
        if (moves.empty()) return false;
        const Move& m = moves.front();
        graph_.remove_edge(m.x, m.y);
        for (int h : m.subset) {
            if (graph_.undirected(m.y, h)) graph_.add_directed(m.y, h);
            if (graph_.undirected(m.x, h)) graph_.add_directed(m.x, h);
        }
        recomplete();
        if (observer) observer({GesPhase::backward, m.x, m.y, m.subset, m.delta, graph_});
        return true;
    }

    LocalScoreCache score_;
    const GesConfig& config_;
    int n_;
    PatternGraph graph_;
    std::vector<bool> allowed_;
    std::vector<NodeSet> neighbors_, adjacent_, parents_;

    struct InsertRow {
        bool valid = false;
        NodeSet parents;
        std::vector<double> delta;
    };
    std::vector<InsertRow> insert_rows_ = std::vector<InsertRow>(n_);
};

}  // namespace detail

/// Two-phase GES from the empty pattern. Ties between equal-delta moves go
/// to the first in (x, y, subset) enumeration order.
inline PatternGraph ges_search(const CovarianceSummary& cov, const GesConfig& config, const GesObserver& observer = {}) {
    return detail::GesSearch(cov, config).run(observer);
}

/// GES restricted to the adjacencies PC's skeleton phase keeps.
inline PatternGraph pc_ges_search(const CovarianceSummary& cov, const PcConfig& pc_config, const ScoreConfig& score,
                                  std::optional<std::chrono::steady_clock::time_point> deadline = {}) {
    PcConfig pc = pc_config;
    if (deadline) pc.deadline = deadline;
    return ges_search(cov, GesConfig{score, pc_adjacencies(cov, pc), deadline});
}

}  // namespace npnsearch
