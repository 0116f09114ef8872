#pragma once

#include <set>
#include <span>
#include <utility>

#include "npnsearch/errors.hpp"
#include "npnsearch/graph.hpp"

namespace npnsearch {

/// Adjacency and arrowhead false-positive and recovery rates of an
/// estimated pattern. All four ratios divide by counts in the true
/// pattern, so the false-positive rates are unbounded above.
struct MetricsReport {
    double adj_fpr = 0.0;
    double adj_rr = 0.0;
    double arrow_fpr = 0.0;
    double arrow_rr = 0.0;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

namespace detail {

/// Ordered pairs (x, y) with an arrowhead at y on an x-y adjacency.
inline std::set<std::pair<int, int>> arrow_marks(const PatternGraph& g) {
    std::set<std::pair<int, int>> out;
    for (auto [i, j] : g.adjacencies()) {
        if (g.endpoint(i, j) == Mark::arrow) out.emplace(i, j);
        if (g.endpoint(j, i) == Mark::arrow) out.emplace(j, i);
    }
    return out;
}

inline double ratio(std::size_t numerator, std::size_t denominator, const char* what) {
    if (denominator == 0) {
        if (numerator == 0) return 0.0;
        throw DenominatorError(std::string("true pattern has no ") + what);
    }
    return static_cast<double>(numerator) / static_cast<double>(denominator);
}

}  // namespace detail

inline MetricsReport compute_metrics(const PatternGraph& estimated, const PatternGraph& truth) {
    if (estimated.node_count() != truth.node_count()) throw GraphError("patterns have different node counts");
    std::size_t adj_true = 0, adj_false = 0;
    for (auto [i, j] : estimated.adjacencies()) (truth.adjacent(i, j) ? adj_true : adj_false)++;
    const std::size_t adj_total = truth.edge_count();

    const auto est_arrows = detail::arrow_marks(estimated);
    const auto true_arrows = detail::arrow_marks(truth);
    std::size_t arrow_true = 0, arrow_false = 0;
    for (const auto& a : est_arrows) (true_arrows.contains(a) ? arrow_true : arrow_false)++;

    return MetricsReport{
        detail::ratio(adj_false, adj_total, "adjacencies"),
        detail::ratio(adj_true, adj_total, "adjacencies"),
        detail::ratio(arrow_false, true_arrows.size(), "arrowheads"),
        detail::ratio(arrow_true, true_arrows.size(), "arrowheads"),
    };
}

/// Componentwise mean.
inline MetricsReport aggregate(std::span<const MetricsReport> reports) {
    if (reports.empty()) throw EmptyAggregateError("cannot aggregate zero reports");
    MetricsReport sum;
    for (const MetricsReport& r : reports) {
        sum.adj_fpr += r.adj_fpr;
        sum.adj_rr += r.adj_rr;
        sum.arrow_fpr += r.arrow_fpr;
        sum.arrow_rr += r.arrow_rr;
    }
    const double k = static_cast<double>(reports.size());
    return {sum.adj_fpr / k, sum.adj_rr / k, sum.arrow_fpr / k, sum.arrow_rr / k};
}

}  // namespace npnsearch
