#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace npnsearch;

TEST(Metrics, HandComputedExample) {
    const PatternGraph truth = dag_to_cpdag(Dag(4, {{0, 2}, {1, 2}, {2, 3}}));
    PatternGraph est(4);
    est.add_directed(0, 2);  // correct adjacency, correct arrow
    est.add_directed(2, 1);  // correct adjacency, wrong arrow
    est.add_undirected(0, 3);  // false adjacency
    const MetricsReport r = compute_metrics(est, truth);
    EXPECT_DOUBLE_EQ(r.adj_fpr, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(r.adj_rr, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(r.arrow_fpr, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(r.arrow_rr, 1.0 / 3.0);
}

TEST(Metrics, PerfectEstimate) {
    const PatternGraph truth = dag_to_cpdag(random_dag(8, 12, 1));
    EXPECT_EQ(compute_metrics(truth, truth), (MetricsReport{0.0, 1.0, 0.0, 1.0}));
}

TEST(Metrics, ArrowFalsePositiveRateCanExceedOne) {
    const PatternGraph truth = dag_to_cpdag(Dag(3, {{0, 2}, {1, 2}}));
    PatternGraph est(3);
    est.add_bidirected(0, 2);
    est.add_bidirected(1, 2);
    est.add_bidirected(0, 1);
    const MetricsReport r = compute_metrics(est, truth);
    EXPECT_DOUBLE_EQ(r.arrow_fpr, 2.0);
    EXPECT_DOUBLE_EQ(r.arrow_rr, 1.0);
    EXPECT_DOUBLE_EQ(r.adj_fpr, 0.5);
}

TEST(Metrics, ZeroDenominators) {
    const PatternGraph empty(3);
    EXPECT_EQ(compute_metrics(empty, empty), (MetricsReport{}));
    PatternGraph est(3);
    est.add_undirected(0, 1);
    EXPECT_THROW(compute_metrics(est, empty), DenominatorError);

    PatternGraph undirected_truth(3);
    undirected_truth.add_undirected(0, 1);
    PatternGraph arrow(3);
    arrow.add_directed(0, 1);
    EXPECT_THROW(compute_metrics(arrow, undirected_truth), DenominatorError);
    EXPECT_NO_THROW(compute_metrics(undirected_truth, undirected_truth));
}

TEST(Metrics, NodeCountMismatch) {
    EXPECT_THROW(compute_metrics(PatternGraph(3), PatternGraph(4)), GraphError);
}

TEST(Metrics, MatchesEndpointCounter) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + trial % 5;
        const PatternGraph truth = dag_to_cpdag(random_dag(n, 1 + rng() % (n * (n - 1) / 2), rng()));
        const PatternGraph est = oracle::random_pattern(n, rng);
        const oracle::Counts c = oracle::count_endpoints(est, truth);
        if (c.true_arrows == 0 && c.est_arrows > 0) {
            EXPECT_THROW(compute_metrics(est, truth), DenominatorError);
            continue;
        }
        EXPECT_EQ(compute_metrics(est, truth), oracle::metrics(est, truth));
    }
}

TEST(Aggregate, ComponentwiseMeanAndEmptyError) {
    const std::vector<MetricsReport> rs{{0.0, 1.0, 0.5, 0.25}, {1.0, 0.5, 1.5, 0.75}};
    EXPECT_EQ(aggregate(rs), (MetricsReport{0.5, 0.75, 1.0, 0.5}));
    EXPECT_THROW(aggregate(std::span<const MetricsReport>{}), EmptyAggregateError);
}
