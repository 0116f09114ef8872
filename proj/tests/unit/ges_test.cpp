#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace npnsearch;

namespace {

CovarianceSummary linear_cov(const Dag& d, std::size_t cases, std::uint64_t seed) {
    return covariance(simulate(parameterize(d, DisturbanceKind::G, ConnectionKind::L, seed), cases, seed + 1));
}

double pattern_score(const CovarianceSummary& cov, const PatternGraph& p, const ScoreConfig& s) {
    return total_score(cov, *consistent_extension(p), s);
}

}  // namespace

TEST(Ges, RecoversSmallGraphAtLargeSample) {
    const Dag d(5, {{0, 2}, {1, 2}, {2, 3}, {3, 4}});
    const SemModel m = make_model(d, {0.7, -0.7, 0.6, 0.8}, DisturbanceKind::G, ConnectionKind::L);
    const CovarianceSummary cov = covariance(simulate(m, 20000, 4));
    EXPECT_EQ(ges_search(cov, {}), dag_to_cpdag(d));
}

TEST(Ges, EveryStepImprovesTheScoreByItsDelta) {
    const CovarianceSummary cov = linear_cov(random_dag(8, 10, 2), 500, 3);
    const ScoreConfig score{ScoreKind::BIC, 1.0};
    double previous = pattern_score(cov, PatternGraph(8), score);
    int forward = 0, backward = 0;
    bool in_backward = false;
    ges_search(cov, GesConfig{score}, [&](const GesStep& step) {
        EXPECT_GT(step.delta, 0.0);
        if (step.phase == GesPhase::backward) in_backward = true;
        else EXPECT_FALSE(in_backward) << "forward step after backward phase began";
        (step.phase == GesPhase::forward ? forward : backward)++;
        const double now = pattern_score(cov, step.pattern, score);
        EXPECT_NEAR(now - previous, step.delta, 1e-6 * std::max(1.0, std::abs(now)));
        previous = now;
    });
    EXPECT_GT(forward, 0);
}

TEST(Ges, MatchesExhaustiveSearchOnFourNodes) {
    int matches = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const CovarianceSummary cov = linear_cov(random_dag(4, seed % 7, seed), 10000, seed * 3 + 1);
        matches += ges_search(cov, {}) == oracle::best_cpdag(cov, {});
    }
    EXPECT_GE(matches, 19);
}

TEST(Ges, RestrictedSearchStaysInsideAllowedAdjacencies) {
    const CovarianceSummary cov = linear_cov(random_dag(10, 15, 5), 1000, 6);
    const EdgeList allowed{{0, 1}, {1, 2}, {2, 3}, {4, 7}, {5, 9}};
    GesConfig cfg;
    cfg.allowed_adjacencies = allowed;
    for (auto [a, b] : ges_search(cov, cfg).adjacencies())
        EXPECT_NE(std::find(allowed.begin(), allowed.end(), std::pair{a, b}), allowed.end());
}

TEST(Ges, PcGesIsSubsetOfPcSkeleton) {
    const CovarianceSummary cov = linear_cov(random_dag(15, 20, 7), 1000, 8);
    const EdgeList skeleton = pc_adjacencies(cov);
    for (auto e : pc_ges_search(cov, {}, {}).adjacencies())
        EXPECT_NE(std::find(skeleton.begin(), skeleton.end(), e), skeleton.end());
}

TEST(Ges, OutputIsACompletedPattern) {
    const CovarianceSummary cov = linear_cov(random_dag(12, 18, 9), 300, 10);
    const PatternGraph p = ges_search(cov, {ScoreConfig{ScoreKind::AIC, 1.0}});
    const auto ext = consistent_extension(p);
    ASSERT_TRUE(ext.has_value());
    EXPECT_EQ(dag_to_cpdag(*ext), p);
}

TEST(Ges, Deterministic) {
    const CovarianceSummary cov = linear_cov(random_dag(12, 18, 11), 300, 12);
    EXPECT_EQ(ges_search(cov, {}), ges_search(cov, {}));
}

TEST(Ges, IndependentVariablesYieldEmptyGraph) {
    const CovarianceSummary cov(Eigen::MatrixXd::Identity(5, 5), 1000);
    EXPECT_EQ(ges_search(cov, {}).edge_count(), 0u);
}

TEST(Ges, DeadlineRaisesTimeout) {
    const CovarianceSummary cov = linear_cov(random_dag(10, 15, 13), 300, 14);
    GesConfig cfg;
    cfg.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
    EXPECT_THROW(ges_search(cov, cfg), TimeoutError);
}
