#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"

using namespace npnsearch;

TEST(Dag, RejectsCyclesSelfLoopsAndBadIndices) {
    EXPECT_THROW(Dag(3, {{0, 1}, {1, 2}, {2, 0}}), GraphError);
    EXPECT_THROW(Dag(2, {{0, 0}}), GraphError);
    EXPECT_THROW(Dag(2, {{0, 2}}), GraphError);
    EXPECT_THROW(Dag(2, {{0, 1}, {0, 1}}), GraphError);
}

TEST(Dag, ParentsChildrenAndSortedEdges) {
    const Dag d(4, {{2, 3}, {0, 1}, {0, 2}, {1, 3}});
    EXPECT_EQ(d.edge_count(), 4u);
    EXPECT_EQ(d.edges(), (EdgeList{{0, 1}, {0, 2}, {1, 3}, {2, 3}}));
    EXPECT_EQ(d.parents(3), (NodeSet{1, 2}));
    EXPECT_EQ(d.children(0), (NodeSet{1, 2}));
    EXPECT_TRUE(d.adjacent(3, 1));
    EXPECT_FALSE(d.adjacent(0, 3));
}

TEST(Dag, TopologicalOrderRespectsEdges) {
    const Dag d = random_dag(30, 60, 11);
    const auto order = d.topological_order();
    std::vector<int> position(30);
    for (int k = 0; k < 30; ++k) position[order[k]] = k;
    for (auto [a, b] : d.edges()) EXPECT_LT(position[a], position[b]);
}

TEST(RandomDag, ExactEdgeCountAndDeterminism) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Dag d = random_dag(12, 20, seed);
        EXPECT_EQ(d.edge_count(), 20u);
        EXPECT_EQ(d, random_dag(12, 20, seed));
    }
    EXPECT_NE(random_dag(12, 20, 1), random_dag(12, 20, 2));
}

TEST(RandomDag, CapacityAndNodeCountErrors) {
    EXPECT_NO_THROW(random_dag(5, 10, 0));
    EXPECT_THROW(random_dag(5, 11, 0), CapacityError);
    EXPECT_THROW(random_dag(0, 0, 0), GraphError);
    EXPECT_EQ(random_dag(1, 0, 0).edge_count(), 0u);
}

TEST(RandomDag, EveryPairEventuallyUsedInBothDirections) {
    std::set<std::pair<int, int>> seen;
    for (std::uint64_t seed = 0; seed < 400; ++seed)
        for (auto e : random_dag(4, 2, seed).edges()) seen.insert(e);
    EXPECT_EQ(seen.size(), 12u);
}

TEST(PatternGraph, EdgeKindsAndEndpoints) {
    PatternGraph g(4);
    g.add_directed(0, 1);
    g.add_undirected(1, 2);
    g.add_bidirected(2, 3);
    EXPECT_EQ(g.endpoint(0, 1), Mark::arrow);
    EXPECT_EQ(g.endpoint(1, 0), Mark::tail);
    EXPECT_TRUE(g.directed(0, 1));
    EXPECT_FALSE(g.directed(1, 0));
    EXPECT_TRUE(g.undirected(2, 1));
    EXPECT_TRUE(g.bidirected(3, 2));
    EXPECT_TRUE(g.has_bidirected());
    EXPECT_EQ(g.edge_count(), 3u);
    EXPECT_EQ(g.parents(1), (NodeSet{0}));
    EXPECT_EQ(g.neighbors(1), (NodeSet{2}));
    EXPECT_EQ(g.adjacent_nodes(2), (NodeSet{1, 3}));
    g.remove_edge(1, 2);
    EXPECT_FALSE(g.adjacent(1, 2));
}

TEST(Cpdag, ChainForkAndCollider) {
    const PatternGraph chain = dag_to_cpdag(Dag(3, {{0, 1}, {1, 2}}));
    EXPECT_TRUE(chain.undirected(0, 1));
    EXPECT_TRUE(chain.undirected(1, 2));

    const PatternGraph collider = dag_to_cpdag(Dag(3, {{0, 2}, {1, 2}}));
    EXPECT_TRUE(collider.directed(0, 2));
    EXPECT_TRUE(collider.directed(1, 2));

    const PatternGraph shielded = dag_to_cpdag(Dag(3, {{0, 1}, {0, 2}, {1, 2}}));
    EXPECT_EQ(shielded, PatternGraph::complete_undirected(3));
}

TEST(Cpdag, MeekRuleOnePropagatesBelowCollider) {
    const PatternGraph g = dag_to_cpdag(Dag(4, {{0, 2}, {1, 2}, {2, 3}}));
    EXPECT_TRUE(g.directed(2, 3));
}

TEST(Cpdag, MatchesEquivalenceClassEnumeration) {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const int n = 2 + static_cast<int>(seed % 6);
        const std::size_t max_e = static_cast<std::size_t>(n) * (n - 1) / 2;
        const Dag d = random_dag(n, std::min<std::size_t>(max_e, seed % 9), seed);
        ASSERT_EQ(dag_to_cpdag(d), oracle::cpdag(d)) << "seed " << seed;
    }
}

TEST(ConsistentExtension, RoundTripsThroughCpdag) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const Dag d = random_dag(9, seed % 20, seed);
        const PatternGraph p = dag_to_cpdag(d);
        const auto ext = consistent_extension(p);
        ASSERT_TRUE(ext.has_value());
        EXPECT_EQ(dag_to_cpdag(*ext), p);
    }
}

TEST(ConsistentExtension, FailsWithoutExtension) {
    // Undirected 4-cycle has no extension without a new v-structure.
    PatternGraph g(4);
    g.add_undirected(0, 1);
    g.add_undirected(1, 2);
    g.add_undirected(2, 3);
    g.add_undirected(3, 0);
    EXPECT_FALSE(consistent_extension(g).has_value());

    PatternGraph cyclic(3);
    cyclic.add_directed(0, 1);
    cyclic.add_directed(1, 2);
    cyclic.add_directed(2, 0);
    EXPECT_FALSE(consistent_extension(cyclic).has_value());
}

TEST(DSeparation, TextbookCases) {
    const Dag collider(3, {{0, 2}, {1, 2}});
    EXPECT_TRUE(d_separated(collider, 0, 1, {}));
    EXPECT_FALSE(d_separated(collider, 0, 1, {2}));

    const Dag chain(4, {{0, 1}, {1, 2}, {2, 3}});
    EXPECT_FALSE(d_separated(chain, 0, 3, {}));
    EXPECT_TRUE(d_separated(chain, 0, 3, {1}));

    const Dag descendant(4, {{0, 2}, {1, 2}, {2, 3}});
    EXPECT_FALSE(d_separated(descendant, 0, 1, {3}));
}

TEST(DSeparation, MatchesPathEnumeration) {
    std::mt19937_64 rng(5);
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        const int n = 3 + static_cast<int>(seed % 5);
        const Dag d = random_dag(n, std::min<std::size_t>(seed % 10, static_cast<std::size_t>(n) * (n - 1) / 2), seed);
        for (int x = 0; x < n; ++x) {
            for (int y = x + 1; y < n; ++y) {
                NodeSet given;
                for (int z = 0; z < n; ++z)
                    if (z != x && z != y && rng() % 3 == 0) given.push_back(z);
                ASSERT_EQ(d_separated(d, x, y, given), oracle::d_separated(d, x, y, given))
                    << "seed " << seed << " x " << x << " y " << y;
            }
        }
    }
}

TEST(GraphIo, RoundTripAndErrors) {
    PatternGraph g(5);
    g.add_directed(3, 1);
    g.add_undirected(0, 4);
    g.add_bidirected(2, 4);
    std::istringstream in(to_string(g));
    EXPECT_EQ(read_pattern(in), g);

    std::istringstream no_header("0 -> 1\n");
    EXPECT_THROW(read_pattern(no_header), ParseError);
    std::istringstream bad_op("nodes: 2\n0 => 1\n");
    EXPECT_THROW(read_pattern(bad_op), ParseError);
    std::istringstream out_of_range("nodes: 2\n0 -> 5\n");
    EXPECT_THROW(read_pattern(out_of_range), ParseError);
}

TEST(GraphIo, DagWritesDirectedEdges) {
    std::ostringstream out;
    write_graph(out, Dag(3, {{2, 0}}));
    EXPECT_EQ(out.str(), "nodes: 3\n2 -> 0\n");
}

TEST(SetHelpers, SortedSetOperations) {
    EXPECT_EQ(set_union({1, 3}, {2, 3}), (NodeSet{1, 2, 3}));
    EXPECT_EQ(set_difference({1, 2, 3}, {2}), (NodeSet{1, 3}));
    EXPECT_EQ(set_intersection({1, 2, 3}, {0, 2, 3}), (NodeSet{2, 3}));
    EXPECT_EQ(with_node({1, 5}, 3), (NodeSet{1, 3, 5}));
    EXPECT_EQ(without_node({1, 3, 5}, 3), (NodeSet{1, 5}));
}
