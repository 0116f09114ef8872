#pragma once

// Structural equation model simulation: each node is a connection function
// of its parents plus an independent disturbance.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "npnsearch/errors.hpp"
#include "npnsearch/graph.hpp"
#include "npnsearch/npn.hpp"

namespace npnsearch {

enum class DisturbanceKind { G, NG1, NG2 };
enum class ConnectionKind { L, NL1, NL2 };

// Gamma is parameterized by shape and scale (mean = shape * scale).
inline constexpr double kGammaShape = 2.0;
inline constexpr double kGammaScale = 5.0;
// Mixture components N(-1, v) and N(+1, v) with equal weights; v is a variance.
inline constexpr double kMixtureMean = 1.0;
inline constexpr double kMixtureVariance = 0.5;
// NL1 connection exponent, applied as sign(x) * |x|^p.
inline constexpr double kNl1Exponent = 1.5;

inline std::string_view to_string(DisturbanceKind kind) {
    switch (kind) {
        case DisturbanceKind::G: return "G";
        case DisturbanceKind::NG1: return "NG1";
        case DisturbanceKind::NG2: return "NG2";
    }
    return "?";
}

inline std::string_view to_string(ConnectionKind kind) {
    switch (kind) {
        case ConnectionKind::L: return "L";
        case ConnectionKind::NL1: return "NL1";
        case ConnectionKind::NL2: return "NL2";
    }
    return "?";
}

inline DisturbanceKind parse_disturbance(std::string_view s) {
    if (s == "G" || s == "N") return DisturbanceKind::G;
    if (s == "NG1") return DisturbanceKind::NG1;
    if (s == "NG2") return DisturbanceKind::NG2;
    throw ParseError("unknown disturbance kind '" + std::string(s) + "'");
}

inline ConnectionKind parse_connection(std::string_view s) {
    if (s == "L") return ConnectionKind::L;
    if (s == "NL1") return ConnectionKind::NL1;
    if (s == "NL2") return ConnectionKind::NL2;
    throw ParseError("unknown connection kind '" + std::string(s) + "'");
}

using Rng = std::mt19937_64;

inline double sample_disturbance(DisturbanceKind kind, Rng& rng) {
    switch (kind) {
        case DisturbanceKind::G: return std::normal_distribution<double>(0.0, 1.0)(rng);
        case DisturbanceKind::NG1: return std::gamma_distribution<double>(kGammaShape, kGammaScale)(rng);
        case DisturbanceKind::NG2: {
            const bool upper = std::bernoulli_distribution(0.5)(rng);
            return std::normal_distribution<double>(upper ? kMixtureMean : -kMixtureMean,
                                                    std::sqrt(kMixtureVariance))(rng);
        }
    }
    throw std::logic_error("unhandled disturbance kind");
}

inline double connection_term(ConnectionKind kind, double x) {
    switch (kind) {
        case ConnectionKind::L: return x;
        case ConnectionKind::NL1: return std::copysign(std::pow(std::abs(x), kNl1Exponent), x);
        case ConnectionKind::NL2: return std::sin(x);
    }
    throw std::logic_error("unhandled connection kind");
}

struct ParentTerm {
    int parent;
    double coefficient;
};

struct SemModel {
    Dag dag;
    /// terms[child] lists (parent, coefficient) in ascending parent order.
    std::vector<std::vector<ParentTerm>> terms;
    DisturbanceKind disturbance = DisturbanceKind::G;
    ConnectionKind connection = ConnectionKind::L;

    /// Coefficients in the order of dag.edges().
    std::vector<double> coefficients() const {
        std::vector<double> out;
        for (auto [from, to] : dag.edges())
            for (const ParentTerm& t : terms[to])
                if (t.parent == from) out.push_back(t.coefficient);
        return out;
    }
};

/// Draws one U(-1, 1) coefficient per edge, in dag.edges() order.
inline SemModel parameterize(const Dag& dag, DisturbanceKind disturbance, ConnectionKind connection,
                             std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> coefficient(-1.0, 1.0);
    SemModel model{dag, std::vector<std::vector<ParentTerm>>(dag.node_count()), disturbance, connection};
    for (auto [from, to] : dag.edges()) {
        double a = coefficient(rng);
        while (a == -1.0) a = coefficient(rng);  // keep the interval open
        model.terms[to].push_back({from, a});
    }
    return model;
}

/// With SemModel::coefficients order; for tests and fixtures.
inline SemModel make_model(const Dag& dag, const std::vector<double>& coefficients, DisturbanceKind disturbance,
                           ConnectionKind connection) {
    const EdgeList edges = dag.edges();
    if (coefficients.size() != edges.size()) throw std::invalid_argument("one coefficient per edge required");
    SemModel model{dag, std::vector<std::vector<ParentTerm>>(dag.node_count()), disturbance, connection};
    for (std::size_t k = 0; k < edges.size(); ++k) model.terms[edges[k].second].push_back({edges[k].first, coefficients[k]});
    return model;
}

/// Recursive i.i.d. simulation in topological order.
inline DataMatrix simulate(const SemModel& model, std::size_t cases, std::uint64_t seed) {
    if (cases == 0) throw InsufficientDataError("at least one case is required");
    const std::vector<int> order = model.dag.topological_order();
    Rng rng(seed);
    DataMatrix data(static_cast<Eigen::Index>(cases), model.dag.node_count());
    for (Eigen::Index row = 0; row < data.rows(); ++row) {
        for (int node : order) {
            double value = sample_disturbance(model.disturbance, rng);
            for (const ParentTerm& t : model.terms[node])
                value += t.coefficient * connection_term(model.connection, data(row, t.parent));
            if (!std::isfinite(value))
                throw SimulationOverflowError("non-finite value at case " + std::to_string(row) + ", node " +
                                              std::to_string(node));
            data(row, node) = value;
        }
    }
    return data;
}

}  // namespace npnsearch
