#pragma once

// Gaussian substrate shared by PC and GES: sample covariance, partial
// correlation, the Fisher-z independence test and decomposable AIC/BIC
// local scores.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <unordered_map>
#include <vector>

#include "npnsearch/errors.hpp"
#include "npnsearch/graph.hpp"
#include "npnsearch/npn.hpp"

namespace npnsearch {

/// Sample covariance plus the sample size it was computed from. The
/// correlation matrix is cached alongside; every numeric routine below
/// works on correlations and rescales, which keeps badly scaled columns
/// (heavy-tailed simulations reach 1e60 and beyond) well conditioned.
class CovarianceSummary {
public:
    CovarianceSummary(Eigen::MatrixXd matrix, std::size_t sample_count)
        : matrix_(std::move(matrix)), sample_count_(sample_count) {
        if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0)
            throw std::invalid_argument("covariance matrix must be square and nonempty");
        if (sample_count_ == 0) throw InsufficientDataError("sample count must be positive");
        const Eigen::VectorXd diag = matrix_.diagonal();
        for (Eigen::Index i = 0; i < diag.size(); ++i)
            if (!(diag[i] > 0.0) || !std::isfinite(diag[i]))
                throw SingularityError("variable " + std::to_string(i) + " has nonpositive variance");
        const Eigen::VectorXd inv_sd = diag.cwiseSqrt().cwiseInverse();
        correlation_ = inv_sd.asDiagonal() * matrix_ * inv_sd.asDiagonal();
        correlation_.diagonal().setOnes();
    }

    int variable_count() const { return static_cast<int>(matrix_.rows()); }
    std::size_t sample_count() const { return sample_count_; }
    const Eigen::MatrixXd& matrix() const { return matrix_; }
    const Eigen::MatrixXd& correlation() const { return correlation_; }

private:
    Eigen::MatrixXd matrix_;
    Eigen::MatrixXd correlation_;
    std::size_t sample_count_;
};

/// Sample covariance with 1/(n-1) normalization, symmetric by construction.
inline CovarianceSummary covariance(const DataMatrix& data) {
    if (data.rows() < 2) throw InsufficientDataError("covariance needs at least 2 rows");
    const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
    Eigen::MatrixXd cov(data.cols(), data.cols());
    cov.triangularView<Eigen::Lower>() = (centered.adjoint() * centered) / static_cast<double>(data.rows() - 1);
    cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
    return CovarianceSummary(std::move(cov), static_cast<std::size_t>(data.rows()));
}

namespace detail {

inline constexpr double kPivotFloor = 1e-12;

inline Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<int>& rows, const std::vector<int>& cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
    return out;
}

/// Cholesky factor of a correlation submatrix; throws on (near) singularity.
inline Eigen::LLT<Eigen::MatrixXd> factor(const Eigen::MatrixXd& block) {
    Eigen::LLT<Eigen::MatrixXd> llt(block);
    if (llt.info() != Eigen::Success) throw SingularityError("conditioning submatrix is not positive definite");
    const auto diag = llt.matrixLLT().diagonal();
    for (Eigen::Index i = 0; i < diag.size(); ++i)
        if (!(diag[i] * diag[i] > kPivotFloor)) throw SingularityError("conditioning submatrix is singular");
    return llt;
}

}  // namespace detail

/// Correlation of x and y given `given`, from the inverse of the (x, y, given) block.
inline double partial_correlation(const CovarianceSummary& cov, int x, int y, const NodeSet& given) {
    const Eigen::MatrixXd& r = cov.correlation();
    if (given.empty()) return std::clamp(r(x, y), -1.0, 1.0);
    const std::vector<int> pair{x, y};
    const Eigen::MatrixXd rss = detail::submatrix(r, given, given);
    const Eigen::MatrixXd rsp = detail::submatrix(r, given, pair);
    const auto llt = detail::factor(rss);
    const Eigen::Matrix2d residual = detail::submatrix(r, pair, pair) - rsp.transpose() * llt.solve(rsp);
    if (!(residual(0, 0) > detail::kPivotFloor) || !(residual(1, 1) > detail::kPivotFloor))
        throw SingularityError("residual variance vanishes given the conditioning set");
    return std::clamp(residual(0, 1) / std::sqrt(residual(0, 0) * residual(1, 1)), -1.0, 1.0);
}

/// Fisher z statistic sqrt(n - |s| - 3) * |atanh(r)|; +inf when |r| >= 1.
inline double fisher_z_statistic(double r, std::size_t sample_count, std::size_t conditioning_size) {
    if (sample_count < conditioning_size + 4)
        throw InsufficientDataError("Fisher z needs n - |s| - 3 >= 1 (n = " + std::to_string(sample_count) +
                                    ", |s| = " + std::to_string(conditioning_size) + ")");
    if (std::abs(r) >= 1.0) return HUGE_VAL;
    const double dof = static_cast<double>(sample_count - conditioning_size - 3);
    return std::sqrt(dof) * std::abs(0.5 * std::log((1.0 + r) / (1.0 - r)));
}

/// True when the test fails to reject independence at level alpha.
inline bool fisher_z_independent(const CovarianceSummary& cov, int x, int y, const NodeSet& given, double alpha) {
    const double stat = fisher_z_statistic(partial_correlation(cov, x, y, given), cov.sample_count(), given.size());
    return stat <= normal_quantile(1.0 - alpha / 2.0);
}

enum class ScoreKind { AIC, BIC };

struct ScoreConfig {
    ScoreKind kind = ScoreKind::BIC;
    double penalty_discount = 1.0;
};

inline constexpr double kResidualVarianceFloor = 1e-10;

/// Residual variance of `node` regressed on `parents`.
inline double residual_variance(const CovarianceSummary& cov, int node, const NodeSet& parents) {
    const double var = cov.matrix()(node, node);
    if (parents.empty()) return var;
    const Eigen::MatrixXd& r = cov.correlation();
    const Eigen::MatrixXd rpp = detail::submatrix(r, parents, parents);
    const Eigen::MatrixXd rpn = detail::submatrix(r, parents, {node});
    const auto llt = detail::factor(rpp);
    const double explained = (rpn.transpose() * llt.solve(rpn))(0, 0);
    return var * (1.0 - explained);
}

/// 2L - penalty for one node given its parents, k = |parents| + 1.
inline double local_score(const CovarianceSummary& cov, int node, const NodeSet& parents, const ScoreConfig& config) {
    const double n = static_cast<double>(cov.sample_count());
    const double sigma2 = std::max(residual_variance(cov, node, parents), kResidualVarianceFloor);
    const double two_log_likelihood = -n * (std::log(2.0 * std::numbers::pi * sigma2) + 1.0);
    const double k = static_cast<double>(parents.size() + 1);
    const double penalty = config.kind == ScoreKind::AIC ? 2.0 * k : k * std::log(n);
    return two_log_likelihood - config.penalty_discount * penalty;
}

/// Sum of local scores over the DAG's families.
inline double total_score(const CovarianceSummary& cov, const Dag& dag, const ScoreConfig& config) {
    double total = 0.0;
    for (int v = 0; v < dag.node_count(); ++v) total += local_score(cov, v, dag.parents(v), config);
    return total;
}

/// Memoized local_score keyed by (node, parent set). Singular parent sets
/// come back as NaN instead of throwing.
class LocalScoreCache {
public:
    LocalScoreCache(const CovarianceSummary& cov, ScoreConfig config) : cov_(&cov), config_(config) {}

    double operator()(int node, const NodeSet& parents) {
        Key key{node, parents};
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        double s;
        try {
            s = local_score(*cov_, node, parents, config_);
        } catch (const SingularityError&) {
            s = std::nan("");
        }
        cache_.emplace(std::move(key), s);
        return s;
    }

    const CovarianceSummary& covariance() const { return *cov_; }
    const ScoreConfig& config() const { return config_; }

private:
    struct Key {
        int node;
        NodeSet parents;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::uint64_t h = mix(static_cast<std::uint64_t>(k.node) + 0x9e3779b97f4a7c15ULL);
            for (int p : k.parents) h = mix(h ^ (static_cast<std::uint64_t>(p) + 0x9e3779b97f4a7c15ULL));
            return static_cast<std::size_t>(h);
        }
        static std::uint64_t mix(std::uint64_t x) {
            x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
            x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
            return x ^ (x >> 31);
        }
    };

    const CovarianceSummary* cov_;
    ScoreConfig config_;
    std::unordered_map<Key, double, KeyHash> cache_;
};

}  // namespace npnsearch
