#pragma once

// Nonparanormal (Gaussian copula) marginal transform. Each column is
// replaced by normal scores of its truncated empirical CDF, then shifted
// and scaled back to the column's own sample mean and variance.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "npnsearch/errors.hpp"

namespace npnsearch {

/// Cases in rows, variables in columns.
using DataMatrix = Eigen::MatrixXd;

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Standard normal quantile, Wichura's AS241 (PPND16); relative error ~1e-16.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -HUGE_VAL;
        if (p == 1.0) return HUGE_VAL;
        return std::nan("");
    }
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r + 6.7265770927008700853e+4) * r +
                    4.5921953931549871457e+4) * r + 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r + 3.9307895800092710610e+4) * r +
                    2.1213794301586595867e+4) * r + 5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = std::sqrt(-std::log(q < 0 ? p : 1.0 - p));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
                     1.27045825245236838258e+0) * r + 3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
                  4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
                (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
                     1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
                  2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
                     2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
                  5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
                (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
                     7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                  5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0 ? -value : value;
}

/// Truncation level used to winsorize the empirical CDF for n cases.
inline double npn_truncation(std::size_t n) {
    const double nd = static_cast<double>(n);
    return 1.0 / (4.0 * std::pow(nd, 0.25) * std::sqrt(std::numbers::pi * std::log(nd)));
}

/// 1-based ranks, ties receiving the average of the ranks they span.
inline std::vector<double> average_ranks(const Eigen::Ref<const Eigen::VectorXd>& values) {
    const auto n = static_cast<std::size_t>(values.size());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

namespace detail {

inline double sample_mean(const Eigen::Ref<const Eigen::VectorXd>& v) { return v.mean(); }

inline double sample_variance(const Eigen::Ref<const Eigen::VectorXd>& v) {
    const double m = v.mean();
    return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

}  // namespace detail

inline DataMatrix npn_transform(const DataMatrix& data) {
    const auto n = static_cast<std::size_t>(data.rows());
    if (n < 2) throw InsufficientDataError("nonparanormal transform needs at least 2 rows");
    const double delta = npn_truncation(n);
    DataMatrix out(data.rows(), data.cols());
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        const auto column = data.col(j);
        const double mean = detail::sample_mean(column);
        const double variance = detail::sample_variance(column);
        if (!(variance > 0.0))
            throw DegenerateColumnError("column " + std::to_string(j) + " has zero sample variance");
        const std::vector<double> ranks = average_ranks(column);
        Eigen::VectorXd scores(data.rows());
        for (std::size_t i = 0; i < n; ++i) {
            const double p = std::clamp(ranks[i] / static_cast<double>(n), delta, 1.0 - delta);
            scores[static_cast<Eigen::Index>(i)] = normal_quantile(p);
        }
        const double score_mean = detail::sample_mean(scores);
        const double score_sd = std::sqrt(detail::sample_variance(scores));
        if (!(score_sd > 0.0))
            throw DegenerateColumnError("column " + std::to_string(j) + " collapses under truncation");
        out.col(j) = mean + std::sqrt(variance) * (scores.array() - score_mean) / score_sd;
    }
    return out;
}

}  // namespace npnsearch
