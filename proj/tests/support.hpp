#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ltest/model.hpp"
#include "ltest/simlab.hpp"

namespace support {

using ltest::Index;
using ltest::MatrixXd;
using ltest::VectorXd;

inline ltest::sim::ScenarioConfig scenario(Index n, Index d, Index k, double amp, Index k1, Index k2, double rho,
                                           std::uint64_t seed) {
    ltest::sim::ScenarioConfig cfg;
    cfg.n = n;
    cfg.d = d;
    cfg.k = k;
    cfg.amp = amp;
    cfg.k1 = k1;
    cfg.k2 = k2;
    cfg.rho = rho;
    cfg.seed = seed;
    return cfg;
}

inline ltest::sim::Replication instance(Index n, Index d, Index k, double amp, Index k1, Index k2, double rho,
                                        std::uint64_t seed, int rep = 0) {
    return ltest::sim::gen_replication(scenario(n, d, k, amp, k1, k2, rho, seed), rep);
}

inline MatrixXd gaussian_matrix(Index n, Index d, ltest::Rng& rng) {
    MatrixXd X(n, d);
    for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < n; ++i) X(i, j) = rng.normal();
    return X;
}

/// sup |F_n - F| for the empirical distribution of `samples` against `cdf`.
inline double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double m = static_cast<double>(samples.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = cdf(samples[i]);
        worst = std::max({worst, std::abs(F - static_cast<double>(i) / m), std::abs(static_cast<double>(i + 1) / m - F)});
    }
    return worst;
}

/// Relative Frobenius error ||A - B|| / ||B||.
inline double rel_error(const MatrixXd& A, const MatrixXd& B) { return (A - B).norm() / B.norm(); }

/// Pearson correlation of two vectors.
inline double correlation(const VectorXd& a, const VectorXd& b) {
    const VectorXd ac = a.array() - a.mean();
    const VectorXd bc = b.array() - b.mean();
    return ac.dot(bc) / (ac.norm() * bc.norm());
}

}  // namespace support
