#pragma once

#include "ltest/model.hpp"
#include "ltest/outcome.hpp"

namespace ltest {

/// Classical F-test of H_{1:k}: ((RSS0 - RSS1)/k) / (RSS1/(n - d)) against F_{k, n-d}.
TestOutcome f_test(const ModelContext& ctx, const VectorXd& y);

/// F-test of the first k columns of an arbitrary full-rank design.
TestOutcome f_test(const MatrixXd& X, Index k, const VectorXd& y);

/// The same p-value written through the sufficient state:
/// 1 - I_{||u_{1:k}||^2}(k/2, (n-d)/2).
double conditional_f_pvalue(const ModelContext& ctx, const SufficientState& state);

/// First k least-squares coefficients, S^{-1} X_{1:k}^T (I - P_{-1:k}) y.
VectorXd ols_subvector(const ModelContext& ctx, const VectorXd& y);

/// Full least-squares coefficient vector.
VectorXd ols(const MatrixXd& X, const VectorXd& y);

/// One-sided t-test of gamma_1 > 0 in y = [X_{1:k} w, X_{-1:k}] gamma + e, with
/// w the unit direction of beta_true's first k entries. Needs the true
/// coefficients, so it serves only as a power benchmark.
TestOutcome oracle_test(const ModelContext& ctx, const VectorXd& y, const VectorXd& beta_true);

}  // namespace ltest
