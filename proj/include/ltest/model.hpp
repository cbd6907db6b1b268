#pragma once

#include <Eigen/Dense>

#include "ltest/rng.hpp"

namespace ltest {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Smallest singular value must exceed this fraction of the largest.
inline constexpr double kRankTolerance = 1e-8;

/// Linear model geometry for testing H: beta_{1:k} = 0, where the tested
/// group occupies the first k columns of X.
///
/// Holds the orthonormal basis V of col(X_{-1:k})^perp whose first k columns
/// are the normalized residuals of X_i on X_{-1:i}, and whose remaining
/// columns are the left singular vectors of X beyond rank d. Projections are
/// applied through a cached thin QR factor and never formed as n x n
/// matrices. Immutable after construction.
class ModelContext {
public:
    ModelContext(MatrixXd X, Index k);

    const MatrixXd& X() const noexcept { return X_; }
    Index n() const noexcept { return X_.rows(); }
    Index d() const noexcept { return X_.cols(); }
    Index k() const noexcept { return k_; }
    /// n - d, residual degrees of freedom of the full model.
    Index resid_df() const noexcept { return n() - d(); }
    /// n - d + k, dimension of the sphere u lives on.
    Index sphere_dim() const noexcept { return V_.cols(); }

    auto head() const { return X_.leftCols(k_); }
    auto nuisance() const { return X_.rightCols(d() - k_); }
    const MatrixXd& V() const noexcept { return V_; }
    auto V_head() const { return V_.leftCols(k_); }

    /// V_{1:k}^T X_{1:k}; lower triangular and invertible.
    const MatrixXd& head_cross() const noexcept { return head_cross_; }
    /// S = X_{1:k}^T V_{1:k} V_{1:k}^T X_{1:k}, symmetric positive definite.
    const MatrixXd& schur() const noexcept { return schur_; }

    /// X^T X / n and the Lipschitz constants of the least-squares gradient
    /// for the full and nuisance-only problems.
    const MatrixXd& gram() const noexcept { return gram_; }
    double lipschitz_full() const noexcept { return lipschitz_full_; }
    double lipschitz_nuisance() const noexcept { return lipschitz_nuisance_; }

    const VectorXd& singular_values() const noexcept { return singular_values_; }

    /// P_{-1:k} v.
    VectorXd project_nuisance(const Eigen::Ref<const VectorXd>& v) const;
    /// P_{-1:i} v for 1 <= i <= k (projection onto columns i+1..d, 1-based).
    VectorXd project_after(Index i, const Eigen::Ref<const VectorXd>& v) const;
    /// P_X v, projection onto the full column space.
    VectorXd project_full(const Eigen::Ref<const VectorXd>& v) const;

    /// (X_{1:k}^T V_{1:k})^{-1} rhs.
    MatrixXd solve_cross_transpose(const Eigen::Ref<const MatrixXd>& rhs) const;
    /// S^{-1} rhs.
    MatrixXd solve_schur(const Eigen::Ref<const MatrixXd>& rhs) const;

private:
    MatrixXd X_;
    Index k_;
    MatrixXd V_;
    MatrixXd q_rev_;   // thin Q of X with columns reversed: first j columns span the last j columns of X
    MatrixXd head_cross_;
    Eigen::PartialPivLU<MatrixXd> cross_t_lu_;
    MatrixXd schur_;
    Eigen::LLT<MatrixXd> schur_llt_;
    MatrixXd gram_;
    double lipschitz_full_ = 0.0;
    double lipschitz_nuisance_ = 0.0;
    VectorXd singular_values_;
};

ModelContext build_model(const MatrixXd& X, Index k);

/// Conditioning bundle for H_{1:k}: y = yhat + sigma_hat * V u with u a unit
/// vector; (X_{-1:k}^T y, y^T y) is the null sufficient statistic.
struct SufficientState {
    VectorXd yhat;
    double sigma_hat = 0.0;
    VectorXd u;
    VectorXd Xty;  // X_{-1:k}^T y
    double yty = 0.0;

    auto u_head(Index k) const { return u.head(k); }
};

SufficientState sufficient_state(const ModelContext& ctx, const VectorXd& y);

/// yhat + sigma_hat * V u.
VectorXd reconstruct(const ModelContext& ctx, const SufficientState& state, const VectorXd& u);

struct ConditionalDraw {
    VectorXd u;
    VectorXd y;
};

/// One draw of y | S under the null: u uniform on the sphere, y rebuilt.
ConditionalDraw sample_conditional(const ModelContext& ctx, const SufficientState& state, Rng& rng);

}  // namespace ltest
