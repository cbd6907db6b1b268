#include "ltest/model.hpp"

#include <cmath>
#include <string>

#include "ltest/error.hpp"

namespace ltest {

namespace {

double max_eigenvalue(const MatrixXd& sym) {
    if (sym.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

}  // namespace

ModelContext::ModelContext(MatrixXd X, Index k) : X_(std::move(X)), k_(k) {
    const Index n = X_.rows();
    const Index d = X_.cols();
    if (d < 1 || k < 1 || k > d)
        throw Error(ErrorCode::BadGroupSize, "group size " + std::to_string(k) + " outside [1, " + std::to_string(d) + "]");
    if (n < d)
        throw Error(ErrorCode::RankDeficient, "n = " + std::to_string(n) + " < d = " + std::to_string(d));

    Eigen::BDCSVD<MatrixXd> svd(X_, Eigen::ComputeFullU);
    singular_values_ = svd.singularValues();
    const double smax = singular_values_.maxCoeff();
    const double smin = singular_values_.minCoeff();
    if (!(smax > 0.0) || smin < kRankTolerance * smax)
        throw Error(ErrorCode::RankDeficient, "smallest singular value " + std::to_string(smin) +
                                                  " below tolerance relative to " + std::to_string(smax));

    // Householder QR of the column-reversed design: column j of Q (0-based)
    // spans the residual of X_{d-j} on X_{d-j+1..d} (1-based), which is the
    // direction V_i needs for i = d - j.
    const MatrixXd reversed = X_.rowwise().reverse();
    Eigen::HouseholderQR<MatrixXd> qr(reversed);
    q_rev_ = qr.householderQ() * MatrixXd::Identity(n, d);
    const MatrixXd& packed = qr.matrixQR();

    V_.resize(n, n - d + k);
    for (Index i = 1; i <= k; ++i) {
        const Index j = d - i;
        const double sign = packed(j, j) < 0.0 ? -1.0 : 1.0;
        V_.col(i - 1) = sign * q_rev_.col(j);
    }
    if (n > d) V_.rightCols(n - d) = svd.matrixU().rightCols(n - d);

    head_cross_ = V_head().transpose() * head();
    cross_t_lu_.compute(head_cross_.transpose());
    schur_ = head_cross_.transpose() * head_cross_;
    schur_llt_.compute(schur_);

    gram_ = X_.transpose() * X_ / static_cast<double>(n);
    lipschitz_full_ = max_eigenvalue(gram_);
    lipschitz_nuisance_ = max_eigenvalue(gram_.bottomRightCorner(d - k, d - k));
}

VectorXd ModelContext::project_after(Index i, const Eigen::Ref<const VectorXd>& v) const {
    const Index cols = d() - i;
    if (cols <= 0) return VectorXd::Zero(v.size());
    const auto Q = q_rev_.leftCols(cols);
    return Q * (Q.transpose() * v);
}

VectorXd ModelContext::project_nuisance(const Eigen::Ref<const VectorXd>& v) const { return project_after(k_, v); }

VectorXd ModelContext::project_full(const Eigen::Ref<const VectorXd>& v) const { return q_rev_ * (q_rev_.transpose() * v); }

MatrixXd ModelContext::solve_cross_transpose(const Eigen::Ref<const MatrixXd>& rhs) const { return cross_t_lu_.solve(rhs); }

MatrixXd ModelContext::solve_schur(const Eigen::Ref<const MatrixXd>& rhs) const { return schur_llt_.solve(rhs); }

ModelContext build_model(const MatrixXd& X, Index k) { return ModelContext(X, k); }

SufficientState sufficient_state(const ModelContext& ctx, const VectorXd& y) {
    if (y.size() != ctx.n()) throw Error(ErrorCode::BadArgument, "response length does not match design rows");
    SufficientState s;
    s.yhat = ctx.project_nuisance(y);
    const VectorXd resid = y - s.yhat;
    s.sigma_hat = resid.norm();
    if (!(s.sigma_hat > 1e-12 * std::max(1.0, y.norm())))
        throw Error(ErrorCode::DegenerateResidual, "response lies in the column space of the nuisance block");
    s.u = ctx.V().transpose() * resid / s.sigma_hat;
    s.Xty = ctx.nuisance().transpose() * y;
    s.yty = y.squaredNorm();
    return s;
}

VectorXd reconstruct(const ModelContext& ctx, const SufficientState& state, const VectorXd& u) {
    return state.yhat + state.sigma_hat * (ctx.V() * u);
}

ConditionalDraw sample_conditional(const ModelContext& ctx, const SufficientState& state, Rng& rng) {
    ConditionalDraw draw;
    draw.u = rng.unit_sphere(ctx.sphere_dim());
    draw.y = reconstruct(ctx, state, draw.u);
    return draw;
}

}  // namespace ltest
