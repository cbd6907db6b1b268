#include "ltest/classic.hpp"

#include <algorithm>
#include <cmath>

#include "ltest/distributions.hpp"
#include "ltest/error.hpp"

namespace ltest {

namespace {

TestOutcome f_from_rss(double rss0, double rss1, Index k, Index resid_df) {
    if (resid_df < 1) throw Error(ErrorCode::DegenerateResidual, "F-test needs n > d");
    if (!(rss1 > 0.0)) throw Error(ErrorCode::DegenerateResidual, "full-model residual is zero");
    TestOutcome out;
    out.method = Method::F;
    const double df1 = static_cast<double>(k);
    const double df2 = static_cast<double>(resid_df);
    out.statistic = std::max(0.0, rss0 - rss1) / df1 / (rss1 / df2);
    out.p_value = dist::f_sf(out.statistic, df1, df2);
    return out;
}

}  // namespace

TestOutcome f_test(const ModelContext& ctx, const VectorXd& y) {
    if (y.size() != ctx.n()) throw Error(ErrorCode::BadArgument, "response length does not match design rows");
    const double rss0 = (y - ctx.project_nuisance(y)).squaredNorm();
    if (!(rss0 > 0.0)) throw Error(ErrorCode::DegenerateResidual, "response lies in the nuisance column space");
    const double rss1 = (y - ctx.project_full(y)).squaredNorm();
    return f_from_rss(rss0, rss1, ctx.k(), ctx.resid_df());
}

TestOutcome f_test(const MatrixXd& X, Index k, const VectorXd& y) {
    if (k < 1 || k > X.cols()) throw Error(ErrorCode::BadGroupSize, "group size outside [1, d]");
    if (X.rows() != y.size()) throw Error(ErrorCode::BadArgument, "response length does not match design rows");
    const Index d = X.cols();
    const Index n = X.rows();
    if (n <= d) throw Error(ErrorCode::DegenerateResidual, "F-test needs n > d");
    Eigen::ColPivHouseholderQR<MatrixXd> full(X);
    if (full.rank() < d) throw Error(ErrorCode::RankDeficient, "design is rank deficient");
    const double rss1 = (y - X * full.solve(y)).squaredNorm();
    double rss0 = y.squaredNorm();
    if (d > k) {
        const MatrixXd Xn = X.rightCols(d - k);
        Eigen::ColPivHouseholderQR<MatrixXd> nuis(Xn);
        rss0 = (y - Xn * nuis.solve(y)).squaredNorm();
    }
    return f_from_rss(rss0, rss1, k, n - d);
}

double conditional_f_pvalue(const ModelContext& ctx, const SufficientState& state) {
    const double b = state.u_head(ctx.k()).squaredNorm();
    return dist::beta_sf(b, 0.5 * static_cast<double>(ctx.k()), 0.5 * static_cast<double>(ctx.resid_df()));
}

VectorXd ols_subvector(const ModelContext& ctx, const VectorXd& y) {
    const VectorXd r = y - ctx.project_nuisance(y);
    return ctx.solve_schur(ctx.head().transpose() * r);
}

VectorXd ols(const MatrixXd& X, const VectorXd& y) { return X.colPivHouseholderQr().solve(y); }

TestOutcome oracle_test(const ModelContext& ctx, const VectorXd& y, const VectorXd& beta_true) {
    if (beta_true.size() != ctx.d()) throw Error(ErrorCode::BadArgument, "coefficient length does not match design");
    const VectorXd head = beta_true.head(ctx.k());
    const double norm = head.norm();
    if (!(norm > 0.0)) throw Error(ErrorCode::NullDirection, "tested coefficients are zero; oracle direction undefined");

    const VectorXd x = ctx.head() * (head / norm);
    const VectorXd w = x - ctx.project_nuisance(x);
    const VectorXd r = y - ctx.project_nuisance(y);
    const double ww = w.squaredNorm();
    const double wr = w.dot(r);
    const Index df = ctx.resid_df() + ctx.k() - 1;
    if (df < 1) throw Error(ErrorCode::DegenerateResidual, "oracle test needs n - d + k > 1");
    const double rss = std::max(0.0, r.squaredNorm() - wr * wr / ww);
    if (!(rss > 0.0)) throw Error(ErrorCode::DegenerateResidual, "oracle model residual is zero");

    TestOutcome out;
    out.method = Method::Oracle;
    out.statistic = (wr / std::sqrt(ww)) / std::sqrt(rss / static_cast<double>(df));
    out.p_value = dist::t_sf(out.statistic, static_cast<double>(df));
    return out;
}

}  // namespace ltest
