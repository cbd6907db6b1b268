#include "ltest/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ltest/error.hpp"

namespace ltest {

namespace {

thread_local std::size_t t_solver_calls = 0;

double penalty(const VectorXd& beta, Index group_size) {
    return beta.head(group_size).norm() + beta.tail(beta.size() - group_size).lpNorm<1>();
}

double soft(double v, double tau) {
    if (v > tau) return v - tau;
    if (v < -tau) return v + tau;
    return 0.0;
}

void prox_inplace(VectorXd& v, Index group_size, double tau) {
    if (group_size > 0) {
        auto head = v.head(group_size);
        const double norm = head.norm();
        if (norm <= tau)
            head.setZero();
        else
            head *= (1.0 - tau / norm);
    }
    for (Index j = group_size; j < v.size(); ++j) v[j] = soft(v[j], tau);
}

double kkt_from_gradient(const VectorXd& grad, const VectorXd& beta, Index group_size, double lambda) {
    double worst = 0.0;
    if (group_size > 0) {
        const auto b = beta.head(group_size);
        const auto g = grad.head(group_size);
        const double bn = b.norm();
        if (bn > 0.0)
            worst = (g + lambda * b / bn).norm();
        else
            worst = std::max(0.0, g.norm() - lambda);
    }
    for (Index j = group_size; j < beta.size(); ++j) {
        double r;
        if (beta[j] > 0.0)
            r = std::abs(grad[j] + lambda);
        else if (beta[j] < 0.0)
            r = std::abs(grad[j] - lambda);
        else
            r = std::max(0.0, std::abs(grad[j]) - lambda);
        worst = std::max(worst, r);
    }
    return worst;
}

double objective_value(const VectorXd& beta, const VectorXd& g_beta, const VectorXd& linear, double offset,
                       Index group_size, double lambda) {
    return 0.5 * beta.dot(g_beta) - linear.dot(beta) + offset + lambda * penalty(beta, group_size);
}

/// Newton refinement of the stationarity system restricted to the support of
/// beta. Returns false when the refined point changes the support pattern.
bool polish_support(const Eigen::Ref<const MatrixXd>& gram, const VectorXd& linear, Index group_size, double lambda,
                    VectorXd& beta) {
    const Index d = beta.size();
    const bool head_active = group_size > 0 && beta.head(group_size).norm() > 0.0;
    std::vector<Index> support;
    if (head_active)
        for (Index j = 0; j < group_size; ++j) support.push_back(j);
    std::vector<double> signs;
    for (Index j = group_size; j < d; ++j)
        if (beta[j] != 0.0) {
            support.push_back(j);
            signs.push_back(beta[j] > 0.0 ? 1.0 : -1.0);
        }
    const Index m = static_cast<Index>(support.size());
    if (m == 0) return true;
    const Index h = head_active ? group_size : 0;

    MatrixXd G(m, m);
    VectorXd c(m), theta(m);
    for (Index a = 0; a < m; ++a) {
        c[a] = linear[support[a]];
        theta[a] = beta[support[a]];
        for (Index b = 0; b < m; ++b) G(a, b) = gram(support[a], support[b]);
    }
    VectorXd sub_signs(m - h);
    for (Index a = 0; a < m - h; ++a) sub_signs[a] = signs[a];

    const int max_newton = h > 0 ? 30 : 1;
    for (int it = 0; it < max_newton; ++it) {
        VectorXd resid = G * theta - c;
        MatrixXd J = G;
        if (h > 0) {
            const VectorXd bh = theta.head(h);
            const double bn = bh.norm();
            if (!(bn > 0.0)) return false;
            resid.head(h) += lambda * bh / bn;
            J.topLeftCorner(h, h) +=
                (lambda / bn) * (MatrixXd::Identity(h, h) - bh * bh.transpose() / (bn * bn));
        }
        resid.tail(m - h) += lambda * sub_signs;
        const VectorXd step = J.ldlt().solve(resid);
        if (!step.allFinite()) return false;
        theta -= step;
        if (step.norm() <= 1e-15 * std::max(1.0, theta.norm())) break;
    }
    if (h > 0 && !(theta.head(h).norm() > 0.0)) return false;
    for (Index a = 0; a < m - h; ++a)
        if (theta[h + a] * sub_signs[a] <= 0.0) return false;

    for (Index a = 0; a < m; ++a) beta[support[a]] = theta[a];
    return true;
}

}  // namespace

std::size_t solver_invocations() noexcept { return t_solver_calls; }
void reset_solver_invocations() noexcept { t_solver_calls = 0; }

double kkt_residual(const Eigen::Ref<const MatrixXd>& gram, const VectorXd& linear, const VectorXd& beta,
                    Index group_size, double lambda) {
    const VectorXd grad = gram * beta - linear;
    return kkt_from_gradient(grad, beta, group_size, lambda);
}

GroupLassoFit solve_penalized(const Eigen::Ref<const MatrixXd>& gram, const VectorXd& linear, double offset,
                              Index group_size, double lambda, double lipschitz, const VectorXd* warm_start,
                              const SolverOptions& options) {
    if (!(lambda > 0.0)) throw Error(ErrorCode::BadArgument, "lambda must be positive");
    ++t_solver_calls;
    const Index d = linear.size();
    GroupLassoFit fit;
    fit.lambda = lambda;
    if (d == 0) {
        fit.beta = VectorXd::Zero(0);
        fit.objective = offset;
        fit.converged = true;
        return fit;
    }
    const double step = 1.0 / std::max(lipschitz, std::numeric_limits<double>::min());

    VectorXd x = (warm_start && warm_start->size() == d) ? *warm_start : VectorXd::Zero(d);
    VectorXd gx = gram * x;
    double fx = objective_value(x, gx, linear, offset, group_size, lambda);
    // Start from zero if the warm start is worse than the origin.
    if (fx > offset) {
        x.setZero();
        gx.setZero();
        fx = offset;
    }
    VectorXd y = x, gy = gx;
    VectorXd z(d), gz(d);
    double t = 1.0;
    bool restarted = true;
    int it = 0;
    double kkt = kkt_from_gradient(gx - linear, x, group_size, lambda);
    bool converged = kkt <= options.kkt_tol;
    if (options.objective_trace) options.objective_trace->push_back(fx);

    while (!converged && it < options.max_iter) {
        ++it;
        z = y - step * (gy - linear);
        prox_inplace(z, group_size, step * lambda);
        gz.noalias() = gram * z;
        const double fz = objective_value(z, gz, linear, offset, group_size, lambda);
        if (fz <= fx) {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            const double momentum = (t - 1.0) / t_next;
            y = z + momentum * (z - x);
            gy = gz + momentum * (gz - gx);
            const double decrease = fx - fz;
            x.swap(z);
            gx.swap(gz);
            fx = fz;
            t = t_next;
            restarted = false;
            kkt = kkt_from_gradient(gx - linear, x, group_size, lambda);
            if (kkt <= options.kkt_tol) converged = true;
            else if (decrease <= options.rel_obj_tol * std::max(std::abs(fx), 1e-300)) converged = true;
        } else {
            // A plain proximal step from x cannot increase the objective, so a
            // failure right after a restart means x is optimal to rounding.
            if (restarted) {
                converged = true;
                break;
            }
            y = x;
            gy = gx;
            t = 1.0;
            restarted = true;
        }
        if (options.objective_trace) options.objective_trace->push_back(fx);
    }

    if (options.polish) {
        VectorXd refined = x;
        if (polish_support(gram, linear, group_size, lambda, refined)) {
            const VectorXd g_ref = gram * refined;
            const double kkt_ref = kkt_from_gradient(g_ref - linear, refined, group_size, lambda);
            const double f_ref = objective_value(refined, g_ref, linear, offset, group_size, lambda);
            if (kkt_ref < kkt && f_ref <= fx + 1e-14 * std::max(1.0, std::abs(fx))) {
                x = refined;
                gx = g_ref;
                fx = std::min(f_ref, fx);
                kkt = kkt_ref;
                if (kkt <= options.kkt_tol) converged = true;
                if (options.objective_trace) options.objective_trace->push_back(fx);
            }
        }
    }

    fit.beta = std::move(x);
    fit.objective = fx;
    fit.iterations = it;
    fit.converged = converged;
    fit.kkt_residual = kkt;
    for (Index j = group_size; j < d; ++j)
        if (fit.beta[j] != 0.0) fit.active_set.push_back(j);
    return fit;
}

GroupLassoFit group_lasso_from_moments(const ModelContext& ctx, const VectorXd& Xty, double yty, double lambda,
                                       const SolverOptions& options, const VectorXd* warm_start) {
    const double n = static_cast<double>(ctx.n());
    const VectorXd linear = Xty / n;
    return solve_penalized(ctx.gram(), linear, yty / (2.0 * n), ctx.k(), lambda, ctx.lipschitz_full(), warm_start,
                           options);
}

GroupLassoFit group_lasso(const ModelContext& ctx, const VectorXd& y, double lambda, const SolverOptions& options,
                          const VectorXd* warm_start) {
    if (y.size() != ctx.n()) throw Error(ErrorCode::BadArgument, "response length does not match design rows");
    const VectorXd Xty = ctx.X().transpose() * y;
    return group_lasso_from_moments(ctx, Xty, y.squaredNorm(), lambda, options, warm_start);
}

namespace {

LassoFit to_lasso_fit(GroupLassoFit&& g) {
    LassoFit f;
    f.beta = std::move(g.beta);
    f.active_set = std::move(g.active_set);
    f.objective = g.objective;
    f.iterations = g.iterations;
    f.converged = g.converged;
    f.kkt_residual = g.kkt_residual;
    return f;
}

LassoFit conditional_core(const ModelContext& ctx, const VectorXd& nuisance_Xty, const VectorXd& b, double lambda,
                          double offset, const SolverOptions& options) {
    const Index k = ctx.k();
    const Index m = ctx.d() - k;
    if (b.size() != k) throw Error(ErrorCode::BadArgument, "b must have length k");
    const double n = static_cast<double>(ctx.n());
    const VectorXd linear = nuisance_Xty / n - ctx.gram().bottomLeftCorner(m, k) * b;
    return to_lasso_fit(solve_penalized(ctx.gram().bottomRightCorner(m, m), linear, offset, 0, lambda,
                                        ctx.lipschitz_nuisance(), nullptr, options));
}

}  // namespace

LassoFit conditional_lasso(const ModelContext& ctx, const VectorXd& y, const VectorXd& b, double lambda,
                           const SolverOptions& options) {
    if (y.size() != ctx.n()) throw Error(ErrorCode::BadArgument, "response length does not match design rows");
    const VectorXd nuisance_Xty = ctx.nuisance().transpose() * y;
    const double offset = (y - ctx.head() * b).squaredNorm() / (2.0 * static_cast<double>(ctx.n()));
    return conditional_core(ctx, nuisance_Xty, b, lambda, offset, options);
}

LassoFit conditional_lasso_from_moments(const ModelContext& ctx, const VectorXd& nuisance_Xty, const VectorXd& b,
                                        double lambda, const SolverOptions& options) {
    return conditional_core(ctx, nuisance_Xty, b, lambda, 0.0, options);
}

double lambda_max(const MatrixXd& X, const VectorXd& y, Index k) {
    const double n = static_cast<double>(X.rows());
    const VectorXd g = X.transpose() * y / n;
    double lm = g.head(k).norm();
    if (X.cols() > k) lm = std::max(lm, g.tail(X.cols() - k).cwiseAbs().maxCoeff());
    return lm;
}

std::vector<double> lambda_grid(double lmax, int count, double ratio) {
    std::vector<double> grid(static_cast<std::size_t>(count));
    if (count == 1) {
        grid[0] = lmax;
        return grid;
    }
    const double log_hi = std::log(lmax);
    const double log_lo = std::log(lmax * ratio);
    for (int i = 0; i < count; ++i)
        grid[static_cast<std::size_t>(i)] = std::exp(log_hi + (log_lo - log_hi) * i / (count - 1));
    grid.front() = lmax;
    return grid;
}

std::size_t CvPath::min_index() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < cv_mean.size(); ++i)
        if (cv_mean[i] <= cv_mean[best]) best = i;  // grid is descending: later ties have smaller lambda
    return best;
}

std::size_t CvPath::one_se_index() const {
    const std::size_t best = min_index();
    const double bound = cv_mean[best] + cv_se[best];
    for (std::size_t i = 0; i < cv_mean.size(); ++i)
        if (cv_mean[i] <= bound) return i;
    return best;
}

CvPath cross_validate(const MatrixXd& X, const VectorXd& y, Index k, int folds, Rng& rng) {
    const Index n = X.rows();
    const Index d = X.cols();
    if (folds < 2 || folds > n) throw Error(ErrorCode::BadArgument, "cross-validation needs 2 <= folds <= n");

    CvPath path;
    const double lmax = lambda_max(X, y, k);
    if (!(lmax > 0.0)) throw Error(ErrorCode::DegenerateResidual, "response is orthogonal to every covariate");
    path.lambdas = lambda_grid(lmax);
    const std::size_t L = path.lambdas.size();

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng.engine());
    std::vector<int> fold_of(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) fold_of[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = static_cast<int>(i % folds);

    std::vector<std::vector<double>> fold_mse(static_cast<std::size_t>(folds), std::vector<double>(L, 0.0));
    std::vector<double> sse(L, 0.0);
    SolverOptions options;
    options.polish = false;

    for (int f = 0; f < folds; ++f) {
        std::vector<Index> train, test;
        for (Index i = 0; i < n; ++i) (fold_of[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
        const Index nt = static_cast<Index>(train.size());
        MatrixXd Xtr(nt, d);
        VectorXd ytr(nt);
        for (Index i = 0; i < nt; ++i) {
            Xtr.row(i) = X.row(train[static_cast<std::size_t>(i)]);
            ytr[i] = y[train[static_cast<std::size_t>(i)]];
        }
        MatrixXd Xte(static_cast<Index>(test.size()), d);
        VectorXd yte(static_cast<Index>(test.size()));
        for (Index i = 0; i < Xte.rows(); ++i) {
            Xte.row(i) = X.row(test[static_cast<std::size_t>(i)]);
            yte[i] = y[test[static_cast<std::size_t>(i)]];
        }
        const MatrixXd gram = Xtr.transpose() * Xtr / static_cast<double>(nt);
        const VectorXd linear = Xtr.transpose() * ytr / static_cast<double>(nt);
        const double offset = ytr.squaredNorm() / (2.0 * static_cast<double>(nt));
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram, Eigen::EigenvaluesOnly);
        const double lip = es.eigenvalues().maxCoeff();

        VectorXd warm = VectorXd::Zero(d);
        for (std::size_t l = 0; l < L; ++l) {
            GroupLassoFit fit = solve_penalized(gram, linear, offset, k, path.lambdas[l], lip, &warm, options);
            warm = fit.beta;
            const double err = (yte - Xte * fit.beta).squaredNorm();
            sse[l] += err;
            fold_mse[static_cast<std::size_t>(f)][l] = err / static_cast<double>(yte.size());
        }
    }

    path.cv_mean.resize(L);
    path.cv_se.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        path.cv_mean[l] = sse[l] / static_cast<double>(n);
        double mean = 0.0;
        for (int f = 0; f < folds; ++f) mean += fold_mse[static_cast<std::size_t>(f)][l];
        mean /= folds;
        double var = 0.0;
        for (int f = 0; f < folds; ++f) {
            const double dv = fold_mse[static_cast<std::size_t>(f)][l] - mean;
            var += dv * dv;
        }
        var /= (folds - 1);
        path.cv_se[l] = std::sqrt(var / folds);
    }
    return path;
}

TuningChoice tune(const ModelContext& ctx, const SufficientState& state, const Rng& rng, int folds, int repeats) {
    if (folds < 2) throw Error(ErrorCode::BadArgument, "folds must be at least 2");
    if (repeats < 1) throw Error(ErrorCode::BadArgument, "repeats must be at least 1");
    TuningChoice choice;
    choice.tuning_seed = rng.seed();
    choice.repeats = repeats;
    choice.b_star = VectorXd::Zero(ctx.k());
    for (int r = 0; r < repeats; ++r) {
        Rng sub = rng.stream({static_cast<std::uint64_t>(r)});
        const ConditionalDraw draw = sample_conditional(ctx, state, sub);
        const CvPath path = cross_validate(ctx.X(), draw.y, ctx.k(), folds, sub);
        const double lambda = path.lambdas[path.min_index()];
        const GroupLassoFit refit = group_lasso(ctx, draw.y, lambda);
        choice.lambda += lambda;
        choice.b_star += refit.beta.head(ctx.k());
    }
    choice.lambda /= repeats;
    choice.b_star /= repeats;
    return choice;
}

}  // namespace ltest
