#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ltest/model.hpp"
#include "ltest/rng.hpp"

namespace ltest {

struct SolverOptions {
    double kkt_tol = 1e-7;
    double rel_obj_tol = 1e-10;
    int max_iter = 50000;
    /// Refine the accelerated-gradient answer by solving the stationarity
    /// equations on the detected support; kept only if it lowers the KKT residual.
    bool polish = true;
    /// When set, receives the objective after every iteration.
    std::vector<double>* objective_trace = nullptr;
};

/// Solution of
///   min_b (1/2n)||y - X b||^2 + lambda (||b_{1:k}||_2 + ||b_{-1:k}||_1).
/// A fit with converged == false is the best iterate found.
struct GroupLassoFit {
    VectorXd beta;
    double lambda = 0.0;
    std::vector<Index> active_set;  // 0-based indices j >= k with beta_j != 0
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    double kkt_residual = 0.0;
};

/// LASSO fit of the nuisance block with the tested block held fixed.
struct LassoFit {
    VectorXd beta;                  // length d - k
    std::vector<Index> active_set;  // 0-based within the nuisance block
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    double kkt_residual = 0.0;
};

/// Gram-form core shared by every fit:
///   min_b 1/2 b'Gb - c'b + offset + lambda (||b_{1:g}||_2 + ||b_{g+1:}||_1),
/// solved by accelerated proximal gradient with function-value restarts
/// (monotone objective). group_size may be zero (plain LASSO).
GroupLassoFit solve_penalized(const Eigen::Ref<const MatrixXd>& gram, const VectorXd& linear, double offset,
                              Index group_size, double lambda, double lipschitz, const VectorXd* warm_start,
                              const SolverOptions& options);

/// KKT residual of the Gram-form problem at beta (0 at an exact optimum).
double kkt_residual(const Eigen::Ref<const MatrixXd>& gram, const VectorXd& linear, const VectorXd& beta,
                    Index group_size, double lambda);

GroupLassoFit group_lasso(const ModelContext& ctx, const VectorXd& y, double lambda, const SolverOptions& options = {},
                          const VectorXd* warm_start = nullptr);

/// Same problem from the moments X^T y and y^T y.
GroupLassoFit group_lasso_from_moments(const ModelContext& ctx, const VectorXd& Xty, double yty, double lambda,
                                       const SolverOptions& options = {}, const VectorXd* warm_start = nullptr);

/// beta_{-1:k}(b) = argmin (1/2n)||y - X_{1:k} b - X_{-1:k} beta||^2 + lambda ||beta||_1.
/// Depends on y only through X_{-1:k}^T y.
LassoFit conditional_lasso(const ModelContext& ctx, const VectorXd& y, const VectorXd& b, double lambda,
                           const SolverOptions& options = {});

/// Same from X_{-1:k}^T y directly (the objective omits the constant term).
LassoFit conditional_lasso_from_moments(const ModelContext& ctx, const VectorXd& nuisance_Xty, const VectorXd& b,
                                        double lambda, const SolverOptions& options = {});

/// Smallest lambda at which the group LASSO solution is identically zero.
double lambda_max(const MatrixXd& X, const VectorXd& y, Index k);

/// Geometric grid of `count` penalties from lambda_max down to ratio * lambda_max.
std::vector<double> lambda_grid(double lambda_max, int count = 100, double ratio = 1e-3);

struct CvPath {
    std::vector<double> lambdas;  // descending
    std::vector<double> cv_mean;  // pooled held-out mean squared error
    std::vector<double> cv_se;    // standard error across folds

    /// Minimum-error index; ties go to the smallest lambda.
    std::size_t min_index() const;
    /// Largest lambda whose error is within one standard error of the minimum.
    std::size_t one_se_index() const;
};

/// folds-fold cross-validation of the group LASSO over the default grid.
/// Fold membership comes from a shuffle drawn from rng.
CvPath cross_validate(const MatrixXd& X, const VectorXd& y, Index k, int folds, Rng& rng);

struct TuningChoice {
    double lambda = 0.0;
    VectorXd b_star;
    std::uint64_t tuning_seed = 0;
    int repeats = 1;
};

/// Chooses (lambda, b*) by cross-validating on a conditional copy y~ of the
/// data, so the choice depends on y only through the null sufficient
/// statistic. With repeats > 1 the choices from independent copies are
/// averaged. Repeat r uses stream rng.stream({r}).
TuningChoice tune(const ModelContext& ctx, const SufficientState& state, const Rng& rng, int folds = 10, int repeats = 1);

/// Number of penalized fits run on the calling thread since the last reset.
std::size_t solver_invocations() noexcept;
void reset_solver_invocations() noexcept;

}  // namespace ltest
