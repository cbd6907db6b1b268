#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ltest/l_test.hpp"
#include "ltest/model.hpp"
#include "ltest/outcome.hpp"
#include "ltest/rng.hpp"
#include "ltest/solvers.hpp"

namespace ltest::sim {

enum class Violation { None, TErrors, GammaErrors, Heteroskedastic, Nonlinear };
enum class BetaPattern { RandomSigns, DenseAlternating, DenseNonnegative };
/// Target Euclidean norm of every standardized design column.
enum class ColumnNorm { Unit, SqrtN };

std::string_view to_string(Violation v) noexcept;
std::string_view to_string(BetaPattern p) noexcept;
std::string_view to_string(ColumnNorm c) noexcept;
std::optional<Violation> parse_violation(std::string_view name) noexcept;
std::optional<BetaPattern> parse_beta_pattern(std::string_view name) noexcept;
std::optional<ColumnNorm> parse_column_norm(std::string_view name) noexcept;

struct ViolationSpec {
    Violation kind = Violation::None;
    /// nu for t errors, shape for gamma errors, variance ratio eta^2 for
    /// heteroskedastic errors, exponent delta for the nonlinear design.
    double param = 0.0;
};

struct ScenarioConfig {
    std::string id = "scenario";
    Index n = 100;
    Index d = 50;
    Index k = 10;
    double amp = 0.0;
    Index k1 = 0;
    Index k2 = 0;
    double rho = 0.0;
    ViolationSpec violation;
    int reps = 300;
    double alpha = 0.05;
    std::size_t M = 200;
    std::uint64_t seed = 1;
    bool block_orthogonal = false;
    BetaPattern beta_pattern = BetaPattern::RandomSigns;
    ColumnNorm column_norm = ColumnNorm::SqrtN;
    int cv_folds = 10;
    int tuning_repeats = 1;
};

/// Throws BadArgument naming the offending field.
void validate(const ScenarioConfig& cfg);

/// Centers every column and scales it to the configured norm.
void standardize_columns(MatrixXd& X, ColumnNorm norm);

/// Rows i.i.d. N(0, Sigma) with Sigma_ij = rho^|i-j|, then standardized. The
/// block-orthogonal variant replaces X_{-1:k} by (I - P_{1:k})X_{-1:k} and
/// standardizes again. Rank-deficient draws are retried up to three times.
MatrixXd gen_design(const ScenarioConfig& cfg, Rng& rng);

/// k1 entries of the first k at +-A/sqrt(k1) (random signs), or all k entries
/// at A/sqrt(k) with alternating or nonnegative signs; k2 standard Gaussian
/// entries at random positions among the rest.
VectorXd gen_beta(const ScenarioConfig& cfg, Rng& rng);

struct ErrorDraw {
    VectorXd eps;
    /// The response should be generated from the transformed design.
    bool transform_design = false;
};

ErrorDraw gen_errors(const ScenarioConfig& cfg, const MatrixXd& X, Rng& rng);

/// Entrywise sign(x)|x|^delta.
MatrixXd nonlinear_design(const MatrixXd& X, double delta);

/// Number of leading principal directions of X_{1:k} whose squared singular
/// values reach `threshold` of the total.
Index pc_count(const ModelContext& ctx, double threshold);

/// F-test on the leading principal directions of X_{1:k} (nuisance kept).
TestOutcome pc_test(const ModelContext& ctx, const VectorXd& y, double var_threshold = 0.85);

/// Monte Carlo test on ||A u_{1:k}|| (premultiplier without recentering).
TestOutcome phi_test(const ModelContext& ctx, const SufficientState& state, const TuningChoice& tuning, std::size_t M,
                     const Rng& rng, int threads = 1);
TestOutcome phi_test(const ModelContext& ctx, const VectorXd& y, const TuningChoice& tuning, std::size_t M,
                     const Rng& rng, int threads = 1);

struct Replication {
    MatrixXd X;  // design seen by the tests
    VectorXd beta;
    VectorXd y;
};

/// Data for replication `rep`; depends only on (cfg, rep).
Replication gen_replication(const ScenarioConfig& cfg, int rep);

struct SweepOptions {
    int threads = 1;
    /// Per-method cap on replications (e.g. fewer for the refitting MC test).
    std::map<Method, int> method_reps;
    /// One tuning draw per dataset shared by every tuned method.
    bool share_tuning = true;
};

struct PowerRecord {
    Method method = Method::F;
    std::string scenario_id;
    double rejection_rate = 0.0;
    double standard_error = 0.0;
    int reps = 0;      // replications that produced a p-value
    int failures = 0;  // replications where the method raised an error
    std::size_t nonconverged = 0;
    double wall_time = 0.0;  // seconds summed over replications
};

/// Rejection rate at cfg.alpha for every scenario x method. Replication r of
/// a scenario uses Rng(cfg.seed).stream({r}); methods see the same data.
std::vector<PowerRecord> run_power_sweep(const std::vector<ScenarioConfig>& grid, const std::vector<Method>& methods,
                                         const SweepOptions& options = {});

struct VarianceDecomposition {
    double overall_sd = 0.0;
    double within_sd = 0.0;
    double between_sd = 0.0;
    double ratio = 0.0;  // within / overall
};

/// p[i][j]: p-value of dataset i under tuning draw j.
/// overall = sqrt(sum (p_ij - p_bar)^2 / (N - 1)),
/// within = sqrt(sum (p_ij - p_bar_i)^2 / (m_outer (m_inner - 1))),
/// between = sample standard deviation of the dataset means p_bar_i.
VarianceDecomposition decompose_variance(const std::vector<std::vector<double>>& p);

struct TuningVarianceResult {
    VarianceDecomposition decomposition;
    std::vector<std::vector<double>> p;
};

/// For m_outer datasets, reruns tuning m_inner times and records the p-value
/// of `method` (L or MC-free). The Monte Carlo stream is fixed per dataset so
/// only the tuning draw varies within a dataset.
TuningVarianceResult tuning_variance_experiment(const ScenarioConfig& cfg, int m_outer, int m_inner, Method method,
                                                int threads = 1);

}  // namespace ltest::sim
