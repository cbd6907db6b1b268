#include "ltest/simlab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "ltest/classic.hpp"
#include "ltest/error.hpp"
#include "ltest/mcfree.hpp"
#include "ltest/parallel.hpp"

namespace ltest::sim {

namespace {

// Sub-stream labels within one replication.
enum Stream : std::uint64_t { kDesign = 0, kBeta = 1, kErrors = 2, kTuning = 3, kMonteCarlo = 4 };

constexpr int kDesignAttempts = 3;

bool full_rank(const MatrixXd& X) {
    Eigen::BDCSVD<MatrixXd> svd(X);
    const VectorXd& s = svd.singularValues();
    return s.size() > 0 && s.maxCoeff() > 0.0 && s.minCoeff() >= kRankTolerance * s.maxCoeff();
}

template <class Enum, std::size_t N>
std::optional<Enum> parse_enum(std::string_view name, const Enum (&values)[N]) {
    for (Enum v : values)
        if (to_string(v) == name) return v;
    return std::nullopt;
}

}  // namespace

std::string_view to_string(Violation v) noexcept {
    switch (v) {
        case Violation::None: return "none";
        case Violation::TErrors: return "t_errors";
        case Violation::GammaErrors: return "gamma_errors";
        case Violation::Heteroskedastic: return "heteroskedastic";
        case Violation::Nonlinear: return "nonlinear";
    }
    return "none";
}

std::string_view to_string(BetaPattern p) noexcept {
    switch (p) {
        case BetaPattern::RandomSigns: return "random_signs";
        case BetaPattern::DenseAlternating: return "dense_alternating";
        case BetaPattern::DenseNonnegative: return "dense_nonnegative";
    }
    return "random_signs";
}

std::string_view to_string(ColumnNorm c) noexcept { return c == ColumnNorm::Unit ? "unit" : "sqrt_n"; }

std::optional<Violation> parse_violation(std::string_view name) noexcept {
    static constexpr Violation all[] = {Violation::None, Violation::TErrors, Violation::GammaErrors,
                                        Violation::Heteroskedastic, Violation::Nonlinear};
    return parse_enum(name, all);
}

std::optional<BetaPattern> parse_beta_pattern(std::string_view name) noexcept {
    static constexpr BetaPattern all[] = {BetaPattern::RandomSigns, BetaPattern::DenseAlternating,
                                          BetaPattern::DenseNonnegative};
    return parse_enum(name, all);
}

std::optional<ColumnNorm> parse_column_norm(std::string_view name) noexcept {
    static constexpr ColumnNorm all[] = {ColumnNorm::Unit, ColumnNorm::SqrtN};
    return parse_enum(name, all);
}

void validate(const ScenarioConfig& cfg) {
    auto fail = [&](const std::string& field, const std::string& why) {
        throw Error(ErrorCode::BadArgument, "scenario '" + cfg.id + "': " + field + " " + why);
    };
    if (cfg.d < 1) fail("d", "must be at least 1");
    if (cfg.k < 1 || cfg.k > cfg.d) fail("k", "must lie in [1, d]");
    if (cfg.n <= cfg.d) fail("n", "must exceed d");
    if (cfg.k1 < 0 || cfg.k1 > cfg.k) fail("k1", "must lie in [0, k]");
    if (cfg.k2 < 0 || cfg.k2 > cfg.d - cfg.k) fail("k2", "must lie in [0, d - k]");
    if (!(cfg.rho >= 0.0 && cfg.rho < 1.0)) fail("rho", "must lie in [0, 1)");
    if (cfg.reps < 1) fail("reps", "must be at least 1");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) fail("alpha", "must lie in (0, 1)");
    if (cfg.M < 1) fail("M", "must be at least 1");
    if (!std::isfinite(cfg.amp)) fail("amp", "must be finite");
    if (cfg.cv_folds < 2 || cfg.cv_folds > cfg.n) fail("cv_folds", "must lie in [2, n]");
    if (cfg.tuning_repeats < 1) fail("tuning_repeats", "must be at least 1");
    switch (cfg.violation.kind) {
        case Violation::TErrors:
            if (!(cfg.violation.param > 0.0)) fail("violation.param", "t degrees of freedom must be positive");
            break;
        case Violation::GammaErrors:
            if (!(cfg.violation.param > 0.0)) fail("violation.param", "gamma shape must be positive");
            break;
        case Violation::Heteroskedastic:
            if (!(cfg.violation.param > 0.0)) fail("violation.param", "variance ratio must be positive");
            break;
        case Violation::Nonlinear:
            if (!(cfg.violation.param > 0.0)) fail("violation.param", "exponent must be positive");
            break;
        case Violation::None: break;
    }
}

void standardize_columns(MatrixXd& X, ColumnNorm norm) {
    const double target = norm == ColumnNorm::Unit ? 1.0 : std::sqrt(static_cast<double>(X.rows()));
    for (Index j = 0; j < X.cols(); ++j) {
        auto col = X.col(j);
        col.array() -= col.mean();
        const double len = col.norm();
        if (len > 0.0) col *= target / len;
    }
}

MatrixXd gen_design(const ScenarioConfig& cfg, Rng& rng) {
    const Index n = cfg.n;
    const Index d = cfg.d;
    const Index k = cfg.k;
    const double innovation = std::sqrt(1.0 - cfg.rho * cfg.rho);
    for (int attempt = 0; attempt < kDesignAttempts; ++attempt) {
        MatrixXd X(n, d);
        for (Index i = 0; i < n; ++i) {
            double prev = rng.normal();
            X(i, 0) = prev;
            for (Index j = 1; j < d; ++j) {
                prev = cfg.rho * prev + innovation * rng.normal();
                X(i, j) = prev;
            }
        }
        standardize_columns(X, cfg.column_norm);
        if (cfg.block_orthogonal && d > k) {
            const MatrixXd X1 = X.leftCols(k);
            Eigen::HouseholderQR<MatrixXd> qr(X1);
            const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, k);
            X.rightCols(d - k) -= Q * (Q.transpose() * X.rightCols(d - k));
            standardize_columns(X, cfg.column_norm);
        }
        if (full_rank(X)) return X;
    }
    throw Error(ErrorCode::RankDeficient, "design draw stayed rank deficient after retries");
}

VectorXd gen_beta(const ScenarioConfig& cfg, Rng& rng) {
    const Index d = cfg.d;
    const Index k = cfg.k;
    VectorXd beta = VectorXd::Zero(d);
    switch (cfg.beta_pattern) {
        case BetaPattern::RandomSigns: {
            if (cfg.k1 > 0) {
                std::vector<Index> idx(static_cast<std::size_t>(k));
                std::iota(idx.begin(), idx.end(), Index{0});
                std::shuffle(idx.begin(), idx.end(), rng.engine());
                const double mag = cfg.amp / std::sqrt(static_cast<double>(cfg.k1));
                for (Index a = 0; a < cfg.k1; ++a)
                    beta[idx[static_cast<std::size_t>(a)]] = rng.uniform() < 0.5 ? -mag : mag;
            }
            break;
        }
        case BetaPattern::DenseAlternating: {
            const double mag = cfg.amp / std::sqrt(static_cast<double>(k));
            for (Index j = 0; j < k; ++j) beta[j] = (j % 2 == 0) ? mag : -mag;
            break;
        }
        case BetaPattern::DenseNonnegative: {
            const double mag = cfg.amp / std::sqrt(static_cast<double>(k));
            beta.head(k).setConstant(mag);
            break;
        }
    }
    if (cfg.k2 > 0) {
        std::vector<Index> idx(static_cast<std::size_t>(d - k));
        std::iota(idx.begin(), idx.end(), k);
        std::shuffle(idx.begin(), idx.end(), rng.engine());
        for (Index a = 0; a < cfg.k2; ++a) beta[idx[static_cast<std::size_t>(a)]] = rng.normal();
    }
    return beta;
}

ErrorDraw gen_errors(const ScenarioConfig& cfg, const MatrixXd& X, Rng& rng) {
    const Index n = X.rows();
    ErrorDraw draw;
    draw.eps.resize(n);
    const double param = cfg.violation.param;
    switch (cfg.violation.kind) {
        case Violation::None:
        case Violation::Nonlinear:
            for (Index i = 0; i < n; ++i) draw.eps[i] = rng.normal();
            draw.transform_design = cfg.violation.kind == Violation::Nonlinear;
            break;
        case Violation::TErrors: {
            std::student_t_distribution<double> t(param);
            const double scale = param > 2.0 ? std::sqrt((param - 2.0) / param) : 1.0;
            for (Index i = 0; i < n; ++i) draw.eps[i] = scale * t(rng.engine());
            break;
        }
        case Violation::GammaErrors: {
            std::gamma_distribution<double> g(param, 1.0);
            const double sd = std::sqrt(param);
            for (Index i = 0; i < n; ++i) draw.eps[i] = (g(rng.engine()) - param) / sd;
            break;
        }
        case Violation::Heteroskedastic: {
            const double high = std::sqrt(param);
            for (Index i = 0; i < n; ++i) {
                const double z = rng.normal();
                draw.eps[i] = X.row(i).mean() <= 0.0 ? z : high * z;
            }
            break;
        }
    }
    return draw;
}

MatrixXd nonlinear_design(const MatrixXd& X, double delta) {
    return X.unaryExpr([delta](double x) { return (x < 0.0 ? -1.0 : 1.0) * std::pow(std::abs(x), delta); });
}

Index pc_count(const ModelContext& ctx, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw Error(ErrorCode::BadArgument, "variance threshold must lie in (0, 1]");
    Eigen::JacobiSVD<MatrixXd> svd(ctx.head());
    const VectorXd energy = svd.singularValues().array().square();
    const double total = energy.sum();
    double cumulative = 0.0;
    for (Index r = 0; r < energy.size(); ++r) {
        cumulative += energy[r];
        if (cumulative / total >= threshold - 1e-12) return r + 1;
    }
    return energy.size();
}

TestOutcome pc_test(const ModelContext& ctx, const VectorXd& y, double var_threshold) {
    const Index r = pc_count(ctx, var_threshold);
    Eigen::JacobiSVD<MatrixXd> svd(ctx.head(), Eigen::ComputeThinV);
    MatrixXd Z(ctx.n(), r + ctx.d() - ctx.k());
    Z.leftCols(r) = ctx.head() * svd.matrixV().leftCols(r);
    Z.rightCols(ctx.d() - ctx.k()) = ctx.nuisance();
    TestOutcome out = f_test(Z, r, y);
    out.method = Method::Pc;
    out.meta.branch = "components=" + std::to_string(r);
    return out;
}

TestOutcome phi_test(const ModelContext& ctx, const SufficientState& state, const TuningChoice& tuning, std::size_t M,
                     const Rng& rng, int threads) {
    const AffinePiece piece = affine_piece(ctx, state, tuning.lambda, tuning.b_star);
    auto stat = [&](const Eigen::Ref<const VectorXd>& u) { return (piece.A * u).norm(); };
    const double observed = stat(state.u_head(ctx.k()));
    const McPValue mc = mc_pvalue(ctx, M, rng, observed, stat, threads);
    TestOutcome out;
    out.method = Method::Phi;
    out.statistic = observed;
    out.p_value = mc.p;
    out.mc_samples = M;
    out.meta.lambda = tuning.lambda;
    out.meta.b_star = tuning.b_star;
    out.meta.seed = rng.seed();
    out.meta.tuning_seed = tuning.tuning_seed;
    out.meta.ge_count = mc.ge_count;
    return out;
}

TestOutcome phi_test(const ModelContext& ctx, const VectorXd& y, const TuningChoice& tuning, std::size_t M,
                     const Rng& rng, int threads) {
    return phi_test(ctx, sufficient_state(ctx, y), tuning, M, rng, threads);
}

Replication gen_replication(const ScenarioConfig& cfg, int rep) {
    const Rng root = Rng(cfg.seed).stream({static_cast<std::uint64_t>(rep)});
    Rng design_rng = root.stream({kDesign});
    Rng beta_rng = root.stream({kBeta});
    Rng error_rng = root.stream({kErrors});
    Replication r;
    r.X = gen_design(cfg, design_rng);
    r.beta = gen_beta(cfg, beta_rng);
    const ErrorDraw e = gen_errors(cfg, r.X, error_rng);
    if (e.transform_design)
        r.y = nonlinear_design(r.X, cfg.violation.param) * r.beta + e.eps;
    else
        r.y = r.X * r.beta + e.eps;
    return r;
}

namespace {

struct MethodResult {
    bool ok = false;
    bool rejected = false;
    std::size_t nonconverged = 0;
    double seconds = 0.0;
};

std::vector<MethodResult> run_replication(const ScenarioConfig& cfg, int rep, const std::vector<Method>& methods,
                                          const std::vector<int>& caps, bool share_tuning) {
    std::vector<MethodResult> results(methods.size());
    bool any = false;
    for (std::size_t m = 0; m < methods.size(); ++m) any = any || rep < caps[m];
    if (!any) return results;

    using clock = std::chrono::steady_clock;
    const Rng root = Rng(cfg.seed).stream({static_cast<std::uint64_t>(rep)});
    std::optional<Replication> data;
    std::optional<ModelContext> ctx;
    std::optional<SufficientState> state;
    try {
        data = gen_replication(cfg, rep);
        ctx.emplace(data->X, cfg.k);
        state = sufficient_state(*ctx, data->y);
    } catch (const Error&) {
        return results;  // every method counts a failure
    }

    std::optional<TuningChoice> shared;
    std::optional<Error> shared_error;
    auto tuning_for = [&](std::size_t m) -> TuningChoice {
        if (!share_tuning) return tune(*ctx, *state, root.stream({kTuning, m + 1}), cfg.cv_folds, cfg.tuning_repeats);
        if (shared_error) throw *shared_error;
        if (!shared) {
            try {
                shared = tune(*ctx, *state, root.stream({kTuning}), cfg.cv_folds, cfg.tuning_repeats);
            } catch (const Error& e) {
                shared_error = e;
                throw;
            }
        }
        return *shared;
    };

    for (std::size_t m = 0; m < methods.size(); ++m) {
        if (rep >= caps[m]) continue;
        const auto start = clock::now();
        const Rng mc_rng = root.stream({kMonteCarlo, static_cast<std::uint64_t>(methods[m])});
        try {
            TestOutcome out;
            switch (methods[m]) {
                case Method::F: out = f_test(*ctx, data->y); break;
                case Method::Oracle: out = oracle_test(*ctx, data->y, data->beta); break;
                case Method::Pc: out = pc_test(*ctx, data->y); break;
                case Method::L: out = l_test(*ctx, *state, cfg.M, mc_rng, tuning_for(m)); break;
                case Method::McFree: out = mcfree_test(*ctx, *state, tuning_for(m)); break;
                case Method::Phi: out = phi_test(*ctx, *state, tuning_for(m), cfg.M, mc_rng); break;
                case Method::GlassoMc: out = glasso_mc_test(*ctx, *state, tuning_for(m).lambda, cfg.M, mc_rng); break;
            }
            results[m].ok = true;
            results[m].rejected = out.p_value <= cfg.alpha;
            results[m].nonconverged = out.meta.nonconverged;
        } catch (const Error&) {
            results[m].ok = false;
        }
        results[m].seconds = std::chrono::duration<double>(clock::now() - start).count();
    }
    return results;
}

}  // namespace

std::vector<PowerRecord> run_power_sweep(const std::vector<ScenarioConfig>& grid, const std::vector<Method>& methods,
                                         const SweepOptions& options) {
    if (grid.empty()) throw Error(ErrorCode::BadArgument, "scenario grid is empty");
    if (methods.empty()) throw Error(ErrorCode::BadArgument, "no methods requested");
    std::vector<PowerRecord> records;
    for (const ScenarioConfig& cfg : grid) {
        validate(cfg);
        std::vector<int> caps(methods.size(), cfg.reps);
        for (std::size_t m = 0; m < methods.size(); ++m) {
            auto it = options.method_reps.find(methods[m]);
            if (it != options.method_reps.end()) caps[m] = std::min(caps[m], it->second);
        }
        std::vector<std::vector<MethodResult>> per_rep(static_cast<std::size_t>(cfg.reps));
        parallel_for(per_rep.size(), options.threads, [&](std::size_t r) {
            per_rep[r] = run_replication(cfg, static_cast<int>(r), methods, caps, options.share_tuning);
        });
        for (std::size_t m = 0; m < methods.size(); ++m) {
            PowerRecord rec;
            rec.method = methods[m];
            rec.scenario_id = cfg.id;
            int rejections = 0;
            for (int r = 0; r < caps[m]; ++r) {
                const MethodResult& res = per_rep[static_cast<std::size_t>(r)][m];
                rec.wall_time += res.seconds;
                if (!res.ok) {
                    ++rec.failures;
                    continue;
                }
                ++rec.reps;
                rejections += res.rejected ? 1 : 0;
                rec.nonconverged += res.nonconverged;
            }
            if (rec.reps > 0) {
                rec.rejection_rate = static_cast<double>(rejections) / rec.reps;
                rec.standard_error = std::sqrt(rec.rejection_rate * (1.0 - rec.rejection_rate) / rec.reps);
            }
            records.push_back(rec);
        }
    }
    return records;
}

VarianceDecomposition decompose_variance(const std::vector<std::vector<double>>& p) {
    const std::size_t m_outer = p.size();
    if (m_outer < 2) throw Error(ErrorCode::BadArgument, "need at least two datasets");
    const std::size_t m_inner = p.front().size();
    if (m_inner < 2) throw Error(ErrorCode::BadArgument, "need at least two tuning draws per dataset");
    for (const auto& row : p)
        if (row.size() != m_inner) throw Error(ErrorCode::BadArgument, "ragged p-value matrix");

    const double N = static_cast<double>(m_outer * m_inner);
    std::vector<double> means(m_outer, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < m_outer; ++i) {
        for (double v : p[i]) means[i] += v;
        grand += means[i];
        means[i] /= static_cast<double>(m_inner);
    }
    grand /= N;
    double total_ss = 0.0, within_ss = 0.0, between_ss = 0.0;
    for (std::size_t i = 0; i < m_outer; ++i) {
        for (double v : p[i]) {
            total_ss += (v - grand) * (v - grand);
            within_ss += (v - means[i]) * (v - means[i]);
        }
        between_ss += (means[i] - grand) * (means[i] - grand);
    }
    VarianceDecomposition out;
    out.overall_sd = std::sqrt(total_ss / (N - 1.0));
    out.within_sd = std::sqrt(within_ss / (static_cast<double>(m_outer) * static_cast<double>(m_inner - 1)));
    out.between_sd = std::sqrt(between_ss / static_cast<double>(m_outer - 1));
    out.ratio = out.overall_sd > 0.0 ? out.within_sd / out.overall_sd : 0.0;
    return out;
}

TuningVarianceResult tuning_variance_experiment(const ScenarioConfig& cfg, int m_outer, int m_inner, Method method,
                                                int threads) {
    validate(cfg);
    if (m_outer < 2 || m_inner < 2) throw Error(ErrorCode::BadArgument, "m_outer and m_inner must be at least 2");
    if (method != Method::L && method != Method::McFree)
        throw Error(ErrorCode::BadArgument, "tuning variance is defined for the L and MC-free tests");
    TuningVarianceResult result;
    result.p.assign(static_cast<std::size_t>(m_outer), std::vector<double>(static_cast<std::size_t>(m_inner), 1.0));
    parallel_for(static_cast<std::size_t>(m_outer), threads, [&](std::size_t i) {
        const Replication data = gen_replication(cfg, static_cast<int>(i));
        const ModelContext ctx(data.X, cfg.k);
        const SufficientState state = sufficient_state(ctx, data.y);
        const Rng root = Rng(cfg.seed).stream({static_cast<std::uint64_t>(i)});
        const Rng mc_rng = root.stream({kMonteCarlo});
        for (int j = 0; j < m_inner; ++j) {
            const TuningChoice tc =
                tune(ctx, state, root.stream({kTuning, static_cast<std::uint64_t>(j)}), cfg.cv_folds, cfg.tuning_repeats);
            const TestOutcome out = method == Method::L ? l_test(ctx, state, cfg.M, mc_rng, tc) : mcfree_test(ctx, state, tc);
            result.p[i][static_cast<std::size_t>(j)] = out.p_value;
        }
    });
    result.decomposition = decompose_variance(result.p);
    return result;
}

}  // namespace ltest::sim
