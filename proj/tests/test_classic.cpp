#include <doctest.h>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "ltest/classic.hpp"
#include "ltest/error.hpp"
#include "support.hpp"

using namespace ltest;

TEST_CASE("hand example: F = 1 and p = 0.5") {
    MatrixXd X(3, 2);
    X << 1, 0, 0, 1, 0, 0;
    const VectorXd y = VectorXd::Ones(3);
    const ModelContext ctx(X, 1);
    const TestOutcome out = f_test(ctx, y);
    CHECK(out.statistic == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.p_value == doctest::Approx(0.5).epsilon(1e-12));
    const TestOutcome direct = f_test(X, 1, y);
    CHECK(direct.p_value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("F-test classical and conditional forms agree") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const Index k = 1 + static_cast<Index>(seed % 10);
        const auto rep = support::instance(100, 50, k, 0.3 * static_cast<double>(seed % 3), k, 4, 0.5, seed);
        const ModelContext ctx(rep.X, k);
        const SufficientState s = sufficient_state(ctx, rep.y);
        const TestOutcome f = f_test(ctx, rep.y);
        CHECK(std::abs(f.p_value - conditional_f_pvalue(ctx, s)) <= 1e-10);
        // Reference F distribution from an independent implementation.
        boost::math::fisher_f_distribution<double> ref(static_cast<double>(k), 50.0);
        CHECK(std::abs(f.p_value - boost::math::cdf(boost::math::complement(ref, f.statistic))) <= 1e-12);
    }
}

TEST_CASE("F-test holds its level under the null") {
    int rejections = 0;
    const int reps = 2000;
    for (int r = 0; r < reps; ++r) {
        const auto rep = support::instance(40, 15, 4, 0.0, 0, 3, 0.3, 777, r);
        const ModelContext ctx(rep.X, 4);
        rejections += f_test(ctx, rep.y).p_value <= 0.05 ? 1 : 0;
    }
    const double rate = static_cast<double>(rejections) / reps;
    CHECK(rate >= 0.036);
    CHECK(rate <= 0.064);
}

TEST_CASE("OLS subvector: three routes agree") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto rep = support::instance(60, 25, 6, 0.5, 6, 5, 0.6, seed);
        const ModelContext ctx(rep.X, 6);
        const SufficientState s = sufficient_state(ctx, rep.y);
        const VectorXd full = ols(rep.X, rep.y).head(6);
        const VectorXd schur = ols_subvector(ctx, rep.y);
        const VectorXd unit = ctx.head_cross().triangularView<Eigen::Lower>().solve(s.sigma_hat * s.u_head(6));
        CHECK((full - schur).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK((full - unit).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("OLS subvector in block-orthogonal and noise-free cases") {
    auto cfg = support::scenario(50, 12, 3, 0.0, 0, 0, 0.4, 5);
    cfg.block_orthogonal = true;
    Rng rng(1);
    const MatrixXd X = sim::gen_design(cfg, rng);
    const ModelContext ctx(X, 3);
    const VectorXd y = rng.normal_vector(50);
    const MatrixXd X1 = X.leftCols(3);
    CHECK((ols_subvector(ctx, y) - ols(X1, y)).cwiseAbs().maxCoeff() <= 1e-8);

    const VectorXd c = (VectorXd(3) << 0.5, -1.0, 2.0).finished();
    CHECK((ols_subvector(ctx, X1 * c) - c).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("oracle with k = 1 is the one-sided t-test") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto rep = support::instance(40, 10, 1, 0.5, 1, 3, 0.2, seed);
        const ModelContext ctx(rep.X, 1);
        const TestOutcome o = oracle_test(ctx, rep.y, rep.beta);
        const VectorXd b = ols(rep.X, rep.y);
        const double rss = (rep.y - rep.X * b).squaredNorm();
        const MatrixXd inv = (rep.X.transpose() * rep.X).inverse();
        const double se = std::sqrt(rss / 30.0 * inv(0, 0));
        const double sign = rep.beta[0] > 0 ? 1.0 : -1.0;
        const double t = sign * b[0] / se;
        boost::math::students_t_distribution<double> ref(30.0);
        CHECK(o.statistic == doctest::Approx(t).epsilon(1e-9));
        CHECK(o.p_value == doctest::Approx(boost::math::cdf(boost::math::complement(ref, t))).epsilon(1e-9));
    }
}

TEST_CASE("oracle p-value only uses the direction of the true coefficients") {
    const auto rep = support::instance(100, 50, 10, 0.4, 10, 4, 0.0, 9);
    const ModelContext ctx(rep.X, 10);
    const double p = oracle_test(ctx, rep.y, rep.beta).p_value;
    for (double scale : {0.01, 3.0, 1e4}) {
        VectorXd scaled = rep.beta;
        scaled.head(10) *= scale;
        CHECK(oracle_test(ctx, rep.y, scaled).p_value == doctest::Approx(p).epsilon(1e-12));
    }
}

TEST_CASE("oracle refuses a zero direction") {
    const auto rep = support::instance(40, 10, 3, 0.0, 0, 2, 0.0, 1);
    const ModelContext ctx(rep.X, 3);
    try {
        (void)oracle_test(ctx, rep.y, rep.beta);
        FAIL("expected NullDirection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NullDirection);
    }
}

TEST_CASE("oracle matches its large-recentering Monte Carlo half-space form") {
    // In the limit of infinite recentering along w = V1'X1 beta_{1:k}, the
    // p-value is the mass of u~ on the far side of the hyperplane through u
    // orthogonal to w.
    const auto rep = support::instance(100, 50, 10, 0.3, 10, 4, 0.0, 4);
    const ModelContext ctx(rep.X, 10);
    const SufficientState s = sufficient_state(ctx, rep.y);
    const VectorXd w0 = ctx.head_cross() * rep.beta.head(10);
    const VectorXd w = w0 / w0.norm();
    const double obs = w.dot(s.u_head(10));
    Rng rng(55);
    const int M = 10000;
    int ge = 0;
    for (int i = 0; i < M; ++i) {
        const VectorXd u = rng.unit_sphere(ctx.sphere_dim());
        ge += w.dot(u.head(10)) >= obs ? 1 : 0;
    }
    const double mc = static_cast<double>(ge) / M;
    const double se = std::sqrt(mc * (1.0 - mc) / M);
    const double p = oracle_test(ctx, rep.y, rep.beta).p_value;
    CHECK(std::abs(p - mc) <= 2.0 * std::max(se, 1.0 / M));
}
