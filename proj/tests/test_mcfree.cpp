#include <doctest.h>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "ltest/classic.hpp"
#include "ltest/distributions.hpp"
#include "ltest/error.hpp"
#include "ltest/mcfree.hpp"
#include "support.hpp"

using namespace ltest;

namespace {

/// P(||u_{1:k} - c|| >= z) by conditioning on ||u_{1:k}||^2 = t ~ Beta(k/2, (n-d)/2):
/// with u_{1:k} = sqrt(t) w, w uniform on the k-sphere, the event is
/// w_1 <= (t + c^2 - z^2) / (2 c sqrt(t)), and w_1^2 ~ Beta(1/2, (k-1)/2).
double survival_by_conditioning(double c, Index k, Index resid_df, double z) {
    const boost::math::beta_distribution<double> radial(0.5 * k, 0.5 * resid_df);
    auto given_t = [&](double t) {
        const double s = std::sqrt(t);
        const double q = (t + c * c - z * z) / (2.0 * c * s);
        if (q >= 1.0) return 1.0;
        if (q <= -1.0) return 0.0;
        const double f = dist::beta_cdf(q * q, 0.5, 0.5 * static_cast<double>(k - 1));
        return 0.5 * (1.0 + (q > 0 ? f : -f));
    };
    auto integrand = [&](double t) { return boost::math::pdf(radial, t) * given_t(t); };
    // The conditional probability has kinks where |q| = 1, i.e. sqrt(t) = |c +- z|.
    std::vector<double> cuts = {0.0, 1.0};
    for (double r : {c - z, c + z})
        if (r * r > 0.0 && r * r < 1.0) cuts.push_back(r * r);
    std::sort(cuts.begin(), cuts.end());
    boost::math::quadrature::tanh_sinh<double> ts;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i + 1] > cuts[i]) total += ts.integrate(integrand, cuts[i], cuts[i + 1], 1e-13);
    return total;
}

double monte_carlo_norms(double c, Index k, Index resid_df, int draws, Rng& rng, std::vector<double>* out) {
    const Index dim = resid_df + k;
    VectorXd cv = VectorXd::Zero(k);
    cv[0] = c;
    double sum = 0.0;
    for (int i = 0; i < draws; ++i) {
        const VectorXd u = rng.unit_sphere(dim);
        const double z = (u.head(k) - cv).norm();
        if (out) out->push_back(z);
        sum += z;
    }
    return sum / draws;
}

double integrate_density(const RecenteredLaw& law) {
    boost::math::quadrature::tanh_sinh<double> ts;
    auto f = [&](double z) { return density(law, z); };
    const double lo = law.support_lo();
    const double hi = law.support_hi();
    const double kink = std::abs(1.0 - law.c_norm);
    if (law.c_norm < 1.0) return ts.integrate(f, lo, kink, 1e-12) + ts.integrate(f, kink, hi, 1e-12);
    return ts.integrate(f, lo, hi, 1e-12);
}

}  // namespace

TEST_CASE("normalizing constant for k = 2, n - d = 2 is 1/pi") {
    const RecenteredLaw law = recentered_law(0.5, 2, 2);
    CHECK(std::exp(law.log_D) == doctest::Approx(1.0 / M_PI).epsilon(1e-14));
}

TEST_CASE("density integrates to one") {
    for (Index k : {2, 3, 10})
        for (Index rd : {2, 50})
            for (double c : {0.3, 1.5}) {
                const RecenteredLaw law = recentered_law(c, k, rd);
                CAPTURE(k);
                CAPTURE(rd);
                CAPTURE(c);
                CHECK(std::abs(integrate_density(law) - 1.0) <= 1e-6);
            }
}

TEST_CASE("density handles the strongest endpoint singularities") {
    for (double c : {0.2, 0.8, 1.3}) {
        const RecenteredLaw law = recentered_law(c, 2, 1);
        CHECK(std::abs(integrate_density(law) - 1.0) <= 1e-6);
        CHECK(std::abs(survival(law, law.support_lo() + 1e-9) - 1.0) <= 1e-6);
    }
}

TEST_CASE("density is nonnegative and vanishes outside the support") {
    const RecenteredLaw law = recentered_law(1.4, 3, 20);
    CHECK(density(law, 0.39) == 0.0);
    CHECK(density(law, 2.41) == 0.0);
    for (double z = 0.41; z < 2.4; z += 0.05) CHECK(density(law, z) > 0.0);
}

TEST_CASE("density refuses the closed-form regimes") {
    try {
        (void)density(recentered_law(0.5, 1, 10), 0.3);
        FAIL("expected BadRegime");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadRegime);
    }
    try {
        (void)density(recentered_law(0.0, 3, 10), 0.3);
        FAIL("expected BadRegime");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadRegime);
    }
    CHECK_THROWS_AS(recentered_law(0.5, 3, 0), Error);
}

TEST_CASE("survival agrees with the conditioning route") {
    for (Index k : {2, 3, 10})
        for (Index rd : {1, 5, 50})
            for (double c : {0.05, 0.4, 1.0, 1.7})
                for (double frac : {0.1, 0.4, 0.7, 0.95}) {
                    const RecenteredLaw law = recentered_law(c, k, rd);
                    const double z = law.support_lo() + frac * (law.support_hi() - law.support_lo());
                    CAPTURE(k);
                    CAPTURE(rd);
                    CAPTURE(c);
                    CAPTURE(z);
                    CHECK(std::abs(survival(law, z) - survival_by_conditioning(c, k, rd, z)) <= 1e-7);
                }
}

TEST_CASE("survival boundary cases and monotonicity") {
    const RecenteredLaw law = recentered_law(0.6, 4, 30);
    CHECK(survival(law, 0.0) == 1.0);
    CHECK(survival(law, 1.6) == 0.0);
    CHECK(survival(law, 5.0) == 0.0);
    double prev = 1.0;
    for (double z = 0.0; z <= 1.6; z += 0.02) {
        const double s = survival(law, z);
        CHECK(s <= prev + 1e-9);
        prev = s;
    }
}

TEST_CASE("centered branch is the Beta survival") {
    for (double z : {0.1, 0.3, 0.6}) {
        const double expect = 1.0 - boost::math::ibeta(2.5, 10.0, z * z);
        CHECK(std::abs(survival(recentered_law(0.0, 5, 20), z) - expect) <= 1e-10);
        CHECK(std::abs(survival(recentered_law(1e-12, 5, 20), z) - expect) <= 1e-10);
    }
}

TEST_CASE("k = 1 closed form") {
    for (double z : {0.0, 0.2, 0.5}) {
        const double expect = z == 0.0 ? 1.0 : 1.0 - boost::math::ibeta(0.5, 10.0, z * z);
        CHECK(std::abs(survival_k1(0.0, 20, z) - expect) <= 1e-12);
    }
    CHECK(survival_k1(0.4, 20, 0.0) == 1.0);
    Rng rng(2024);
    const std::pair<double, double> grid[] = {{0.3, 0.5}, {0.0, 0.2}, {0.7, 0.1}, {1.2, 0.5}, {-0.4, 0.9}};
    const int draws = 1000000;
    std::vector<double> u1(draws);
    for (int i = 0; i < draws; ++i) u1[static_cast<std::size_t>(i)] = rng.unit_sphere(21)[0];
    for (const auto& [c, z] : grid) {
        const double mc = static_cast<double>(std::count_if(u1.begin(), u1.end(), [&](double v) { return std::abs(v - c) >= z; })) / draws;
        const double se = std::sqrt(std::max(mc * (1.0 - mc), 1e-12) / draws);
        CAPTURE(c);
        CAPTURE(z);
        CHECK(std::abs(survival_k1(c, 20, z) - mc) <= 3.0 * se);
    }
}

TEST_CASE("analytic CDF matches Monte Carlo in Kolmogorov distance") {
    Rng rng(515);
    for (const auto& [k, rd, c] : {std::tuple<Index, Index, double>{3, 20, 0.4}, {10, 50, 1.5}, {2, 2, 0.8}}) {
        const RecenteredLaw law = recentered_law(c, k, rd);
        std::vector<double> z;
        z.reserve(100000);
        monte_carlo_norms(c, k, rd, 100000, rng, &z);
        std::sort(z.begin(), z.end());
        // Grid bound: for x in [g_i, g_{i+1}], F(x) lies in [F(g_i), F(g_{i+1})].
        const int m = 1000;
        const double lo = law.support_lo(), hi = law.support_hi();
        std::vector<double> g(m + 1), F(m + 1);
        for (int i = 0; i <= m; ++i) {
            g[i] = lo + (hi - lo) * i / m;
            F[i] = 1.0 - survival(law, g[i]);
        }
        double ks = 0.0;
        const double n = static_cast<double>(z.size());
        for (int i = 0; i < m; ++i) {
            const auto first = std::lower_bound(z.begin(), z.end(), g[i]);
            const auto last = std::upper_bound(z.begin(), z.end(), g[i + 1]);
            const double below = static_cast<double>(first - z.begin()) / n;
            const double upto = static_cast<double>(last - z.begin()) / n;
            const double bound = std::max(upto - F[i], F[i + 1] - below);
            if (bound <= 0.008) {
                ks = std::max(ks, bound);
                continue;
            }
            // Exact supremum over this cell from the samples inside it.
            ks = std::max({ks, std::abs(below - F[i]), std::abs(upto - F[i + 1])});
            for (auto it = first; it != last; ++it) {
                const double Fx = 1.0 - survival(law, *it);
                const double pos = static_cast<double>(it - z.begin());
                ks = std::max({ks, std::abs(Fx - pos / n), std::abs((pos + 1.0) / n - Fx)});
            }
        }
        CAPTURE(k);
        CHECK(ks <= 0.01);
    }
}

TEST_CASE("MC-free test reduces to the conditional F-test when nu = 0") {
    auto cfg = support::scenario(100, 50, 10, 0.4, 10, 4, 0.5, 3);
    cfg.block_orthogonal = true;
    const auto rep = sim::gen_replication(cfg, 0);
    const ModelContext ctx(rep.X, 10);
    const SufficientState s = sufficient_state(ctx, rep.y);
    const TuningChoice tc = tune(ctx, s, Rng(4));
    const TestOutcome out = mcfree_test(ctx, s, tc);
    CHECK(out.p_value == doctest::Approx(conditional_f_pvalue(ctx, s)).epsilon(1e-8));
}

TEST_CASE("MC-free test uses the k = 1 branch") {
    const auto rep = support::instance(60, 20, 1, 0.5, 1, 3, 0.3, 5);
    const ModelContext ctx(rep.X, 1);
    const SufficientState s = sufficient_state(ctx, rep.y);
    const TestOutcome out = mcfree_test(ctx, s, tune(ctx, s, Rng(2)));
    CHECK(out.meta.branch == "k1-closed-form");
    CHECK(out.p_value >= 0.0);
    CHECK(out.p_value <= 1.0);
}
