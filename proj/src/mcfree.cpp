#include "ltest/mcfree.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ltest/distributions.hpp"
#include "ltest/error.hpp"
#include "ltest/l_test.hpp"

namespace ltest {

namespace {

constexpr double kInnerTol = 1e-12;
constexpr double kOuterTol = 1e-12;
constexpr int kMaxPanels = 400;

/// Globally adaptive GK31: splits the panel with the largest error estimate
/// until the summed estimate meets max(abs_tol, rel_tol |I|).
template <class F>
double adaptive_gk(F f, double a, double b, double abs_tol, double rel_tol) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    struct Panel {
        double lo, hi, value, error;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    auto panel = [&](double lo, double hi) {
        Panel p{lo, hi, 0.0, 0.0};
        p.value = GK::integrate(f, lo, hi, 0, 0.0, &p.error);
        p.error *= 0.5 * (hi - lo);  // reported on the reference interval [-1, 1]
        return p;
    };
    std::priority_queue<Panel> heap;
    Panel first = panel(a, b);
    double total = first.value;
    double error = first.error;
    heap.push(first);
    for (int count = 1; count < kMaxPanels; ++count) {
        if (error <= std::max(abs_tol, rel_tol * std::abs(total))) break;
        const Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) break;
        const Panel left = panel(worst.lo, mid);
        const Panel right = panel(mid, worst.hi);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    return total;
}

void require_resid_df(Index resid_df) {
    if (resid_df < 1) throw Error(ErrorCode::BadRegime, "the null law needs n - d >= 1");
}

/// g(z) without the leading D/c factor.
double inner_integral(const RecenteredLaw& law, double z) {
    const double c = law.c_norm;
    const double a = (c - z) * (c - z);
    const double root_hi = (c + z) * (c + z);
    const double b = std::min(1.0, root_hi);
    if (!(b > a)) return 0.0;
    const double e_tail = 0.5 * (static_cast<double>(law.resid_df) - 2.0);
    const double e_ring = 0.5 * (static_cast<double>(law.k) - 3.0);
    const double inv4c2 = 1.0 / (4.0 * c * c);
    const double width = b - a;
    // t = a + (b - a) sin^2(theta) turns the endpoint singularities into
    // bounded (or integrable-by-GK) behaviour.
    auto integrand = [&](double theta) {
        const double s = std::sin(theta);
        const double co = std::cos(theta);
        // The quadratic vanishes at a and root_hi: (t - a)(root_hi - t) / (4c^2).
        const double lower = width * s * s;
        const double upper = (root_hi - b) + width * co * co;
        const double ring = lower * upper * inv4c2;
        const double one_minus_t = (1.0 - b) + width * co * co;
        if (!(ring > 0.0) || !(one_minus_t > 0.0)) return 0.0;
        const double jac = 2.0 * width * s * co;
        return std::exp(e_tail * std::log(one_minus_t) + e_ring * std::log(ring)) * jac;
    };
    return adaptive_gk(integrand, 0.0, boost::math::constants::half_pi<double>(), 0.0, kInnerTol);
}

double beta_head_cdf(double a, Index resid_df) {
    // P(u_1 <= a) = (1 + sign(a) F_B(a^2)) / 2, B ~ Beta(1/2, (n-d)/2).
    if (a == 0.0) return 0.5;
    const double fb = dist::beta_cdf(std::min(1.0, a * a), 0.5, 0.5 * static_cast<double>(resid_df));
    return 0.5 * (1.0 + (a > 0.0 ? fb : -fb));
}

}  // namespace

RecenteredLaw recentered_law(double c_norm, Index k, Index resid_df) {
    if (!(c_norm >= 0.0) || !std::isfinite(c_norm)) throw Error(ErrorCode::BadArgument, "||c|| must be finite and >= 0");
    if (k < 1) throw Error(ErrorCode::BadGroupSize, "k must be at least 1");
    require_resid_df(resid_df);
    RecenteredLaw law;
    law.c_norm = c_norm;
    law.k = k;
    law.resid_df = resid_df;
    if (k >= 2) {
        const double kd = static_cast<double>(k);
        const double rd = static_cast<double>(resid_df);
        law.log_D = dist::lgamma(0.5 * (rd + kd)) - 0.5 * std::log(boost::math::constants::pi<double>()) -
                    dist::lgamma(0.5 * (kd - 1.0)) - dist::lgamma(0.5 * rd);
    }
    return law;
}

double density(const RecenteredLaw& law, double z) {
    if (law.k < 2) throw Error(ErrorCode::BadRegime, "k = 1 uses the closed-form branch");
    if (!(law.c_norm > kCenteredTolerance)) throw Error(ErrorCode::BadRegime, "c = 0 uses the Beta branch");
    require_resid_df(law.resid_df);
    if (!(z > law.support_lo()) || !(z < law.support_hi())) return 0.0;
    const double g = inner_integral(law, z);
    return std::max(0.0, z * std::exp(law.log_D) / law.c_norm * g);
}

double survival_k1(double c, Index resid_df, double z_obs) {
    require_resid_df(resid_df);
    if (!(z_obs > 0.0)) return 1.0;
    const double p = 1.0 - beta_head_cdf(c + z_obs, resid_df) + beta_head_cdf(c - z_obs, resid_df);
    return std::clamp(p, 0.0, 1.0);
}

double survival_centered(Index k, Index resid_df, double z_obs) {
    require_resid_df(resid_df);
    if (!(z_obs > 0.0)) return 1.0;
    return dist::beta_sf(z_obs * z_obs, 0.5 * static_cast<double>(k), 0.5 * static_cast<double>(resid_df));
}

double survival(const RecenteredLaw& law, double z_obs) {
    if (law.k == 1) return survival_k1(law.c_norm, law.resid_df, z_obs);
    if (law.c_norm <= kCenteredTolerance) return survival_centered(law.k, law.resid_df, z_obs);
    const double lo = law.support_lo();
    const double hi = law.support_hi();
    if (!(z_obs > lo)) return 1.0;
    if (!(z_obs < hi)) return 0.0;

    auto f = [&](double z) { return density(law, z); };
    // g has a kink where (c + z)^2 crosses 1.
    const double kink = std::abs(1.0 - law.c_norm);
    double total = 0.0;
    if (law.c_norm < 1.0 && kink > z_obs && kink < hi) {
        total += adaptive_gk(f, z_obs, kink, 0.5 * kOuterTol, 0.0);
        total += adaptive_gk(f, kink, hi, 0.5 * kOuterTol, 0.0);
    } else {
        total = adaptive_gk(f, z_obs, hi, kOuterTol, 0.0);
    }
    return std::clamp(total, 0.0, 1.0);
}

TestOutcome mcfree_test(const ModelContext& ctx, const SufficientState& state, const TuningChoice& tuning) {
    if (ctx.resid_df() < 1) throw Error(ErrorCode::BadRegime, "conditional tests need n > d");
    const VectorXd nu = recentering_vector(ctx, state, tuning.lambda, tuning.b_star);
    const double z = (state.u_head(ctx.k()) - nu).norm();
    const RecenteredLaw law = recentered_law(nu.norm(), ctx.k(), ctx.resid_df());

    TestOutcome out;
    out.method = Method::McFree;
    out.statistic = z;
    out.p_value = survival(law, z);
    out.meta.lambda = tuning.lambda;
    out.meta.b_star = tuning.b_star;
    out.meta.tuning_seed = tuning.tuning_seed;
    if (ctx.k() == 1)
        out.meta.branch = "k1-closed-form";
    else if (law.c_norm <= kCenteredTolerance)
        out.meta.branch = "centered-beta";
    else
        out.meta.branch = "numerical-integration";
    return out;
}

TestOutcome mcfree_test(const ModelContext& ctx, const VectorXd& y, const TuningChoice& tuning) {
    return mcfree_test(ctx, sufficient_state(ctx, y), tuning);
}

}  // namespace ltest
