#pragma once

#include "ltest/model.hpp"
#include "ltest/outcome.hpp"
#include "ltest/solvers.hpp"

namespace ltest {

/// Law of Z = ||u_{1:k} - c|| for u uniform on the unit sphere in R^{n-d+k}.
/// Depends on c only through its norm.
struct RecenteredLaw {
    double c_norm = 0.0;
    Index k = 1;
    Index resid_df = 1;  // n - d
    double log_D = 0.0;  // log of the density's normalizing constant

    double support_lo() const { return c_norm <= 1.0 ? 0.0 : c_norm - 1.0; }
    double support_hi() const { return c_norm + 1.0; }
};

/// Builds the law; log_D is filled for k >= 2.
RecenteredLaw recentered_law(double c_norm, Index k, Index resid_df);

/// f_Z(z) = z g(z), g(z) = int h(z, t) dt over t in [(c - z)^2, min(1, (c + z)^2)],
/// h(z, t) = (D/c)(1 - t)^{(n-d-2)/2} (t - ((t + c^2 - z^2)/(2c))^2)^{(k-3)/2}.
/// Requires k >= 2 and c > 0.
double density(const RecenteredLaw& law, double z);

/// P(Z >= z_obs). Dispatches to the closed forms for k = 1 and c = 0.
double survival(const RecenteredLaw& law, double z_obs);

/// k = 1: P(|u_1 - c| >= z) with u_1^2 ~ Beta(1/2, (n-d)/2).
double survival_k1(double c, Index resid_df, double z_obs);

/// c = 0: P(||u_{1:k}|| >= z) = 1 - I_{z^2}(k/2, (n-d)/2).
double survival_centered(Index k, Index resid_df, double z_obs);

/// ||c|| at or below this uses the centered closed form.
inline constexpr double kCenteredTolerance = 1e-10;

/// Rejects for large ||u_{1:k} - nu|| with nu the recentering vector of the
/// tuned affine piece, using the exact null law instead of Monte Carlo.
TestOutcome mcfree_test(const ModelContext& ctx, const VectorXd& y, const TuningChoice& tuning);
TestOutcome mcfree_test(const ModelContext& ctx, const SufficientState& state, const TuningChoice& tuning);

}  // namespace ltest
