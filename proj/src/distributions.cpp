#include "ltest/distributions.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace ltest::dist {

double beta_cdf(double x, double a, double b) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return boost::math::ibeta(a, b, x);
}

double beta_sf(double x, double a, double b) {
    if (x <= 0.0) return 1.0;
    if (x >= 1.0) return 0.0;
    return boost::math::ibetac(a, b, x);
}

double f_sf(double f, double d1, double d2) {
    if (!(f > 0.0)) return 1.0;
    if (std::isinf(f)) return 0.0;
    // F = (X1/d1)/(X2/d2)  =>  d1 F / (d1 F + d2) ~ Beta(d1/2, d2/2).
    return beta_sf(d1 * f / (d1 * f + d2), 0.5 * d1, 0.5 * d2);
}

double t_sf(double t, double df) {
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    boost::math::students_t_distribution<double> dist(df);
    return boost::math::cdf(boost::math::complement(dist, t));
}

double lgamma(double x) { return boost::math::lgamma(x); }

}  // namespace ltest::dist
