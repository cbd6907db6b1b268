#pragma once

namespace ltest::dist {

/// Regularized incomplete Beta I_x(a, b) and its complement.
double beta_cdf(double x, double a, double b);
double beta_sf(double x, double a, double b);

/// Survival function of F_{d1,d2}.
double f_sf(double f, double d1, double d2);

/// Survival function of Student's t with df degrees of freedom.
double t_sf(double t, double df);

/// log Gamma.
double lgamma(double x);

}  // namespace ltest::dist
