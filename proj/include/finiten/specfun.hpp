#pragma once

// Scalar special functions. All functions are pure and thread-safe; invalid
// arguments raise finiten::DomainError.

namespace finiten::specfun {

// ln Gamma(x), x > 0.
double log_gamma(double x);

// psi(x) = d/dx ln Gamma(x), x > 0.
double digamma(double x);

// Regularized incomplete beta I_x(a, b).
double reg_inc_beta(double a, double b, double x);

// Regularized lower incomplete gamma P(s, x).
double reg_inc_gamma_lower(double s, double x);

// Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x), accurate in the tail.
double reg_inc_gamma_upper(double s, double x);

double chi2_cdf(int dof, double x);

// Survival function 1 - F(x) of the chi-squared law.
double chi2_sf(int dof, double x);

// Value q with chi2_cdf(dof, q) == p. Bracketed Newton iteration with a
// bisection fallback; converges to 1e-12 on the probability scale.
double chi2_quantile(int dof, double p);

}  // namespace finiten::specfun
