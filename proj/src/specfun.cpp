#include "finiten/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "finiten/error.hpp"

namespace finiten::specfun {
namespace {

void require_positive(double x, const char* fn, const char* arg) {
  if (!std::isfinite(x) || !(x > 0.0)) {
    throw DomainError(std::string(fn) + ": " + arg + " must be finite and positive");
  }
}

void require_dof(int dof, const char* fn) {
  if (dof < 1) throw DomainError(std::string(fn) + ": degrees of freedom must be >= 1");
}

double chi2_density(double s, double q) {
  if (q <= 0.0) return 0.0;
  return 0.5 * std::exp((s - 1.0) * std::log(0.5 * q) - 0.5 * q - log_gamma(s));
}

}  // namespace

double log_gamma(double x) {
  require_positive(x, "log_gamma", "x");
  return boost::math::lgamma(x);
}

double digamma(double x) {
  require_positive(x, "digamma", "x");
  return boost::math::digamma(x);
}

double reg_inc_beta(double a, double b, double x) {
  require_positive(a, "reg_inc_beta", "a");
  require_positive(b, "reg_inc_beta", "b");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("reg_inc_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  if (a == b && x == 0.5) return 0.5;
  return boost::math::ibeta(a, b, x);
}

double reg_inc_gamma_lower(double s, double x) {
  require_positive(s, "reg_inc_gamma_lower", "s");
  if (std::isnan(x) || x < 0.0) throw DomainError("reg_inc_gamma_lower: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(s, x);
}

double reg_inc_gamma_upper(double s, double x) {
  require_positive(s, "reg_inc_gamma_upper", "s");
  if (std::isnan(x) || x < 0.0) throw DomainError("reg_inc_gamma_upper: x must be >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(s, x);
}

double chi2_cdf(int dof, double x) {
  require_dof(dof, "chi2_cdf");
  if (std::isnan(x)) throw DomainError("chi2_cdf: x is NaN");
  if (x <= 0.0) return 0.0;
  return reg_inc_gamma_lower(0.5 * dof, 0.5 * x);
}

double chi2_sf(int dof, double x) {
  require_dof(dof, "chi2_sf");
  if (std::isnan(x)) throw DomainError("chi2_sf: x is NaN");
  if (x <= 0.0) return 1.0;
  return reg_inc_gamma_upper(0.5 * dof, 0.5 * x);
}

double chi2_quantile(int dof, double p) {
  require_dof(dof, "chi2_quantile");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("chi2_quantile: p must lie in (0, 1)");

  const double s = 0.5 * dof;
  const bool upper = p > 0.5;
  const double target = upper ? 1.0 - p : p;
  // Increasing in q on both branches; the upper branch avoids cancellation near p = 1.
  auto residual = [&](double q) {
    return upper ? target - reg_inc_gamma_upper(s, 0.5 * q)
                 : reg_inc_gamma_lower(s, 0.5 * q) - target;
  };

  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(dof));
  while (residual(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }

  double q = std::clamp(static_cast<double>(dof), lo, hi);
  if (q == lo || q == hi) q = 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    const double r = residual(q);
    if (std::abs(r) <= 1e-15) break;
    if (r < 0.0) {
      lo = q;
    } else {
      hi = q;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    const double slope = chi2_density(s, q);
    double next = slope > 0.0 ? q - r / slope : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    q = next;
  }
  return q;
}

}  // namespace finiten::specfun
