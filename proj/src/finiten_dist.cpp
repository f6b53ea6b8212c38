#include "finiten/finiten_dist.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "finiten/error.hpp"
#include "finiten/specfun.hpp"

namespace finiten {
namespace {

void require_finite(double x, const char* fn) {
  if (!std::isfinite(x)) throw DomainError(std::string(fn) + ": argument must be finite");
}

void require_nonempty(std::size_t n, const char* fn) {
  if (n == 0) throw DomainError(std::string(fn) + ": sample size must be >= 1");
}

}  // namespace

FiniteNLaw::FiniteNLaw(double particles) : n_(particles) {
  if (!std::isfinite(particles) || !(particles > 3.0)) {
    throw DomainError("FiniteNLaw: N must be finite and > 3");
  }
  alpha_ = 0.5 * (n_ - 3.0);
  bound_ = std::sqrt(n_);
  log_norm_ = specfun::log_gamma(0.5 * n_) - 0.5 * std::log(n_ * std::numbers::pi) -
              specfun::log_gamma(0.5 * (n_ - 1.0));
}

double log_density(const FiniteNLaw& law, double x) {
  require_finite(x, "log_density");
  if (std::abs(x) >= law.support_bound()) return -INFINITY;
  return law.log_norm() + law.alpha() * std::log1p(-x * x / law.N());
}

double density(const FiniteNLaw& law, double x) { return std::exp(log_density(law, x)); }

double cdf(const FiniteNLaw& law, double x) {
  require_finite(x, "cdf");
  if (x <= -law.support_bound()) return 0.0;
  if (x >= law.support_bound()) return 1.0;
  if (x == 0.0) return 0.5;
  const double a = law.beta_shape();
  // Evaluate the smaller tail directly and reflect.
  const double z = 0.5 * (1.0 - std::abs(x) / law.support_bound());
  const double tail = specfun::reg_inc_beta(a, a, z);
  return x < 0.0 ? tail : 1.0 - tail;
}

double quantile(const FiniteNLaw& law, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  if (p > 0.5) return -quantile(law, 1.0 - p);
  const double a = law.beta_shape();
  const double z = boost::math::ibeta_inv(a, a, p);
  return law.support_bound() * (2.0 * z - 1.0);
}

FiniteNSampler::FiniteNSampler(const FiniteNLaw& law)
    : bound_(law.support_bound()), shape_(law.beta_shape()) {}

void FiniteNSampler::fill(std::span<double> out, Philox4x32& rng) const {
  GammaVariate left(shape_);
  GammaVariate right(shape_);
  for (double& x : out) {
    double centered;
    do {
      const double g1 = left(rng);
      const double g2 = right(rng);
      centered = (g1 - g2) / (g1 + g2);
    } while (!(std::abs(centered) < 1.0));
    x = bound_ * centered;
    // Rounding in the product can land on the boundary itself.
    if (std::abs(x) >= bound_) x = std::nextafter(bound_, 0.0) * (x < 0.0 ? -1.0 : 1.0);
  }
}

Sample sample(const FiniteNLaw& law, std::size_t n, Philox4x32& rng) {
  require_nonempty(n, "sample");
  Sample out(n);
  FiniteNSampler(law).fill(out, rng);
  return out;
}

Sample sample(const FiniteNLaw& law, std::size_t n, std::uint64_t seed) {
  Philox4x32 rng(seed);
  return sample(law, n, rng);
}

Sample sample_gaussian_alternative(std::size_t n, Philox4x32& rng) {
  require_nonempty(n, "sample_gaussian_alternative");
  Sample out(n);
  NormalVariate normal;
  for (double& x : out) x = normal(rng);
  return out;
}

Sample sample_gaussian_alternative(std::size_t n, std::uint64_t seed) {
  Philox4x32 rng(seed);
  return sample_gaussian_alternative(n, rng);
}

double log_likelihood(const FiniteNLaw& law, std::span<const double> sample) {
  require_nonempty(sample.size(), "log_likelihood");
  double log_terms = 0.0;
  for (double x : sample) {
    require_finite(x, "log_likelihood");
    if (std::abs(x) >= law.support_bound()) return -INFINITY;
    log_terms += std::log1p(-x * x / law.N());
  }
  return static_cast<double>(sample.size()) * law.log_norm() + law.alpha() * log_terms;
}

namespace {

double log_shell_mean(const FiniteNLaw& law) {
  // E[ln(1 - X^2/N)] under p_N.
  return specfun::digamma(0.5 * (law.N() - 1.0)) - specfun::digamma(0.5 * law.N());
}

}  // namespace

double kl_to_gaussian(const FiniteNLaw& law) {
  return law.log_norm() + 0.5 * (1.0 + std::log(2.0 * std::numbers::pi)) +
         law.alpha() * log_shell_mean(law);
}

double log_typical_ratio_bracket(const FiniteNLaw& law) {
  const double N = law.N();
  return 0.5 * std::log(N / (2.0 * std::numbers::e)) + specfun::log_gamma(0.5 * (N - 1.0)) -
         specfun::log_gamma(0.5 * N) - law.alpha() * log_shell_mean(law);
}

double typical_likelihood_ratio(const FiniteNLaw& law, std::uint64_t n) {
  if (n == 0) return 1.0;
  return std::exp(static_cast<double>(n) * log_typical_ratio_bracket(law));
}

double sanov_power_proxy(const FiniteNLaw& law, std::uint64_t n) {
  return -std::expm1(-static_cast<double>(n) * kl_to_gaussian(law));
}

}  // namespace finiten
