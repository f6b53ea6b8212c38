#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "finiten/random.hpp"

namespace finiten {

// Velocity components in units where sum v^2 = N over the whole system.
using Sample = std::vector<double>;

// One-dimensional marginal of N particles uniformly distributed on the
// fixed-energy sphere:
//
//   p_N(x) = C_N (1 - x^2/N)^alpha,  |x| < sqrt(N),  alpha = (N - 3)/2,
//   C_N    = Gamma(N/2) / (sqrt(N pi) Gamma((N - 1)/2)).
//
// N is any real > 3; the law has zero mean and unit variance and tends to the
// standard normal as N grows. Immutable.
class FiniteNLaw {
 public:
  explicit FiniteNLaw(double particles);

  double N() const { return n_; }
  double alpha() const { return alpha_; }
  double support_bound() const { return bound_; }
  double log_norm() const { return log_norm_; }

  // Shape parameter a of the symmetric Beta(a, a) law of (1 + x/sqrt(N))/2.
  double beta_shape() const { return 0.5 * (n_ - 1.0); }

 private:
  double n_;
  double alpha_;
  double bound_;
  double log_norm_;
};

// -infinity outside the open support.
double log_density(const FiniteNLaw& law, double x);
double density(const FiniteNLaw& law, double x);

// Clamped to 0 / 1 outside the support.
double cdf(const FiniteNLaw& law, double x);

double quantile(const FiniteNLaw& law, double p);

// Draws use X = sqrt(N) (2B - 1), B ~ Beta((N-1)/2, (N-1)/2) from two gamma
// variates. Every value lies strictly inside (-sqrt(N), sqrt(N)).
Sample sample(const FiniteNLaw& law, std::size_t n, Philox4x32& rng);
Sample sample(const FiniteNLaw& law, std::size_t n, std::uint64_t seed);

// Standard normal draws in the same x-units (the Gaussian alternative).
Sample sample_gaussian_alternative(std::size_t n, Philox4x32& rng);
Sample sample_gaussian_alternative(std::size_t n, std::uint64_t seed);

// Reusable sampler for hot loops: fills a caller-owned buffer.
class FiniteNSampler {
 public:
  explicit FiniteNSampler(const FiniteNLaw& law);
  void fill(std::span<double> out, Philox4x32& rng) const;

 private:
  double bound_;
  double shape_;
};

// n ln C_N + alpha sum ln(1 - x_i^2/N); -infinity if any point is off-support.
double log_likelihood(const FiniteNLaw& law, std::span<const double> sample);

// D_KL(p_N || standard normal) in closed form:
//   ln C_N + (1 + ln 2pi)/2 + alpha [psi((N-1)/2) - psi(N/2)].
double kl_to_gaussian(const FiniteNLaw& law);

// Logarithm of the per-observation typical likelihood ratio bracket
//   sqrt(N/(2e)) Gamma((N-1)/2)/Gamma(N/2) exp{-alpha [psi((N-1)/2) - psi(N/2)]},
// evaluated independently of kl_to_gaussian.
double log_typical_ratio_bracket(const FiniteNLaw& law);

// Typical likelihood ratio (Gaussian over p_N) for n observations; the
// bracket raised to the n-th power, equal to exp(-n D_KL).
double typical_likelihood_ratio(const FiniteNLaw& law, std::uint64_t n);

// Exponent-only power benchmark 1 - exp(-n D_KL).
double sanov_power_proxy(const FiniteNLaw& law, std::uint64_t n);

}  // namespace finiten
