#include "finiten/jacobi_stein.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "finiten/error.hpp"
#include "finiten/specfun.hpp"

namespace finiten {
namespace {

void require_jacobi_alpha(double alpha, const char* fn) {
  if (!std::isfinite(alpha) || !(alpha > -1.0)) {
    throw DomainError(std::string(fn) + ": alpha must be finite and > -1");
  }
}

// Single P_k in extended precision; the scalar entry points round once at
// the end.
long double jacobi_last(long double alpha, int k, long double y) {
  long double prev = 1.0L;
  if (k == 0) return prev;
  long double cur = (alpha + 1.0L) * y;
  for (int i = 1; i < k; ++i) {
    const long double kk = i;
    const long double a = (2.0L * kk + 2.0L * alpha + 1.0L) * (kk + alpha + 1.0L);
    const long double b = (kk + alpha) * (kk + alpha + 1.0L);
    const long double c = (kk + 1.0L) * (kk + 2.0L * alpha + 1.0L);
    const long double next = (a * y * cur - b * prev) / c;
    prev = cur;
    cur = next;
  }
  return cur;
}

long double jacobi_deriv_ld(long double alpha, int k, long double y) {
  if (k == 0) return 0.0L;
  return 0.5L * (k + 2.0L * alpha + 1.0L) * jacobi_last(alpha + 1.0L, k - 1, y);
}

void require_finite_y(double y, const char* fn) {
  if (!std::isfinite(y)) throw DomainError(std::string(fn) + ": y must be finite");
}

}  // namespace

void jacobi_eval_into(double alpha, double y, std::span<double> out) {
  require_jacobi_alpha(alpha, "jacobi_eval_into");
  if (!std::isfinite(y)) throw DomainError("jacobi_eval_into: y must be finite");
  const std::size_t count = out.size();
  if (count == 0) return;
  out[0] = 1.0;
  if (count == 1) return;
  out[1] = (alpha + 1.0) * y;
  // The k = 0 step is written out above; for k >= 1 the leading factor
  // (k+1)(k+2a+1) is positive whenever a > -1.
  for (std::size_t i = 1; i + 1 < count; ++i) {
    const double k = static_cast<double>(i);
    const double a = (2.0 * k + 2.0 * alpha + 1.0) * (k + alpha + 1.0);
    const double b = (k + alpha) * (k + alpha + 1.0);
    const double c = (k + 1.0) * (k + 2.0 * alpha + 1.0);
    out[i + 1] = (a * y * out[i] - b * out[i - 1]) / c;
  }
}

std::vector<double> jacobi_eval_all(double alpha, int k_max, double y) {
  if (k_max < 0) throw DomainError("jacobi_eval_all: k_max must be >= 0");
  std::vector<double> values(static_cast<std::size_t>(k_max) + 1);
  jacobi_eval_into(alpha, y, values);
  return values;
}

double jacobi_eval(double alpha, int k, double y) {
  require_jacobi_alpha(alpha, "jacobi_eval");
  require_finite_y(y, "jacobi_eval");
  if (k < 0) throw DomainError("jacobi_eval: k must be >= 0");
  return static_cast<double>(jacobi_last(alpha, k, y));
}

double jacobi_deriv(double alpha, int k, double y) {
  require_jacobi_alpha(alpha, "jacobi_deriv");
  require_finite_y(y, "jacobi_deriv");
  if (k < 0) throw DomainError("jacobi_deriv: k must be >= 0");
  return static_cast<double>(jacobi_deriv_ld(alpha, k, y));
}

double jacobi_second_deriv(double alpha, int k, double y) {
  require_jacobi_alpha(alpha, "jacobi_second_deriv");
  require_finite_y(y, "jacobi_second_deriv");
  if (k < 0) throw DomainError("jacobi_second_deriv: k must be >= 0");
  if (k < 2) return 0.0;
  return static_cast<double>(0.5L * (k + 2.0L * alpha + 1.0L) *
                             jacobi_deriv_ld(alpha + 1.0L, k - 1, y));
}

double sigma_k(double alpha, int k) {
  if (!std::isfinite(alpha) || !(alpha > 0.0)) throw DomainError("sigma_k: alpha must be > 0");
  if (k < 1) throw DomainError("sigma_k: k must be >= 1");
  using specfun::log_gamma;
  const double kk = static_cast<double>(k);
  const double log_weight_norm =
      log_gamma(alpha + 1.5) - 0.5 * std::log(std::numbers::pi) - log_gamma(alpha + 1.0);
  const double log_sq_norm = (2.0 * alpha + 1.0) * std::numbers::ln2 -
                             std::log(2.0 * kk + 2.0 * alpha + 1.0) +
                             2.0 * log_gamma(kk + alpha + 1.0) - log_gamma(kk + 1.0) -
                             log_gamma(kk + 2.0 * alpha + 1.0);
  const double log_variance = 2.0 * std::log(2.0 * kk) + log_weight_norm + log_sq_norm;
  return std::exp(0.5 * log_variance);
}

JacobiBasis::JacobiBasis(double alpha, int max_order) : alpha_(alpha), max_order_(max_order) {
  if (!std::isfinite(alpha) || !(alpha > 0.0)) throw DomainError("JacobiBasis: alpha must be > 0");
  if (max_order < 1) throw DomainError("JacobiBasis: max_order must be >= 1");
  sigmas_.reserve(max_order);
  scale_.reserve(max_order);
  for (int k = 1; k <= max_order; ++k) {
    const double s = sigma_k(alpha, k);
    if (!std::isfinite(s) || !(s > 0.0) || (!sigmas_.empty() && !(s > sigmas_.back()))) {
      throw DomainError("JacobiBasis: normalizers not positive and increasing at k = " +
                        std::to_string(k));
    }
    sigmas_.push_back(s);
    scale_.push_back(-2.0 * k / s);
  }
}

JacobiBasis JacobiBasis::for_law(const FiniteNLaw& law, int max_order) {
  return JacobiBasis(law.alpha(), max_order);
}

double JacobiBasis::sigma(int k) const {
  if (k < 1 || k > max_order_) throw DomainError("JacobiBasis::sigma: k out of range");
  return sigmas_[k - 1];
}

double JacobiBasis::psi(int k, double y) const {
  if (k < 1 || k > max_order_) throw DomainError("JacobiBasis::psi: k out of range");
  return scale_[k - 1] * jacobi_eval_all(alpha_, k, y).back();
}

void JacobiBasis::psi_into(double y, std::span<double> out, std::span<double> scratch) const {
  const std::size_t m = out.size();
  if (m > static_cast<std::size_t>(max_order_) || scratch.size() < m + 1) {
    throw DomainError("JacobiBasis::psi_into: buffer sizes inconsistent with basis");
  }
  jacobi_eval_into(alpha_, y, scratch.first(m + 1));
  for (std::size_t k = 1; k <= m; ++k) out[k - 1] = scale_[k - 1] * scratch[k];
}

double stein_apply_rescaled(double alpha, int k, double y) {
  if (!std::isfinite(alpha) || !(alpha > 0.0)) {
    throw DomainError("stein_apply_rescaled: alpha must be > 0");
  }
  if (k < 1) throw DomainError("stein_apply_rescaled: k must be >= 1");
  require_finite_y(y, "stein_apply_rescaled");
  const long double shifted = alpha + 1.0L;
  const long double yy = y;
  const long double g = jacobi_last(shifted, k - 1, yy);
  const long double g_prime = jacobi_deriv_ld(shifted, k - 1, yy);
  return static_cast<double>((1.0L - yy * yy) * g_prime - 2.0L * shifted * yy * g);
}

double stein_apply_unrescaled(const FiniteNLaw& law, double f_value, double f_deriv, double x) {
  if (!std::isfinite(x) || std::abs(x) > law.support_bound()) {
    throw DomainError("stein_apply_unrescaled: x outside the support");
  }
  const double N = law.N();
  return (1.0 - x * x / N) * f_deriv - ((N - 1.0) / N) * x * f_value;
}

}  // namespace finiten
