#pragma once

#include <span>
#include <vector>

#include "finiten/finiten_dist.hpp"

namespace finiten {

// Symmetric Jacobi polynomials P_k^(alpha,alpha) in the classical
// normalization P_k(1) = binom(k + alpha, k), generated by the three-term
// rule
//
//   (k+1)(k+2a+1) P_{k+1} = (2k+2a+1)(k+a+1) y P_k - (k+a)(k+a+1) P_{k-1},
//
// with P_0 = 1 and P_1 = (a+1) y. Evaluation outside [-1, 1] is allowed.

// P_0 .. P_{k_max} at y.
std::vector<double> jacobi_eval_all(double alpha, int k_max, double y);

// Non-allocating form: fills out[0..out.size()-1] with P_0 .. P_{size-1}.
void jacobi_eval_into(double alpha, double y, std::span<double> out);

// Scalar evaluation below runs the recurrence in extended precision.
double jacobi_eval(double alpha, int k, double y);

// d/dy P_k^(a,a) = (k+2a+1)/2 P_{k-1}^(a+1,a+1); zero for k = 0.
double jacobi_deriv(double alpha, int k, double y);

// Second derivative through two applications of the derivative identity.
double jacobi_second_deriv(double alpha, int k, double y);

// Standard deviation of the k-th Stein component under the normalized weight
// w_a(y) proportional to (1 - y^2)^a:
//   sigma_k^2 = 4k^2 E_w[P_k^2]
//             = 4k^2 Gamma(a+3/2)/(sqrt(pi) Gamma(a+1)) 2^(2a+1)/(2k+2a+1)
//               Gamma(k+a+1)^2 / (k! Gamma(k+2a+1)).
// Evaluated in log space.
double sigma_k(double alpha, int k);

// Orthonormal Stein functions psi_k(y) = -(2k/sigma_k) P_k^(a,a)(y),
// k = 1..max_order, for a fixed alpha. Immutable; sigmas are precomputed.
class JacobiBasis {
 public:
  JacobiBasis(double alpha, int max_order);

  // Basis for the law p_N (alpha = (N-3)/2).
  static JacobiBasis for_law(const FiniteNLaw& law, int max_order);

  double alpha() const { return alpha_; }
  int max_order() const { return max_order_; }
  double sigma(int k) const;
  const std::vector<double>& sigmas() const { return sigmas_; }

  double psi(int k, double y) const;

  // Fills out[k-1] = psi_k(y) for k = 1..out.size(); out.size() <= max_order.
  // scratch must hold out.size() + 1 values.
  void psi_into(double y, std::span<double> out, std::span<double> scratch) const;

 private:
  double alpha_;
  int max_order_;
  std::vector<double> sigmas_;
  std::vector<double> scale_;  // -2k / sigma_k
};

// Unit-support Stein operator applied to g_k = P_{k-1}^(a+1,a+1):
//   (1 - y^2) g_k'(y) - 2(a+1) y g_k(y),
// evaluated from the (a+1) family and its derivative identity. Equals
// -2k P_k^(a,a)(y).
double stein_apply_rescaled(double alpha, int k, double y);

// Finite-N Stein operator on caller-supplied f(x), f'(x):
//   (1 - x^2/N) f'(x) - ((N-1)/N) x f(x),  |x| <= sqrt(N).
double stein_apply_unrescaled(const FiniteNLaw& law, double f_value, double f_deriv, double x);

}  // namespace finiten
