#pragma once

#include <vector>

#include "dcpoly/errors.hpp"
#include "dcpoly/quadrature.hpp"
#include "dcpoly/real.hpp"

namespace dcpoly {

// Discretized Stieltjes procedure in orthonormal form: recover the three-term
// recurrence of the measure represented by a discrete rule (nodes, weights).
// The rule must integrate polynomials up to degree 2*max_deg accurately.
// Orthonormal values stay O(1) on the rule's support, which keeps the
// procedure stable; a nonpositive beta means the rule could not resolve the
// requested degree.
inline recurrence stieltjes_recurrence(const quad_rule& rule, int max_deg) {
  const std::size_t n = rule.size();
  require(n >= static_cast<std::size_t>(max_deg) + 1,
          "stieltjes_recurrence: rule smaller than requested degree");
  recurrence rec;
  rec.alpha.assign(max_deg + 1, real(0));
  rec.beta.assign(max_deg + 1, real(0));
  real mu0(0);
  for (std::size_t i = 0; i < n; ++i) mu0 += rule.w[i];
  rec.mu0 = mu0;

  std::vector<real> u_prev(n, real(0)), u(n), v(n);
  real inv_sqrt_mu0 = 1 / sqrt(mu0);
  for (std::size_t i = 0; i < n; ++i) u[i] = inv_sqrt_mu0;

  real sqrt_beta_k(0);  // sqrt(beta_k) for the current k
  for (int k = 0; k <= max_deg; ++k) {
    real a(0);
    for (std::size_t i = 0; i < n; ++i) a += rule.w[i] * rule.x[i] * u[i] * u[i];
    rec.alpha[k] = a;
    if (k == max_deg) break;
    real b2(0);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = (rule.x[i] - a) * u[i] - sqrt_beta_k * u_prev[i];
      b2 += rule.w[i] * v[i] * v[i];
    }
    if (!(b2 > 0))
      throw quadrature_insufficient("stieltjes_recurrence: lost positivity at degree " +
                                    std::to_string(k + 1));
    real sb = sqrt(b2);
    rec.beta[k + 1] = b2;
    for (std::size_t i = 0; i < n; ++i) {
      u_prev[i] = u[i];
      u[i] = v[i] / sb;
    }
    sqrt_beta_k = sb;
  }
  return rec;
}

// Recurrence from raw moments m_0..m_{2n-1} by the Chebyshev algorithm with
// monomial modified moments. Exponentially ill-conditioned by nature; callers
// must run it under a precision_guard at a multiple of the target precision.
// A nonpositive beta means the Hankel form is not positive definite to the
// working precision, i.e. the input is not a moment sequence of a measure
// with the requested degree of support.
inline recurrence recurrence_from_moments(const std::vector<real>& m) {
  require(m.size() >= 2, "recurrence_from_moments: need at least m_0, m_1");
  require(m[0] > 0, "recurrence_from_moments: total mass must be positive");
  const int n = static_cast<int>(m.size() / 2);  // degrees 0..n-1 recoverable
  recurrence rec;
  rec.alpha.assign(n, real(0));
  rec.beta.assign(n, real(0));
  rec.mu0 = m[0];
  rec.alpha[0] = m[1] / m[0];

  std::vector<real> sig_prev(m.begin(), m.end());  // sigma_{0,l} = m_l
  std::vector<real> sig_pprev;                     // sigma_{-1,l} = 0
  for (int k = 1; k < n; ++k) {
    std::vector<real> sig(m.size(), real(0));
    for (std::size_t l = k; l + k < m.size(); ++l) {
      real t = sig_prev[l + 1] - rec.alpha[k - 1] * sig_prev[l];
      if (k >= 2) t -= rec.beta[k - 1] * sig_pprev[l];
      sig[l] = t;
    }
    if (!(sig[k] > 0))
      throw not_determinate_error(
          "recurrence_from_moments: moment matrix not positive definite at degree " +
          std::to_string(k));
    rec.beta[k] = sig[k] / sig_prev[k - 1];
    rec.alpha[k] = sig[k + 1] / sig[k] - sig_prev[k] / sig_prev[k - 1];
    sig_pprev.swap(sig_prev);
    sig_prev.swap(sig);
  }
  return rec;
}

}  // namespace dcpoly
