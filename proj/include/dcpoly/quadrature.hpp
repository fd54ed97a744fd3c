#pragma once

#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "dcpoly/errors.hpp"
#include "dcpoly/real.hpp"
#include "dcpoly/tridiag.hpp"

namespace dcpoly {

struct quad_rule {
  std::vector<real> x;
  std::vector<real> w;

  std::size_t size() const { return x.size(); }

  template <class F>
  real integrate(F&& f) const {
    real acc(0);
    for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * f(x[i]);
    return acc;
  }
};

// Monic three-term recurrence p_{k+1} = (x - alpha_k) p_k - beta_k p_{k-1}
// together with the weight's total mass mu0. beta[0] is unused.
struct recurrence {
  std::vector<real> alpha;
  std::vector<real> beta;
  real mu0{1};

  int max_degree() const { return static_cast<int>(alpha.size()) - 1; }
};

// Orthonormal values q_0(x)..q_m(x) for the recurrence's weight.
inline std::vector<real> orthonormal_eval(const recurrence& rec, const real& x, int m) {
  require(m <= rec.max_degree(), "orthonormal_eval: degree beyond recurrence table");
  std::vector<real> q(m + 1);
  real sb_prev(0);
  q[0] = 1 / sqrt(rec.mu0);
  if (m == 0) return q;
  real sb1 = sqrt(rec.beta[1]);
  q[1] = (x - rec.alpha[0]) * q[0] / sb1;
  sb_prev = sb1;
  for (int k = 1; k < m; ++k) {
    real sb = sqrt(rec.beta[k + 1]);
    q[k + 1] = ((x - rec.alpha[k]) * q[k] - sb_prev * q[k - 1]) / sb;
    sb_prev = sb;
  }
  return q;
}

// Gauss rule from a recurrence: nodes are Jacobi-matrix eigenvalues, weights
// are mu0 times squared first eigenvector components.
inline quad_rule gauss_rule(const recurrence& rec, int n) {
  require(n >= 1, "gauss_rule: need n >= 1");
  require(n - 1 <= rec.max_degree(), "gauss_rule: recurrence table too short");
  std::vector<real> d(rec.alpha.begin(), rec.alpha.begin() + n);
  std::vector<real> e(n - 1);
  for (int k = 0; k + 1 < n; ++k) e[k] = sqrt(rec.beta[k + 1]);
  std::vector<real> z;
  tridiag_eigen_first_components(d, e, z);
  quad_rule r;
  r.x = std::move(d);
  r.w.resize(n);
  for (int j = 0; j < n; ++j) r.w[j] = rec.mu0 * z[j] * z[j];
  return r;
}

// N(0, sigma^2): alpha_k = 0, beta_k = k sigma^2.
inline recurrence hermite_recurrence(int max_deg, const real& sigma) {
  recurrence rec;
  rec.alpha.assign(max_deg + 1, real(0));
  rec.beta.resize(max_deg + 1);
  rec.mu0 = 1;
  for (int k = 0; k <= max_deg; ++k) rec.beta[k] = k * sigma * sigma;
  return rec;
}

// Uniform on [-R, R] with density 1/(2R): beta_k = R^2 k^2 / (4k^2 - 1).
inline recurrence uniform_recurrence(int max_deg, const real& R) {
  recurrence rec;
  rec.alpha.assign(max_deg + 1, real(0));
  rec.beta.resize(max_deg + 1);
  rec.mu0 = 1;
  for (int k = 0; k <= max_deg; ++k)
    rec.beta[k] = R * R * real(k) * real(k) / real(4 * k * k - 1);
  return rec;
}

// Normalized generalized Laguerre: density x^a e^{-x/b} / (Gamma(a+1) b^{a+1})
// on (0, inf): alpha_k = b(2k + a + 1), beta_k = b^2 k (k + a).
inline recurrence laguerre_recurrence(int max_deg, const real& a, const real& b) {
  recurrence rec;
  rec.alpha.resize(max_deg + 1);
  rec.beta.resize(max_deg + 1);
  rec.mu0 = 1;
  for (int k = 0; k <= max_deg; ++k) {
    rec.alpha[k] = b * (2 * k + a + 1);
    rec.beta[k] = b * b * real(k) * (real(k) + a);
  }
  return rec;
}

// Lebesgue weight on [-1, 1]: mu0 = 2, beta_k = k^2/(4k^2-1).
inline recurrence legendre_recurrence(int max_deg) {
  recurrence rec;
  rec.alpha.assign(max_deg + 1, real(0));
  rec.beta.resize(max_deg + 1);
  rec.mu0 = 2;
  for (int k = 0; k <= max_deg; ++k) rec.beta[k] = real(k) * real(k) / real(4 * k * k - 1);
  return rec;
}

// Base Gauss-Legendre nodes on [-1,1], cached per (n, precision).
inline const quad_rule& legendre_base(int n) {
  static std::map<std::pair<int, long>, quad_rule> cache;
  auto key = std::make_pair(n, static_cast<long>(precision_digits()));
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, gauss_rule(legendre_recurrence(n), n)).first;
  return it->second;
}

// Composite Gauss-Legendre rule for the Lebesgue integral over consecutive
// panels [b_0, b_1], [b_1, b_2], ...
inline quad_rule composite_legendre(const std::vector<real>& breakpoints, int per_panel) {
  require(breakpoints.size() >= 2, "composite_legendre: need at least one panel");
  const quad_rule& base = legendre_base(per_panel);
  quad_rule r;
  for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
    const real& a = breakpoints[p];
    const real& b = breakpoints[p + 1];
    real half = (b - a) / 2;
    real mid = (b + a) / 2;
    for (std::size_t i = 0; i < base.size(); ++i) {
      r.x.push_back(mid + half * base.x[i]);
      r.w.push_back(half * base.w[i]);
    }
  }
  return r;
}

// Geometrically graded breakpoints from a to b (0 < a < b), finest near a.
inline std::vector<real> graded_breakpoints(const real& a, const real& b, int panels) {
  std::vector<real> bp(panels + 1);
  real ratio = pow(b / a, real(1) / panels);
  bp[0] = a;
  for (int i = 1; i <= panels; ++i) bp[i] = bp[i - 1] * ratio;
  bp[panels] = b;
  return bp;
}

// Panel-doubling integrator for smooth integrands on [a, b]. Doubles the
// panel count until two successive composite estimates agree to rel_tol,
// then returns the finer one.
template <class F>
real integrate_smooth(F&& f, const real& a, const real& b, const real& rel_tol,
                      int max_panels = 4096) {
  int panels = 4;
  const int per_panel = 24;
  auto eval = [&](int np) {
    std::vector<real> bp(np + 1);
    for (int i = 0; i <= np; ++i) bp[i] = a + (b - a) * i / np;
    return composite_legendre(bp, per_panel).integrate(f);
  };
  real prev = eval(panels);
  while (panels <= max_panels) {
    panels *= 2;
    real cur = eval(panels);
    real scale = abs(cur) + abs(prev);
    if (abs(cur - prev) <= rel_tol * (scale > 0 ? scale : real(1))) return cur;
    prev = cur;
  }
  throw quadrature_insufficient("integrate_smooth: no convergence at panel cap");
}

}  // namespace dcpoly
