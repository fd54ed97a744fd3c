#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dcpoly/errors.hpp"
#include "dcpoly/measures.hpp"
#include "dcpoly/quadrature.hpp"
#include "dcpoly/real.hpp"

namespace dcpoly {

enum class carleman_source { factorial, subgaussian, quasi, from_moments, custom };

// A log-convex weight sequence M_0 = 1, M_1, M_2, ... together with its
// ratios a_k = M_{k-1}/M_k (nonincreasing, a_0 = 1). Built-in families are
// generated lazily up to a hard index cap; fitted and custom sequences carry
// a fixed table. Every growth step revalidates log-convexity, which is
// equivalent to the ratio monotonicity.
class carleman_sequence {
 public:
  static carleman_sequence factorial() {
    carleman_sequence s(carleman_source::factorial, "factorial");
    s.s_->next = [](int k, const std::vector<real>& m) { return m[k - 1] * k; };
    return s;
  }

  // M_n = n^{n/2}; ratios fall like 1/sqrt(en).
  static carleman_sequence subgaussian() {
    carleman_sequence s(carleman_source::subgaussian, "subgaussian");
    s.s_->next = [](int k, const std::vector<real>&) {
      return exp(real(k) / 2 * log(real(k)));
    };
    return s;
  }

  // M_n = n! * prod_{j<=n} log(e j); ratios 1/(n log(en)), the borderline
  // family whose ratio sum diverges only logarithmically slower.
  static carleman_sequence quasi() {
    carleman_sequence s(carleman_source::quasi, "quasi");
    s.s_->next = [](int k, const std::vector<real>& m) {
      return m[k - 1] * k * log(const_e() * k);
    };
    return s;
  }

  // Fit M (and the constants B, K) to a measure so that ||x^k||_{L2(mu)} <=
  // B K^k M_k for all k <= k_max. Raw norm sequences need not be log-convex,
  // so take the greatest convex minorant of log ||x^k|| in k, normalize its
  // first step into K, and absorb the largest hull gap into B.
  static carleman_sequence from_moments(const measure& mu, int k_max) {
    require(k_max >= 2, "from_moments: need k_max >= 2");
    std::vector<real> y(k_max + 1);
    for (int k = 0; k <= k_max; ++k) y[k] = log(mu.moment(2 * k)) / 2;

    // Lower convex hull by monotone chain over (k, y_k); slopes must
    // strictly increase along the hull.
    std::vector<int> hull;
    auto slope = [&](int i, int j) { return (y[j] - y[i]) / (j - i); };
    for (int i = 0; i <= k_max; ++i) {
      while (hull.size() >= 2 &&
             slope(hull[hull.size() - 2], hull.back()) >= slope(hull.back(), i))
        hull.pop_back();
      hull.push_back(i);
    }
    std::vector<real> env(k_max + 1);
    real gap_max(0);
    for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
      int i = hull[h], j = hull[h + 1];
      for (int k = i; k <= j; ++k) {
        env[k] = y[i] + slope(i, j) * (k - i);
        real gap = y[k] - env[k];
        if (gap > gap_max) gap_max = gap;
      }
    }
    real c = env[1] - env[0];
    carleman_sequence s(carleman_source::from_moments, "fitted(" + mu.name() + ")");
    std::vector<real> m(k_max + 1);
    for (int k = 0; k <= k_max; ++k) m[k] = exp(env[k] - env[0] - k * c);
    s.s_->m = std::move(m);
    s.s_->cap = k_max;
    s.s_->b = exp(env[0] + gap_max);
    s.s_->k = exp(c);
    s.validate_range(1, k_max - 1);
    return s;
  }

  static carleman_sequence custom(std::vector<real> M, std::string label) {
    require(!M.empty() && M[0] == 1, "custom sequence: need M_0 = 1");
    for (const auto& v : M) require(v > 0, "custom sequence: entries must be positive");
    carleman_sequence s(carleman_source::custom, std::move(label));
    s.s_->cap = static_cast<int>(M.size()) - 1;
    s.s_->m = std::move(M);
    s.validate_range(1, s.s_->cap - 1);
    return s;
  }

  const real& M(int k) const {
    require(k >= 0, "sequence index negative");
    require(k <= s_->cap, "sequence index beyond captured range");
    ensure(k);
    return s_->m[k];
  }

  real a(int k) const {
    if (k == 0) return real(1);
    return M(k - 1) / M(k);
  }

  int max_index() const { return s_->cap; }
  const std::string& name() const { return s_->name; }
  carleman_source source() const { return s_->src; }
  const real& B() const { return s_->b; }
  const real& K() const { return s_->k; }

 private:
  struct state {
    carleman_source src;
    std::string name;
    std::function<real(int, const std::vector<real>&)> next;
    mutable std::vector<real> m{real(1)};
    real b{1}, k{1};
    int cap{10000};
  };

  carleman_sequence(carleman_source src, std::string nm) : s_(std::make_shared<state>()) {
    s_->src = src;
    s_->name = std::move(nm);
  }

  void ensure(int k) const {
    while (static_cast<int>(s_->m.size()) <= k) {
      int i = static_cast<int>(s_->m.size());
      s_->m.push_back(s_->next(i, s_->m));
      if (i >= 2) validate_range(i - 1, i - 1);
    }
  }

  // Log-convexity M_k^2 <= M_{k-1} M_{k+1} within relative 1e-30; this is the
  // same statement as a_{k+1} <= a_k.
  void validate_range(int from, int to) const {
    const real tol = real("1e-30");
    for (int k = std::max(1, from); k <= to; ++k) {
      if (s_->m[k] * s_->m[k] > s_->m[k - 1] * s_->m[k + 1] * (1 + tol))
        throw domain_error(s_->name + ": sequence not log-convex at index " +
                           std::to_string(k));
    }
  }

  std::shared_ptr<state> s_;
};

// Associated function tau(r) = inf_n M_n / r^n, evaluated through its finite
// product form prod_{k: a_k r > 1} (a_k r)^{-1}; equals 1 for r <= 1.
inline real tau(const carleman_sequence& s, const real& r) {
  require(r > 0, "tau: need r > 0");
  real prod(1);
  for (int k = 1; k <= s.max_index(); ++k) {
    real f = s.a(k) * r;
    if (f <= 1) break;
    prod /= f;
  }
  return prod;
}

// Truncated variant: the infimum restricted to orders n <= N, which matches
// tau below the crossover radius 1/a_{N+1} and M_N / r^N above it.
inline real tau_truncated(const carleman_sequence& s, const real& r, int N) {
  require(r > 0, "tau_truncated: need r > 0");
  if (N == 0) return real(1);
  if (r * s.a(N + 1) <= 1) return tau(s, r);
  return s.M(N) / pow_int(r, N);
}

enum class integral_route { antiderivative, quadrature };

namespace detail {

// Inverse tangent integral int_0^u arctan(t)/t dt for u >= 0, via composite
// Gauss panels on [0, min(u,1)] and the reflection
// Ti2(u) = Ti2(1/u) + (pi/2) log u.
inline real inverse_tangent_integral(const real& u) {
  if (u == 0) return real(0);
  if (u > 1) return inverse_tangent_integral(1 / u) + const_pi() / 2 * log(u);
  const quad_rule& base = legendre_base(64);
  const int panels = 4;
  real acc(0);
  for (int p = 0; p < panels; ++p) {
    real a = u * p / panels, b = u * (p + 1) / panels;
    real half = (b - a) / 2, mid = (b + a) / 2;
    for (std::size_t i = 0; i < base.size(); ++i) {
      real t = mid + half * base.x[i];
      acc += half * base.w[i] * atan(t) / t;
    }
  }
  return acc;
}

}  // namespace detail

// The logarithmic integral int_1^{1/a_{N+1}} log(tau(t)) / (alpha^2 + t^2) dt
// (nonpositive). Two independent evaluations:
//  - antiderivative: per-ratio split into int_{1/a_k}^{1/a_{N+1}} of
//    -log(a_k t)/(alpha^2+t^2), each via the closed primitive
//    F(t) = [log(a_k t) arctan(t/alpha) - Ti2(t/alpha)] / alpha;
//  - quadrature: adaptive panels on log(tau(t))/(alpha^2+t^2) between
//    consecutive knots 1/a_k.
inline real carleman_log_integral(const carleman_sequence& s, int N, const real& alpha,
                                  integral_route route) {
  require(alpha > 0, "log integral: need alpha > 0");
  require(N >= 0, "log integral: need N >= 0");
  real U = 1 / s.a(N + 1);
  if (U <= 1) return real(0);

  if (route == integral_route::antiderivative) {
    real acc(0);
    real tiU = detail::inverse_tangent_integral(U / alpha);
    for (int k = 1; k <= N; ++k) {
      real ak = s.a(k);
      real L = 1 / ak;
      if (L < 1) L = 1;
      if (L >= U) continue;
      real FU = (log(ak * U) * atan(U / alpha) - tiU) / alpha;
      real FL = (log(ak * L) * atan(L / alpha) - detail::inverse_tangent_integral(L / alpha)) / alpha;
      acc -= FU - FL;
    }
    return acc;
  }

  // Knots where log tau gains a new active factor.
  std::vector<real> knots{real(1)};
  for (int k = 1; k <= N; ++k) {
    real t = 1 / s.a(k);
    if (t > 1 && t < U) knots.push_back(t);
  }
  knots.push_back(U);
  std::sort(knots.begin(), knots.end());
  real acc(0);
  real a2 = alpha * alpha;
  auto integrand = [&](const real& t) { return log(tau(s, t)) / (a2 + t * t); };
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (knots[i + 1] - knots[i] <= 0) continue;
    acc += integrate_smooth(integrand, knots[i], knots[i + 1], real("1e-30"));
  }
  return acc;
}

struct carleman_components {
  real prefactor;
  real integral_term;
  real tail_term;
};

struct carleman_bound_result {
  real value;
  real alpha_star;
  real Y;
  int N = 0;
  carleman_components components;
};

// Pointwise bound for a function whose derivatives obey |f^{(n)}| <= B K^n M_n
// and whose first N derivatives vanish at the origin:
//   |f(x)| <= inf_alpha (B Y e^{K alpha x} / (alpha pi K))
//             [ exp((2 alpha / pi) * log-integral) + tau(Y/K) ],
// valid for any window Y in (0, K/a_{N+1}] and any alpha > 0. The infimum is
// approximated over the supplied alpha grid; with two or more grid points a
// golden-section pass refines around the grid minimum (every evaluated alpha
// yields a valid bound, so the reported minimum always certifies).
inline carleman_bound_result carleman_bound(const carleman_sequence& s, const real& B,
                                            const real& K, int N, const real& x, const real& Y,
                                            std::vector<real> alpha_grid,
                                            integral_route route = integral_route::antiderivative) {
  require(B > 0 && K > 0, "carleman_bound: need B, K > 0");
  require(x >= 0, "carleman_bound: need x >= 0");
  require(!alpha_grid.empty(), "carleman_bound: empty alpha grid");
  real Ymax = K / s.a(N + 1);
  if (!(Y > 0) || Y > Ymax * (1 + real("1e-40")))
    throw parameter_out_of_range("carleman_bound: Y outside (0, K/a_{N+1}]");

  const real tail = tau(s, Y / K);
  auto eval = [&](const real& alpha) -> std::pair<real, carleman_components> {
    real I = carleman_log_integral(s, N, alpha, route);
    real integral_term = exp(2 * alpha / const_pi() * I);
    real prefactor = B * Y * exp(K * alpha * x) / (alpha * const_pi() * K);
    return {real(prefactor * (integral_term + tail)),
            carleman_components{prefactor, integral_term, tail}};
  };

  std::sort(alpha_grid.begin(), alpha_grid.end());
  carleman_bound_result best;
  best.N = N;
  best.Y = Y;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    auto [v, comp] = eval(alpha_grid[i]);
    if (i == 0 || v < best.value) {
      best.value = v;
      best.alpha_star = alpha_grid[i];
      best.components = comp;
      best_i = i;
    }
  }

  if (alpha_grid.size() >= 2) {
    real lo = alpha_grid[best_i == 0 ? 0 : best_i - 1];
    real hi = alpha_grid[std::min(best_i + 1, alpha_grid.size() - 1)];
    if (hi > lo) {
      const real golden = (sqrt(real(5)) - 1) / 2;
      real c = hi - golden * (hi - lo);
      real d = lo + golden * (hi - lo);
      auto [fc, cc] = eval(c);
      auto [fd, cd] = eval(d);
      for (int it = 0; it < 60; ++it) {
        if (fc < fd) {
          hi = d;
          d = c;
          fd = fc;
          cd = cc;
          c = hi - golden * (hi - lo);
          std::tie(fc, cc) = eval(c);
        } else {
          lo = c;
          c = d;
          fc = fd;
          cc = cd;
          d = lo + golden * (hi - lo);
          std::tie(fd, cd) = eval(d);
        }
        if (hi - lo < real("1e-40") * (1 + hi)) break;
      }
      if (fc < best.value) {
        best.value = fc;
        best.alpha_star = c;
        best.components = cc;
      }
      if (fd < best.value) {
        best.value = fd;
        best.alpha_star = d;
        best.components = cd;
      }
    }
  }
  return best;
}

// Real-variable companion bound: from the same derivative data (no vanishing
// assumption beyond f(0) = 0) one gets |f(x)| <= 8 B K |x| / (a_1 + ... + a_m)
// on the window |x| <= (a_1 + ... + a_m) / (8K).
inline real real_variable_bound(const carleman_sequence& s, const real& B, const real& K, int m,
                                const real& x) {
  require(B > 0 && K > 0, "real_variable_bound: need B, K > 0");
  require(m >= 1, "real_variable_bound: need m >= 1");
  require(x >= 0, "real_variable_bound: need x >= 0");
  real sum(0);
  for (int j = 1; j <= m; ++j) sum += s.a(j);
  if (x > sum / (8 * K) * (1 + real("1e-40")))
    throw parameter_out_of_range("real_variable_bound: x beyond (a_1+...+a_m)/(8K)");
  return 8 * B * K * x / sum;
}

// Log-spaced alpha grid, a serviceable default for the bound's infimum.
inline std::vector<real> default_alpha_grid(double lo = 1.0 / 64, double hi = 64.0, int n = 25) {
  require(lo > 0 && hi > lo && n >= 2, "default_alpha_grid: bad range");
  std::vector<real> g(n);
  real llo = log(real(lo)), lhi = log(real(hi));
  for (int i = 0; i < n; ++i) g[i] = exp(llo + (lhi - llo) * i / (n - 1));
  return g;
}

}  // namespace dcpoly
