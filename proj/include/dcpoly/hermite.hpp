#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dcpoly/errors.hpp"
#include "dcpoly/projection.hpp"
#include "dcpoly/quadrature.hpp"
#include "dcpoly/real.hpp"
#include "dcpoly/targets.hpp"

namespace dcpoly {

// Hermite machinery on the line: the two classical polynomial normalizations,
// the orthonormal L2(R) Hermite functions, closed-form expansions over the
// standard Gaussian for cos(x) and exp(c x^2), a numeric Bargmann transform,
// and coefficient-decay certificates that decide band-limited membership from
// the expansion alone.

enum class hermite_flavor { probabilists, physicists };

// Three-term recurrence evaluation. Forward recurrence is stable here: away
// from the oscillatory band the desired solution is the dominant one, and
// inside it both solutions stay comparable in size.
inline real hermite_poly(int n, const real& x, hermite_flavor flavor) {
  require(n >= 0, "hermite_poly: negative degree");
  require(n <= 500, "hermite_poly: degree beyond the supported range");
  if (n == 0) return real(1);
  const bool prob = flavor == hermite_flavor::probabilists;
  real prev(1);
  real cur = x;
  if (!prob) cur *= 2;
  for (int k = 1; k < n; ++k) {
    real next = x * cur - k * prev;
    if (!prob) next *= 2;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

// Orthonormal polynomials h_n = He_n / sqrt(n!) for N(0,1), all degrees up to
// m at once. The normalized recurrence h_{n+1} = (x h_n - sqrt(n) h_{n-1}) /
// sqrt(n+1) keeps every intermediate at the scale of the result.
inline std::vector<real> hermite_orthonormal_all(int m, const real& x) {
  require(m >= 0, "hermite_orthonormal_all: negative degree");
  std::vector<real> h(static_cast<std::size_t>(m) + 1);
  h[0] = 1;
  if (m == 0) return h;
  h[1] = x;
  for (int n = 1; n < m; ++n)
    h[static_cast<std::size_t>(n) + 1] =
        (x * h[static_cast<std::size_t>(n)] -
         sqrt(real(n)) * h[static_cast<std::size_t>(n) - 1]) /
        sqrt(real(n + 1));
  return h;
}

// Orthonormal Hermite function phi_n in L2(R):
//   phi_n(x) = pi^{-1/4} (2^n n!)^{-1/2} H_n(x) e^{-x^2/2},
// evaluated through the normalized recurrence
//   phi_{n+1} = sqrt(2/(n+1)) x phi_n - sqrt(n/(n+1)) phi_{n-1}.
inline real hermite_function(int n, const real& x) {
  require(n >= 0, "hermite_function: negative index");
  require(n <= 500, "hermite_function: index beyond the supported range");
  real prev(0);
  real cur = exp(-x * x / 2) / pow(const_pi(), real(1) / 4);
  for (int k = 0; k < n; ++k) {
    real next = sqrt(real(2) / (k + 1)) * x * cur - sqrt(real(k) / (k + 1)) * prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

enum class expansion_source { closed_form_cos, closed_form_exp_quadratic, numeric };

// Expansion f = sum a_n h_n against the orthonormal probabilists' basis of
// L2(N(0,1)), truncated at max_n. Signs and log magnitudes are carried
// separately so certificate fits can read scale information directly instead
// of re-deriving it from the values.
struct hermite_expansion {
  std::vector<real> coeffs;
  std::vector<real> log_abs;  // meaningful only where sgn != 0
  std::vector<int> sgn;       // -1, 0, +1
  expansion_source source = expansion_source::numeric;
  std::string label;

  int max_n() const { return static_cast<int>(coeffs.size()) - 1; }

  const real& a(int n) const {
    require(n >= 0 && n <= max_n(), "hermite_expansion: index out of range");
    return coeffs[static_cast<std::size_t>(n)];
  }

  // sqrt(sum_{n > m} a_n^2) within the stored range.
  real tail_norm(int m) const {
    require(m >= -1 && m <= max_n(), "tail_norm: cutoff out of range");
    real s(0);
    for (int n = m + 1; n <= max_n(); ++n) {
      const real& c = coeffs[static_cast<std::size_t>(n)];
      s += c * c;
    }
    return sqrt(s);
  }

  real norm_sq() const {
    real s(0);
    for (const auto& c : coeffs) s += c * c;
    return s;
  }

  // Pointwise value of the truncated series.
  real eval(const real& x) const {
    auto h = hermite_orthonormal_all(max_n(), x);
    real s(0);
    for (int n = 0; n <= max_n(); ++n)
      s += coeffs[static_cast<std::size_t>(n)] * h[static_cast<std::size_t>(n)];
    return s;
  }
};

namespace detail {

// Append one coefficient given as sign and log magnitude; sign 0 records an
// exact zero.
inline void push_log_coeff(hermite_expansion& e, int sign, const real& log_magnitude) {
  e.sgn.push_back(sign);
  if (sign == 0) {
    e.coeffs.emplace_back(0);
    e.log_abs.emplace_back(0);
  } else {
    e.coeffs.push_back(sign * exp(log_magnitude));
    e.log_abs.push_back(log_magnitude);
  }
}

}  // namespace detail

// Expansion of cos(x): a_{2k} = e^{-1/2} (-1)^k / sqrt((2k)!), odd terms
// vanish. The full coefficient mass is sum a_n^2 = e^{-1} cosh(1) =
// (1 + e^{-2})/2, the exact squared norm of cos under N(0,1).
inline hermite_expansion expand_cos(int max_n) {
  require(max_n >= 0, "expand_cos: negative cutoff");
  hermite_expansion e;
  e.source = expansion_source::closed_form_cos;
  e.label = "cos";
  for (int n = 0; n <= max_n; ++n) {
    if (n % 2) {
      detail::push_log_coeff(e, 0, real(0));
      continue;
    }
    int k = n / 2;
    detail::push_log_coeff(e, k % 2 ? -1 : 1,
                           -real(1) / 2 - log_factorial(static_cast<unsigned long>(n)) / 2);
  }
  return e;
}

// Expansion of exp(c x^2) for c < 1/2:
//   a_{2k} = (1-2c)^{-1/2} (sqrt((2k)!) / k!) (c/(1-2c))^k,
// odd terms vanish. The coefficients are square-summable exactly when
// c < 1/4, where sum a_n^2 = (1-4c)^{-1/2} = E exp(2c X^2);  for
// c in [1/4, 1/2) they are still well defined as numbers but the series
// leaves L2(N(0,1)).
inline hermite_expansion expand_exp_quadratic(const real& c, int max_n) {
  require(max_n >= 0, "expand_exp_quadratic: negative cutoff");
  if (!(c < real(1) / 2))
    throw parameter_out_of_range("expand_exp_quadratic: needs c < 1/2, got " + c.str(8));
  hermite_expansion e;
  e.source = expansion_source::closed_form_exp_quadratic;
  e.label = "exp(" + c.str(6) + " x^2)";
  real ratio = c / (1 - 2 * c);
  real log_pref = -log(1 - 2 * c) / 2;
  real log_ratio = c == 0 ? real(0) : log(abs(ratio));
  int ratio_sign = c > 0 ? 1 : (c < 0 ? -1 : 0);
  for (int n = 0; n <= max_n; ++n) {
    if (n % 2) {
      detail::push_log_coeff(e, 0, real(0));
      continue;
    }
    int k = n / 2;
    if (k > 0 && ratio_sign == 0) {
      detail::push_log_coeff(e, 0, real(0));
      continue;
    }
    int sign = (ratio_sign < 0 && k % 2) ? -1 : 1;
    real lg = log_pref + log_factorial(static_cast<unsigned long>(n)) / 2 -
              log_factorial(static_cast<unsigned long>(k)) + k * log_ratio;
    detail::push_log_coeff(e, sign, lg);
  }
  return e;
}

// Numeric expansion through the weighted L2 projection over N(0,1). The
// basis produced by the Stieltjes route for the Gaussian is exactly h_n
// (positive leading coefficients), so projection coefficients land in the
// same normalization as the closed forms above.
inline hermite_expansion expand_numeric(const target_function& f, int max_n) {
  require(max_n >= 0, "expand_numeric: negative cutoff");
  ortho_basis basis = build_basis(measure::gaussian(1), max_n);
  projection_result pr = project(basis, f, max_n);
  hermite_expansion e;
  e.source = expansion_source::numeric;
  e.label = f.name();
  e.coeffs = pr.coeffs;
  e.log_abs.reserve(e.coeffs.size());
  e.sgn.reserve(e.coeffs.size());
  for (const auto& c : e.coeffs) {
    if (c == 0) {
      e.sgn.push_back(0);
      e.log_abs.emplace_back(0);
    } else {
      e.sgn.push_back(c > 0 ? 1 : -1);
      e.log_abs.push_back(log(abs(c)));
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// Bargmann transform
//
//   (Bf)(z) = pi^{-1/4} int exp(-x^2/2 + sqrt(2) x z - z^2/2) f(x) dx,
//
// a unitary map from L2(R) onto the Fock space of entire functions with
// finite pi^{-1} int |F|^2 e^{-|z|^2} dA. It sends phi_n to z^n/sqrt(n!).
// ---------------------------------------------------------------------------

namespace detail {

// Gauss rule for the standard normal weight, cached per (n, precision); the
// transform evaluates many integrals against the same node set.
inline const quad_rule& bargmann_base(int n) {
  static std::map<std::pair<int, long>, quad_rule> cache;
  auto key = std::make_pair(n, static_cast<long>(precision_digits()));
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, gauss_rule(hermite_recurrence(n, real(1)), n)).first;
  return it->second;
}

// One fixed-rule evaluation of the transform integral.
inline cnum bargmann_on_rule(const std::function<real(const real&)>& f, const cnum& z,
                             const quad_rule& rule) {
  const real rt2 = sqrt(real(2));
  // z^2/2 with z = a + ib.
  cnum half_z_sq{(z.re * z.re - z.im * z.im) / 2, z.re * z.im};
  cnum acc;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    real fx = f(rule.x[i]);
    if (fx == 0) continue;
    cnum arg{rt2 * rule.x[i] * z.re - half_z_sq.re, rt2 * rule.x[i] * z.im - half_z_sq.im};
    acc += cexp(arg) * (rule.w[i] * fx);
  }
  // The rule integrates against the N(0,1) density; restore the plain
  // Lebesgue normalization of the defining integral.
  real pref = sqrt(2 * const_pi()) / pow(const_pi(), real(1) / 4);
  return acc * pref;
}

}  // namespace detail

// Numeric transform of an explicit square-integrable input. Node counts
// double until two successive values agree; persistent disagreement means
// the integrand outruns the node envelope and raises quadrature_insufficient.
inline cnum bargmann_eval(const std::function<real(const real&)>& f, const cnum& z) {
  require(z.abs() <= 20, "bargmann_eval: |z| beyond the supported quadrature domain");
  const long digits = static_cast<long>(precision_digits());
  const real tol = pow_int(real(10), -std::max(long(6), std::min(digits - 8, long(40))));
  cnum prev = detail::bargmann_on_rule(f, z, detail::bargmann_base(96));
  for (int n = 192; n <= 1536; n *= 2) {
    cnum cur = detail::bargmann_on_rule(f, z, detail::bargmann_base(n));
    if ((cur - prev).abs() <= tol * (1 + cur.abs())) return cur;
    prev = cur;
  }
  throw quadrature_insufficient("bargmann_eval: node doubling never settled");
}

// Transform of the L2(R) carrier attached to a Gaussian expansion: the
// function r(x) = pi^{-1/4} e^{-x^2/2} f(sqrt(2) x) has Hermite-function
// coefficients equal to the h_n coefficients of f, so its transform is the
// power series sum a_n z^n / sqrt(n!).
inline cnum bargmann_eval(const hermite_expansion& e, const cnum& z) {
  if (e.coeffs.empty()) return {};
  cnum acc{e.a(0), real(0)};
  cnum zpow{real(1), real(0)};
  for (int n = 1; n <= e.max_n(); ++n) {
    zpow = zpow * z;
    if (e.sgn[static_cast<std::size_t>(n)] == 0) continue;
    acc += zpow * (e.a(n) * exp(-log_factorial(static_cast<unsigned long>(n)) / 2));
  }
  return acc;
}

// Fock-space norm of the numeric transform, by a radial rule:
//   ||Bf||^2 = (1/2 pi) int_0^inf e^{-u} int_0^{2 pi} |(Bf)(sqrt(u) e^{i t})|^2 dt du.
// The angular trapezoid rule is exact for the trigonometric polynomials that
// low-degree transforms produce; the radial panels cover e^{-u} down to the
// requested resolution. Sized for spot checks at modest precision, not for
// tight certificates.
inline real bargmann_norm(const std::function<real(const real&)>& f, int n_theta = 16,
                          int per_panel = 20) {
  require(n_theta >= 4 && per_panel >= 4, "bargmann_norm: rule too small");
  const real two_pi = 2 * const_pi();
  const std::vector<real> edges = {real(0), real(4), real(12), real(30)};
  const quad_rule& base = legendre_base(per_panel);
  real acc(0);
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    real half = (edges[p + 1] - edges[p]) / 2;
    real mid = (edges[p + 1] + edges[p]) / 2;
    for (std::size_t i = 0; i < base.size(); ++i) {
      real u = mid + half * base.x[i];
      real rho = sqrt(u);
      real angular(0);
      for (int j = 0; j < n_theta; ++j) {
        cnum zj = cis(two_pi * j / n_theta) * rho;
        cnum F = bargmann_eval(f, zj);
        angular += F.re * F.re + F.im * F.im;
      }
      angular /= n_theta;
      acc += half * base.w[i] * exp(-u) * angular;
    }
  }
  return sqrt(acc);
}

// Two-variable transform on a tensor rule, kernel evaluated in full at every
// node pair. A single higher-order pass re-verifies the value; use for
// low-degree inputs with |z_j| <= 3. Node counts are per axis.
inline cnum bargmann_eval_2d(const std::function<real(const real&, const real&)>& f,
                             const cnum& z1, const cnum& z2, int nodes = 192,
                             int verify_nodes = 256) {
  require(z1.abs() <= 3 && z2.abs() <= 3, "bargmann_eval_2d: |z| beyond the tensor domain");
  const real rt2 = sqrt(real(2));
  auto tensor_value = [&](const quad_rule& rule) {
    cnum half_sq{(z1.re * z1.re - z1.im * z1.im + z2.re * z2.re - z2.im * z2.im) / 2,
                 z1.re * z1.im + z2.re * z2.im};
    cnum acc;
    for (std::size_t i = 0; i < rule.size(); ++i)
      for (std::size_t j = 0; j < rule.size(); ++j) {
        real fx = f(rule.x[i], rule.x[j]);
        if (fx == 0) continue;
        cnum arg{rt2 * (rule.x[i] * z1.re + rule.x[j] * z2.re) - half_sq.re,
                 rt2 * (rule.x[i] * z1.im + rule.x[j] * z2.im) - half_sq.im};
        acc += cexp(arg) * (rule.w[i] * rule.w[j] * fx);
      }
    real pref = 2 * const_pi() / sqrt(const_pi());
    return acc * pref;
  };
  cnum coarse = tensor_value(detail::bargmann_base(nodes));
  cnum fine = tensor_value(detail::bargmann_base(verify_nodes));
  if ((fine - coarse).abs() > real("1e-10") * (1 + fine.abs()))
    throw quadrature_insufficient("bargmann_eval_2d: verification pass disagrees");
  return fine;
}

// ---------------------------------------------------------------------------
// Coefficient-decay certificates
// ---------------------------------------------------------------------------

// Certificate report for membership at spectral radius omega. M is the
// smallest constant with |a_n| <= M omega^n / sqrt(n!) across the stored
// range; the scaled sequence M_n = |a_n| sqrt(n!) / omega^n decides the
// verdict. For a band-limited f the M_n stay bounded; a still-climbing tail
// means no finite M exists at this omega and the certificate fails.
struct pw_report {
  real omega{0};
  real M{0};          // max of the scaled sequence
  int argmax_n = -1;  // where the max is attained
  real tail_slope{0};  // least-squares slope of log M_n over the top half
  bool finite = true;
  std::vector<real> scaled;      // M_n, zero where a_n = 0
  std::vector<real> tail_norms;  // index m: sqrt(sum_{n>m} a_n^2)
  std::vector<real> envelopes;   // index m: (omega sqrt(e))^m / m^{m/2}
};

inline pw_report pw_coefficient_certificate(const hermite_expansion& e, const real& omega) {
  require(omega > 0, "pw_coefficient_certificate: needs omega > 0");
  pw_report rep;
  rep.omega = omega;
  const int N = e.max_n();
  rep.scaled.assign(static_cast<std::size_t>(N) + 1, real(0));
  real log_omega = log(omega);

  std::vector<int> support;
  std::vector<real> log_scaled;
  for (int n = 0; n <= N; ++n) {
    if (e.sgn[static_cast<std::size_t>(n)] == 0) continue;
    real lm = e.log_abs[static_cast<std::size_t>(n)] +
              log_factorial(static_cast<unsigned long>(n)) / 2 - n * log_omega;
    rep.scaled[static_cast<std::size_t>(n)] = exp(lm);
    support.push_back(n);
    log_scaled.push_back(std::move(lm));
  }
  for (int n = 0; n <= N; ++n)
    if (rep.scaled[static_cast<std::size_t>(n)] > rep.M) {
      rep.M = rep.scaled[static_cast<std::size_t>(n)];
      rep.argmax_n = n;
    }

  // Trend of the scaled magnitudes over the top half of the support. A flat
  // or falling trend certifies a finite constant; persistent growth at the
  // end of the range is read as divergence.
  if (support.size() >= 4) {
    std::size_t lo = support.size() / 2;
    real sx(0), sy(0), sxx(0), sxy(0);
    real cnt(static_cast<long>(support.size() - lo));
    for (std::size_t i = lo; i < support.size(); ++i) {
      real xv(support[i]);
      sx += xv;
      sy += log_scaled[i];
      sxx += xv * xv;
      sxy += xv * log_scaled[i];
    }
    real denom = cnt * sxx - sx * sx;
    if (denom > 0) rep.tail_slope = (cnt * sxy - sx * sy) / denom;
    rep.finite = !(rep.tail_slope > real("0.02"));
  } else {
    rep.finite = true;
  }

  rep.tail_norms.reserve(static_cast<std::size_t>(N) + 1);
  rep.envelopes.reserve(static_cast<std::size_t>(N) + 1);
  real log_oe = log_omega + real(1) / 2;
  for (int m = 0; m <= N; ++m) {
    rep.tail_norms.push_back(e.tail_norm(m));
    rep.envelopes.push_back(m == 0 ? real(1) : exp(m * log_oe - real(m) / 2 * log(real(m))));
  }
  return rep;
}

}  // namespace dcpoly
