#pragma once

#include <algorithm>
#include <limits>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dcpoly/errors.hpp"
#include "dcpoly/quadrature.hpp"
#include "dcpoly/real.hpp"
#include "dcpoly/rng.hpp"
#include "dcpoly/stieltjes.hpp"

namespace dcpoly {

enum class measure_kind { gaussian, laplace, uniform, one_sided_exp, freud, custom, moments, discrete };

// Integrability classes of a measure with minimal admissible constants.
//   bounded: support inside [-radius, radius]
//   strict:  ||e^{xi X}||_2 <= A exp((K |xi|)^r) for all xi, some r > 0
//   subexp:  E exp(2|X|/K) <= e^2
struct tail_class {
  bool has_bounded = false;
  real radius{0};

  bool has_strict = false;
  real r{0}, K{0}, A{1};
  std::string strict_note;

  bool has_subexp = false;
  real K_sub{0};
  std::string subexp_note;
};

namespace detail {

struct measure_state {
  measure_kind kind;
  std::string name;
  real p1{0}, p2{0};  // kind-specific parameters (sigma; b; R; alpha; ...)

  // custom kind
  std::function<real(const real&)> density_fn;
  real lo{0}, hi{0};
  bool lo_inf = false, hi_inf = false;
  std::vector<real> density_kinks;

  // moments kind
  std::vector<real> given_moments;

  // discrete kind
  std::vector<real> atoms;

  // caches
  mutable recurrence rec;
  mutable int rec_deg = -1;
  mutable long rec_prec = 0;
  mutable std::unique_ptr<tail_class> tails_cache;
};

inline real gamma_ratio_log(const real& num, const real& den) { return lgamma(num) - lgamma(den); }

}  // namespace detail

class measure {
 public:
  static measure gaussian(real sigma) {
    require(sigma > 0, "gaussian: sigma must be positive");
    measure m(measure_kind::gaussian, "gaussian(" + sigma.str(6) + ")");
    m.s_->p1 = std::move(sigma);
    return m;
  }

  static measure laplace(real b) {
    require(b > 0, "laplace: scale must be positive");
    measure m(measure_kind::laplace, "laplace(" + b.str(6) + ")");
    m.s_->p1 = std::move(b);
    return m;
  }

  static measure uniform(real R) {
    require(R > 0, "uniform: radius must be positive");
    measure m(measure_kind::uniform, "uniform(" + R.str(6) + ")");
    m.s_->p1 = std::move(R);
    return m;
  }

  // Density x^alpha e^{-x} / Gamma(alpha+1) on (0, inf); alpha > -1.
  static measure one_sided_exp(real alpha) {
    require(alpha > -1, "one_sided_exp: need alpha > -1");
    measure m(measure_kind::one_sided_exp, "one_sided_exp(" + alpha.str(6) + ")");
    m.s_->p1 = std::move(alpha);
    return m;
  }

  // Density exp(-|x|^alpha) / (2 Gamma(1 + 1/alpha)); alpha > 0.
  static measure freud(real alpha) {
    require(alpha > 0, "freud: need alpha > 0");
    measure m(measure_kind::freud, "freud(" + alpha.str(6) + ")");
    m.s_->p1 = std::move(alpha);
    return m;
  }

  // User density on [lo, hi] (use +-inf via the flags); must be normalized.
  static measure custom(std::function<real(const real&)> density, real lo, real hi,
                        bool lo_infinite, bool hi_infinite, std::vector<real> kinks = {},
                        std::string label = "custom") {
    measure m(measure_kind::custom, std::move(label));
    m.s_->density_fn = std::move(density);
    m.s_->lo = std::move(lo);
    m.s_->hi = std::move(hi);
    m.s_->lo_inf = lo_infinite;
    m.s_->hi_inf = hi_infinite;
    m.s_->density_kinks = std::move(kinks);
    return m;
  }

  // Measure known only through raw moments m_0..m_L. The recurrence is
  // recovered by the Chebyshev algorithm at 4x precision (the map from
  // moments is exponentially ill-conditioned; the elevated precision is the
  // point of this constructor, it serves as an independent dual route).
  static measure from_moments(std::vector<real> moments, std::string label = "moments") {
    require(moments.size() >= 2, "from_moments: need at least two moments");
    measure m(measure_kind::moments, std::move(label));
    {
      precision_guard g(4 * precision_digits());
      std::vector<real> lifted(moments.begin(), moments.end());
      m.s_->rec = recurrence_from_moments(lifted);
    }
    m.s_->rec_deg = m.s_->rec.max_degree();
    m.s_->rec_prec = static_cast<long>(precision_digits());
    m.s_->given_moments = std::move(moments);
    return m;
  }

  // Empirical measure: uniform weights on the given points.
  static measure from_samples(std::vector<real> points, std::string label = "empirical") {
    require(!points.empty(), "from_samples: empty sample");
    measure m(measure_kind::discrete, std::move(label));
    std::sort(points.begin(), points.end());
    m.s_->atoms = std::move(points);
    return m;
  }

  measure_kind kind() const { return s_->kind; }
  const std::string& name() const { return s_->name; }
  bool is_discrete() const { return s_->kind == measure_kind::discrete; }

  bool symmetric() const {
    switch (s_->kind) {
      case measure_kind::gaussian:
      case measure_kind::laplace:
      case measure_kind::uniform:
      case measure_kind::freud:
        return true;
      default:
        return false;
    }
  }

  // Closed-form moments where the family admits them; quadrature otherwise.
  real moment(int k) const {
    require(k >= 0, "moment: negative order");
    const real& p = s_->p1;
    switch (s_->kind) {
      case measure_kind::gaussian:
        if (k % 2) return real(0);
        return pow_int(p, k) * double_factorial(k - 1);
      case measure_kind::laplace:
        if (k % 2) return real(0);
        return pow_int(p, k) * factorial(k);
      case measure_kind::uniform:
        if (k % 2) return real(0);
        return pow_int(p, k) / (k + 1);
      case measure_kind::one_sided_exp:
        return exp(detail::gamma_ratio_log(p + 1 + k, p + 1));
      case measure_kind::freud:
        if (k % 2) return real(0);
        return exp(detail::gamma_ratio_log(real(k + 1) / p, 1 / p));
      case measure_kind::moments:
        require(k < static_cast<int>(s_->given_moments.size()), "moment: beyond supplied list");
        return s_->given_moments[k];
      case measure_kind::discrete: {
        real acc(0);
        for (const auto& a : s_->atoms) acc += pow_int(a, k);
        return acc / static_cast<long>(s_->atoms.size());
      }
      case measure_kind::custom:
        return density_rule(k + 2, 0.0, {}).integrate(
            [&](const real& x) { return pow_int(x, k); });
    }
    throw numeric_error("moment: unreachable");
  }

  real x_norm(int m) const { return sqrt(moment(2 * m)); }

  // Largest moment order the measure can report; unbounded for the families
  // with closed forms or a density, the list length minus one otherwise.
  int moment_budget() const {
    if (s_->kind == measure_kind::moments)
      return static_cast<int>(s_->given_moments.size()) - 1;
    return std::numeric_limits<int>::max();
  }

  real density(const real& x) const {
    const real& p = s_->p1;
    switch (s_->kind) {
      case measure_kind::gaussian:
        return exp(-x * x / (2 * p * p)) / (p * sqrt(2 * const_pi()));
      case measure_kind::laplace:
        return exp(-abs(x) / p) / (2 * p);
      case measure_kind::uniform:
        return (abs(x) <= p) ? 1 / (2 * p) : real(0);
      case measure_kind::one_sided_exp:
        if (x <= 0) return real(0);
        return exp(p * log(x) - x - lgamma(p + 1));
      case measure_kind::freud:
        return exp(-pow(abs(x), p)) / (2 * exp(lgamma(1 + 1 / p)));
      case measure_kind::custom:
        return s_->density_fn(x);
      default:
        throw domain_error("density: not an absolutely continuous measure");
    }
  }

  // Support endpoints; infinite flags via second member.
  std::pair<real, bool> support_lo() const {
    switch (s_->kind) {
      case measure_kind::uniform:
        return {-s_->p1, false};
      case measure_kind::one_sided_exp:
        return {real(0), false};
      case measure_kind::custom:
        return {s_->lo, s_->lo_inf};
      case measure_kind::discrete:
        return {s_->atoms.front(), false};
      default:
        return {real(0), true};
    }
  }
  std::pair<real, bool> support_hi() const {
    switch (s_->kind) {
      case measure_kind::uniform:
        return {s_->p1, false};
      case measure_kind::custom:
        return {s_->hi, s_->hi_inf};
      case measure_kind::discrete:
        return {s_->atoms.back(), false};
      default:
        return {real(0), true};
    }
  }

  // Recurrence coefficients to the requested degree (cached; rebuilt when the
  // working precision rises). Lvalue-qualified: the reference points into the
  // measure's shared state, so calling on a temporary would dangle.
  const recurrence& recur(int max_deg) const& {
    if (s_->rec_deg >= max_deg && s_->rec_prec >= static_cast<long>(precision_digits())) return s_->rec;
    if (s_->kind == measure_kind::moments) {
      require(max_deg <= s_->rec.max_degree(), "recur: moment list too short for degree");
      return s_->rec;
    }
    build_recurrence(max_deg);
    return s_->rec;
  }
  const recurrence& recur(int max_deg) const&& = delete;

  quad_rule gauss(int n) const { return gauss_rule(recur(n), n); }

  std::vector<real> orthonormal_at(const real& x, int m) const {
    return orthonormal_eval(recur(m), x, m);
  }

  // Quadrature rule with the density folded into the weights, adequate for
  // inner products of degree <= max_deg orthonormal polynomials against
  // integrands that are smooth except at the listed kink abscissae.
  quad_rule aux_rule(int max_deg, const std::vector<real>& extra_kinks = {}) const;

  // Composite rule adapted to a nonnegative integrand factor riding on the
  // density. Panels start from the density geometry, so polynomials up to
  // deg_power stay panel-accurate, and then split wherever a two-half error
  // estimate of the factor integral is worst. A panel budget turns a
  // hopeless integrand into quadrature_insufficient instead of a wrong
  // value; max_panels <= 0 picks a budget from deg_power.
  quad_rule adaptive_rule(int deg_power, const std::function<real(const real&)>& factor,
                          int max_panels = 0) const;

  // Whether the composite rules can sample a density for this measure.
  bool density_backed() const {
    return s_->kind != measure_kind::moments && s_->kind != measure_kind::discrete;
  }

  // ||e^{xi X}||_{L2(mu)}; +inf is signalled by throwing domain_error for the
  // families whose exponential moments blow up at finite xi.
  real mgf_norm(const real& xi) const {
    const real& p = s_->p1;
    switch (s_->kind) {
      case measure_kind::gaussian:
        return exp(p * p * xi * xi);
      case measure_kind::laplace: {
        real t = 2 * abs(xi) * p;
        require(t < 1, "mgf_norm: divergent at |xi| >= 1/(2b) for laplace");
        return 1 / sqrt(1 - t * t);
      }
      case measure_kind::uniform: {
        if (xi == 0) return real(1);
        real y = 2 * abs(xi) * p;
        return sqrt(sinh(y) / y);
      }
      case measure_kind::one_sided_exp: {
        require(xi < real(1) / 2, "mgf_norm: divergent at xi >= 1/2 for one_sided_exp");
        return exp(-(p + 1) / 2 * log(1 - 2 * xi));
      }
      case measure_kind::discrete: {
        real acc(0);
        for (const auto& a : s_->atoms) acc += exp(2 * xi * a);
        return sqrt(acc / static_cast<long>(s_->atoms.size()));
      }
      default: {
        quad_rule r = density_rule(2, to_double(2 * abs(xi)), {},
                                   [&](const real& x) { return 2 * xi * x; },
                                   [&](const real&) { return 2 * xi; });
        return sqrt(r.integrate([&](const real& x) { return exp(2 * xi * x); }));
      }
    }
  }

  // E e^{t |X|} for t >= 0.
  real abs_mgf(const real& t) const {
    require(t >= 0, "abs_mgf: need t >= 0");
    const real& p = s_->p1;
    switch (s_->kind) {
      case measure_kind::gaussian:
        return exp(t * t * p * p / 2) * (1 + erf(t * p / sqrt(real(2))));
      case measure_kind::laplace:
        require(t * p < 1, "abs_mgf: divergent at t >= 1/b for laplace");
        return 1 / (1 - t * p);
      case measure_kind::uniform:
        if (t == 0) return real(1);
        return (exp(t * p) - 1) / (t * p);
      case measure_kind::one_sided_exp:
        require(t < 1, "abs_mgf: divergent at t >= 1 for one_sided_exp");
        return exp(-(p + 1) * log(1 - t));
      case measure_kind::discrete: {
        real acc(0);
        for (const auto& a : s_->atoms) acc += exp(t * abs(a));
        return acc / static_cast<long>(s_->atoms.size());
      }
      default: {
        quad_rule r = density_rule(2, to_double(t), {},
                                   [&](const real& x) { return t * abs(x); },
                                   [&](const real& x) { return x < 0 ? -t : t; });
        return r.integrate([&](const real& x) { return exp(t * abs(x)); });
      }
    }
  }

  const tail_class& tails() const;

  // Carleman-type divergence diagnostic: sum_{k<=kmax} m_{2k}^{-1/(2k)}.
  real carleman_sum(int kmax) const {
    real acc(0);
    for (int k = 1; k <= kmax; ++k) acc += exp(-log(moment(2 * k)) / (2 * k));
    return acc;
  }

  bool has_sampler() const {
    switch (s_->kind) {
      case measure_kind::gaussian:
      case measure_kind::laplace:
      case measure_kind::uniform:
      case measure_kind::one_sided_exp:
      case measure_kind::discrete:
        return true;
      default:
        return false;
    }
  }

  double sample(rng& g) const {
    double p = to_double(s_->p1);
    switch (s_->kind) {
      case measure_kind::gaussian:
        return p * g.normal();
      case measure_kind::laplace:
        return g.laplace(p);
      case measure_kind::uniform:
        return g.uniform(-p, p);
      case measure_kind::one_sided_exp:
        return sample_gamma(g, p + 1.0);
      case measure_kind::discrete:
        return to_double(s_->atoms[g.raw() % s_->atoms.size()]);
      default:
        throw domain_error("sample: no sampler for " + s_->name);
    }
  }

  const std::vector<real>& atoms() const {
    require(is_discrete(), "atoms: not a discrete measure");
    return s_->atoms;
  }

 private:
  explicit measure(measure_kind k, std::string nm) : s_(std::make_shared<detail::measure_state>()) {
    s_->kind = k;
    s_->name = std::move(nm);
  }

  real integrate_tol() const { return pow(real(10), -static_cast<long>(precision_digits()) + 5); }

  quad_rule density_rule(int deg_power, double exp_shift, std::vector<real> extra_kinks,
                         const std::function<real(const real&)>& factor_log = {},
                         const std::function<real(const real&)>& factor_rate = {}) const;

  // Truncation radius: smallest R (by doubling) with
  // log density(+-R) + deg_power * log R < -(precision + 30) ln 10.
  std::pair<real, real> truncated_support(int deg_power, double exp_shift = 0.0) const {
    real budget = -(real(precision_digits()) + 30) * log(real(10));
    auto small_enough = [&](const real& x) {
      real d = density(x);
      if (d == 0) return true;
      return log(d) + deg_power * log(abs(x) + 1) + exp_shift * abs(x) < budget;
    };
    auto [lo, lo_fin] = support_lo();
    auto [hi, hi_fin] = support_hi();
    real a, b;
    if (!lo_fin) a = lo;
    else {
      a = real(-1);
      while (!small_enough(a)) {
        a *= 2;
        if (a < real("-1e40")) throw quadrature_insufficient("truncated_support: no decay on the left");
      }
    }
    if (!hi_fin) b = hi;
    else {
      b = real(1);
      while (!small_enough(b)) {
        b *= 2;
        if (b > real("1e40")) throw quadrature_insufficient("truncated_support: no decay on the right");
      }
    }
    return {a, b};
  }

  void build_recurrence(int max_deg) const;

  // Marsaglia-Tsang gamma sampler (deterministic through our rng).
  static double sample_gamma(rng& g, double shape) {
    if (shape < 1.0) {
      double u = 0.0;
      while (u == 0.0) u = g.uniform();
      return sample_gamma(g, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = g.normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = 0.0;
      while (u == 0.0) u = g.uniform();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  std::shared_ptr<detail::measure_state> s_;
};

}  // namespace dcpoly

#include "dcpoly/measures_impl.hpp"
