#pragma once

// Best L2(mu) polynomial approximation and its certificates: orthonormal
// bases built from recurrences, projection with an independently validated
// target norm, characteristic-function probes of the residual against the
// class envelopes, and directional projections for product measures.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dcpoly/bounds.hpp"
#include "dcpoly/errors.hpp"
#include "dcpoly/measures.hpp"
#include "dcpoly/quadrature.hpp"
#include "dcpoly/real.hpp"
#include "dcpoly/targets.hpp"

namespace dcpoly {

// Orthonormal polynomial basis for a measure, together with the Gauss rule
// used as the discrete inner product and the basis values at its nodes.
class ortho_basis {
 public:
  const measure& model() const { return model_; }
  int max_degree() const { return max_degree_; }
  const recurrence& recur() const { return rec_; }

  real alpha(int k) const {
    require(k >= 0 && k <= max_degree_, "alpha: index out of range");
    return rec_.alpha[static_cast<std::size_t>(k)];
  }

  // beta(0) is the total mass of the measure.
  real beta(int k) const {
    require(k >= 0 && k <= max_degree_, "beta: index out of range");
    if (k == 0) return rec_.mu0;
    return rec_.beta[static_cast<std::size_t>(k)];
  }

  const std::vector<real>& nodes() const { return rule_.x; }
  const std::vector<real>& weights() const { return rule_.w; }
  int rule_size() const { return static_cast<int>(rule_.x.size()); }

  // q_0(x_i) .. q_max(x_i) at node i.
  const std::vector<real>& node_values(std::size_t i) const { return qtab_[i]; }

  std::vector<real> eval(const real& x) const {
    return orthonormal_eval(rec_, x, max_degree_);
  }

 private:
  friend ortho_basis build_basis(const measure&, int, int);
  ortho_basis(measure m, recurrence rec, int max_degree, quad_rule rule)
      : model_(std::move(m)),
        rec_(std::move(rec)),
        max_degree_(max_degree),
        rule_(std::move(rule)) {
    qtab_.reserve(rule_.x.size());
    for (const auto& x : rule_.x) qtab_.push_back(orthonormal_eval(rec_, x, max_degree_));
  }

  measure model_;
  recurrence rec_;
  int max_degree_;
  quad_rule rule_;
  std::vector<std::vector<real>> qtab_;
};

namespace detail {

// Relative agreement gate used by the basis and norm validations.
inline bool close_rel(const real& a, const real& b, const real& tol, const real& floor) {
  real scale = abs(a) + abs(b) + floor;
  return abs(a - b) <= tol * scale;
}

}  // namespace detail

// Build the orthonormal basis q_0..q_max_degree with a Gauss rule of
// rule_size nodes (default max_degree + 32). Two independent checks guard
// the construction and throw precision_exhausted when they fail:
//   1. the Gram matrix of the basis under the rule must match the identity;
//   2. the rule must reproduce the measure's power moments. The Gram check
//      alone cannot catch a recurrence that drifted from the measure,
//      because a Gauss rule is always orthonormal against the recurrence it
//      was built from; the moment check breaks that circularity.
inline ortho_basis build_basis(const measure& model, int max_degree, int rule_size = 0) {
  require(max_degree >= 0, "build_basis: negative degree");
  if (rule_size == 0) rule_size = max_degree + 32;
  require(rule_size > max_degree, "build_basis: rule must exceed the degree");

  const recurrence& rec = model.recur(rule_size);
  quad_rule rule = gauss_rule(rec, rule_size);
  ortho_basis basis(model, rec, max_degree, rule);

  const long prec = static_cast<long>(precision_digits());
  const real tol = pow_int(real(10), -(prec - 8));

  // Gram check. Full upper triangle at moderate degree; diagonal, adjacent
  // band, and random pairs when the full matrix would dominate the build.
  std::vector<std::pair<int, int>> pairs;
  if (max_degree <= 63) {
    for (int j = 0; j <= max_degree; ++j)
      for (int k = j; k <= max_degree; ++k) pairs.emplace_back(j, k);
  } else {
    for (int j = 0; j <= max_degree; ++j) {
      pairs.emplace_back(j, j);
      if (j + 1 <= max_degree) pairs.emplace_back(j, j + 1);
      if (j + 2 <= max_degree) pairs.emplace_back(j, j + 2);
    }
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    std::uniform_int_distribution<int> pick(0, max_degree);
    for (int t = 0; t < 128; ++t) {
      int j = pick(rng), k = pick(rng);
      pairs.emplace_back(std::min(j, k), std::max(j, k));
    }
  }
  for (const auto& [j, k] : pairs) {
    real g(0);
    for (int i = 0; i < basis.rule_size(); ++i) {
      const auto& q = basis.node_values(static_cast<std::size_t>(i));
      g += basis.weights()[static_cast<std::size_t>(i)] *
           q[static_cast<std::size_t>(j)] * q[static_cast<std::size_t>(k)];
    }
    real want = j == k ? real(1) : real(0);
    if (!(abs(g - want) <= tol))
      throw precision_exhausted("build_basis: orthonormality check failed at degrees " +
                                std::to_string(j) + "," + std::to_string(k));
  }

  // Moment reproduction check. The scale sqrt(m_{2k}) dominates |m_k|. A
  // rule too small to reproduce these moments is refused: certifying less
  // would leave the recurrence unchecked against the measure itself.
  int k_top = std::min(max_degree + 6, 12);
  k_top = std::min(k_top, model.moment_budget() / 2);
  for (int k = 0; k <= k_top; ++k) {
    real s(0);
    for (int i = 0; i < basis.rule_size(); ++i)
      s += basis.weights()[static_cast<std::size_t>(i)] *
           pow_int(basis.nodes()[static_cast<std::size_t>(i)], k);
    real want = model.moment(k);
    real scale = model.x_norm(k) + 1;
    if (!(abs(s - want) <= tol * scale))
      throw precision_exhausted("build_basis: the rule fails to reproduce moment " +
                                std::to_string(k));
  }

  return basis;
}

struct projection_options {
  // Extra node-count doublings allowed when the target norm disagrees
  // between rules before giving up.
  int max_refinements = 3;
  // Compute coefficients on the kink-split rule instead of the Gauss rule.
  // Gauss coefficients of a non-smooth target carry a kink-limited error
  // floor; the split rule trades polynomial exactness for locality.
  bool coeffs_on_split_rule = false;
};

// Projection output. The node snapshot holds the residual values on the
// rule that produced the coefficients, which is what the probes consume.
struct projection_result {
  projection_result(measure m, target_function t)
      : model(std::move(m)), target(std::move(t)) {}

  int D = 0;
  std::vector<real> coeffs;
  real residual_norm{0};
  real f_norm_sq{0};
  measure model;
  target_function target;
  std::vector<real> nodes, weights, residual_values;
};

namespace detail {

struct rule_projection {
  std::vector<real> coeffs;
  std::vector<real> fvals;
  real f_norm_sq_discrete{0};
};

// Coefficients and discrete norm of the target on one rule, given the
// orthonormal values at its nodes.
inline rule_projection project_on_rule(const std::vector<real>& x, const std::vector<real>& w,
                                       const std::vector<std::vector<real>>& qtab,
                                       const target_function& f, int D) {
  rule_projection out;
  out.fvals.reserve(x.size());
  for (const auto& xi : x) out.fvals.push_back(f(xi));
  out.coeffs.assign(static_cast<std::size_t>(D) + 1, real(0));
  for (std::size_t i = 0; i < x.size(); ++i) {
    real wf = w[i] * out.fvals[i];
    for (int j = 0; j <= D; ++j)
      out.coeffs[static_cast<std::size_t>(j)] += wf * qtab[i][static_cast<std::size_t>(j)];
    out.f_norm_sq_discrete += w[i] * out.fvals[i] * out.fvals[i];
  }
  return out;
}

}  // namespace detail

// Best degree-D approximation of f in L2(model). The coefficients come from
// the basis Gauss rule when its node-doubling certificate settles, and from
// an adaptive density rule otherwise; the squared target norm is always
// validated by a second computation. Persistent disagreement raises
// quadrature_insufficient rather than returning a residual built from an
// untrusted norm.
inline projection_result project(const ortho_basis& basis, const target_function& f, int D,
                                 const projection_options& opts = {}) {
  require(D >= 0 && D <= basis.max_degree(), "project: degree outside the basis range");
  const measure& model = basis.model();
  const long prec = static_cast<long>(precision_digits());
  const real agree_tol = real("1e-8");
  real f_disc(0);

  projection_result out(model, f);
  out.D = D;

  if (f.smooth()) {
    int n = basis.rule_size();
    std::vector<real> x = basis.nodes(), w = basis.weights();
    std::vector<std::vector<real>> qtab;
    qtab.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) qtab.push_back(basis.node_values(i));

    for (int attempt = 0;; ++attempt) {
      auto main = detail::project_on_rule(x, w, qtab, f, D);
      quad_rule check = model.gauss(2 * n);
      real s_check(0);
      for (std::size_t i = 0; i < check.x.size(); ++i) {
        real fv = f(check.x[i]);
        s_check += check.w[i] * fv * fv;
      }
      if (detail::close_rel(main.f_norm_sq_discrete, s_check, agree_tol, real("1e-60"))) {
        f_disc = main.f_norm_sq_discrete;
        out.coeffs = std::move(main.coeffs);
        out.f_norm_sq = s_check;
        out.nodes = std::move(x);
        out.weights = std::move(w);
        out.residual_values = std::move(main.fvals);
        break;
      }
      if (attempt >= opts.max_refinements) {
        // Gauss nodes follow the weight, not the target; heavy tails spread
        // them too thin for targets with unrelated curvature or oscillation.
        // The adaptive rule puts panels where the target itself demands them
        // and carries its own split-versus-order certificate.
        if (!model.density_backed())
          throw quadrature_insufficient(
              "project: the target norm did not stabilize under node doubling for " + f.name());
        quad_rule ar = model.adaptive_rule(2 * basis.max_degree() + 32, [&f](const real& xx) {
          real v = f(xx);
          return real(v * v);
        });
        const recurrence& rec = basis.recur();
        qtab.clear();
        qtab.reserve(ar.x.size());
        for (const auto& xi : ar.x) qtab.push_back(orthonormal_eval(rec, xi, D));
        main = detail::project_on_rule(ar.x, ar.w, qtab, f, D);
        f_disc = main.f_norm_sq_discrete;
        out.coeffs = std::move(main.coeffs);
        out.f_norm_sq = main.f_norm_sq_discrete;
        out.nodes = std::move(ar.x);
        out.weights = std::move(ar.w);
        out.residual_values = std::move(main.fvals);
        break;
      }
      n *= 2;
      quad_rule finer = model.gauss(n);
      x = std::move(finer.x);
      w = std::move(finer.w);
      const recurrence& rec = model.recur(n);
      qtab.clear();
      qtab.reserve(x.size());
      for (const auto& xi : x) qtab.push_back(orthonormal_eval(rec, xi, D));
    }
  } else {
    // Non-smooth target: the norm comes from a rule split at the kinks, and
    // is cross-checked against a deeper split rule.
    int split_deg = 2 * basis.max_degree() + 32;
    quad_rule split = model.aux_rule(split_deg, f.kinks());
    real s_split(0);
    for (std::size_t i = 0; i < split.x.size(); ++i) {
      real fv = f(split.x[i]);
      s_split += split.w[i] * fv * fv;
    }
    quad_rule deeper = model.aux_rule(2 * split_deg, f.kinks());
    real s_deeper(0);
    for (std::size_t i = 0; i < deeper.x.size(); ++i) {
      real fv = f(deeper.x[i]);
      s_deeper += deeper.w[i] * fv * fv;
    }
    if (!detail::close_rel(s_split, s_deeper, agree_tol, real("1e-60")))
      throw quadrature_insufficient("project: split-rule norms disagree for " + f.name());

    if (opts.coeffs_on_split_rule) {
      std::vector<std::vector<real>> qtab;
      qtab.reserve(deeper.x.size());
      for (const auto& xi : deeper.x)
        qtab.push_back(orthonormal_eval(basis.recur(), xi, D));
      auto main = detail::project_on_rule(deeper.x, deeper.w, qtab, f, D);
      f_disc = main.f_norm_sq_discrete;
      out.coeffs = std::move(main.coeffs);
      out.nodes = std::move(deeper.x);
      out.weights = std::move(deeper.w);
      out.residual_values = std::move(main.fvals);
    } else {
      std::vector<std::vector<real>> qtab;
      qtab.reserve(basis.nodes().size());
      for (std::size_t i = 0; i < basis.nodes().size(); ++i)
        qtab.push_back(basis.node_values(i));
      auto main = detail::project_on_rule(basis.nodes(), basis.weights(), qtab, f, D);
      f_disc = main.f_norm_sq_discrete;
      out.coeffs = std::move(main.coeffs);
      out.nodes = basis.nodes();
      out.weights = basis.weights();
      out.residual_values = std::move(main.fvals);
    }
    out.f_norm_sq = s_deeper;
  }

  // Turn the stored target values into residual values r = f - p, and take
  // the residual norm as the direct weighted sum on the same rule. The direct
  // sum cannot go negative, and it is the quantity the spectral probes see.
  {
    const recurrence& rec = basis.recur();
    real rsq(0);
    for (std::size_t i = 0; i < out.nodes.size(); ++i) {
      auto q = orthonormal_eval(rec, out.nodes[i], D);
      real p(0);
      for (int j = 0; j <= D; ++j)
        p += out.coeffs[static_cast<std::size_t>(j)] * q[static_cast<std::size_t>(j)];
      out.residual_values[i] -= p;
      rsq += out.weights[i] * out.residual_values[i] * out.residual_values[i];
    }
    out.residual_norm = sqrt(rsq);

    // Same-rule Parseval consistency: norm, coefficient mass, and residual
    // were all computed against one discrete rule, so they must close up to
    // the rule's own orthonormality defect.
    real csq(0);
    for (const auto& c : out.coeffs) csq += c * c;
    real gap = f_disc - csq - rsq;
    if (abs(gap) > pow_int(real(10), -(prec / 2)) * (f_disc + 1))
      throw numeric_error("project: the discrete Parseval identity failed");
  }
  return out;
}

enum class envelope_mode { automatic, strict_class, subexp_class, global_only };

struct fourier_probe_result {
  std::vector<real> xi;
  std::vector<real> phi_re, phi_im, phi_abs;
  std::vector<real> envelope;
  std::vector<real> ratio;
  // (m, |<r, x^m>|) for m = 0..D: the moments the projection annihilates.
  std::vector<std::pair<int, real>> derivative_checks;
  real sup_abs_phi{0};
  real max_ratio{0};
  real residual_norm{0};
  envelope_mode mode_used = envelope_mode::global_only;
};

// phi(xi) = sum_i w_i r(x_i) e^{-i xi x_i}, the spectral transform of the
// residual measure r dmu, evaluated literally as paired real sums. The
// envelope column is the class bound the measure's tails admit:
//   strict  A ||r|| (e r / D)^{D/r} (K|xi|)^D   above the feasibility floor,
//   subexp  e ||r|| tanh(K pi |xi| / 4)^D,
// falling back to the global bound ||r|| where neither applies. The ratio
// at xi = 0 is reported as zero; the derivative checks certify that point.
inline fourier_probe_result fourier_probe(const projection_result& res,
                                          const std::vector<real>& xi_grid,
                                          envelope_mode mode = envelope_mode::automatic) {
  fourier_probe_result out;
  out.xi = xi_grid;
  out.residual_norm = res.residual_norm;
  const std::size_t n = res.nodes.size();

  const tail_class& tc = res.model.tails();
  envelope_mode use = mode;
  if (use == envelope_mode::automatic) {
    if (tc.has_strict)
      use = envelope_mode::strict_class;
    else if (tc.has_subexp)
      use = envelope_mode::subexp_class;
    else
      use = envelope_mode::global_only;
  }
  if (use == envelope_mode::strict_class)
    require(tc.has_strict, "fourier_probe: measure has no finite-order tail class");
  if (use == envelope_mode::subexp_class)
    require(tc.has_subexp, "fourier_probe: measure has no subexponential tail class");
  out.mode_used = use;

  const real& norm = res.residual_norm;
  const std::int64_t Dd = res.D >= 1 ? res.D : 1;

  for (const auto& xi : xi_grid) {
    real re(0), im(0);
    for (std::size_t i = 0; i < n; ++i) {
      real t = xi * res.nodes[i];
      real wr = res.weights[i] * res.residual_values[i];
      re += wr * cos(t);
      im -= wr * sin(t);
    }
    out.phi_re.push_back(re);
    out.phi_im.push_back(im);
    real a = hypot(re, im);
    if (a > out.sup_abs_phi) out.sup_abs_phi = a;
    out.phi_abs.push_back(a);

    // The global Cauchy-Schwarz bound |phi| <= ||r|| always holds, so the
    // class envelope is capped by it wherever the class bound is looser.
    real env;
    real xa = abs(xi);
    if (res.D < 1 || xa == 0) {
      env = xa == 0 ? real(0) : norm;
    } else if (use == envelope_mode::strict_class) {
      real floor_d = tc.r * pow(tc.K * xa, tc.r);
      env = norm;
      if (real(Dd) > floor_d) {
        real cls = tc.A * norm * finite_order_bound(Dd, tc.r, tc.K, xa);
        if (cls < env) env = cls;
      }
    } else if (use == envelope_mode::subexp_class) {
      real cls = const_e() * norm * strip_bound(Dd, tc.K_sub * const_pi() * xa / 4);
      env = cls < norm ? cls : norm;
    } else {
      env = norm;
    }
    out.envelope.push_back(env);
    real ratio = env > 0 ? real(a / env) : real(0);
    out.ratio.push_back(ratio);
    if (ratio > out.max_ratio) out.max_ratio = ratio;
  }

  for (int m = 0; m <= res.D; ++m) {
    real s(0);
    for (std::size_t i = 0; i < n; ++i)
      s += res.weights[i] * res.residual_values[i] * pow_int(res.nodes[i], m);
    out.derivative_checks.emplace_back(m, abs(s));
  }
  return out;
}

// Squared residual via the spectral side. For an atomic spectrum this is
//   sum_j c_j Re phi(omega_j) - s_j Im phi(omega_j),
// and for the flat sinc spectrum (1/omega) int_0^omega Re phi. Both follow
// from <r, r> = <r, f> once the projection kills polynomials up to D.
inline real plancherel_residual_sq(const projection_result& res) {
  require(res.target.band_limited(), "plancherel_residual_sq: target is not band-limited");

  auto phi_at = [&](const real& xi) {
    real re(0), im(0);
    for (std::size_t i = 0; i < res.nodes.size(); ++i) {
      real t = xi * res.nodes[i];
      real wr = res.weights[i] * res.residual_values[i];
      re += wr * cos(t);
      im -= wr * sin(t);
    }
    return cnum{re, im};
  };

  if (res.target.kind() == target_kind::sinc) {
    const real& edge = res.target.band_edge();
    real integral = integrate_smooth(
        [&](const real& xi) { return phi_at(xi).re; }, real(0), edge,
        pow_int(real(10), -static_cast<long>(precision_digits()) / 2));
    return integral / edge;
  }

  real acc(0);
  for (const auto& tm : res.target.spectrum()) {
    cnum phi = phi_at(tm.omega);
    acc += tm.cos_coeff * phi.re - tm.sin_coeff * phi.im;
  }
  return acc;
}

struct residual_report {
  real measured{0};
  real certified{0};
  real ratio{0};
  bool ok = false;
};

// Compare a measured residual against the bound a degree plan certifies.
// The certificate speaks only for degrees at or above the planned one, so a
// lower-degree projection is refused instead of judged.
inline residual_report residual_bound_check(const projection_result& res,
                                            const degree_plan& plan) {
  require(static_cast<std::int64_t>(res.D) >= plan.D,
          "residual_bound_check: projection degree is below the planned degree");
  residual_report rep;
  rep.measured = res.residual_norm;
  rep.certified = plan.split.band_term + plan.split.tail_term;
  require(rep.certified > 0, "residual_bound_check: plan certifies a zero bound");
  rep.ratio = rep.measured / rep.certified;
  rep.ok = rep.measured <= rep.certified;
  return rep;
}

// ---------------------------------------------------------------------------
// Directional and multivariate support.

// Law of <w, X> for independent coordinates X_s ~ axes[s], delivered through
// its moments: E S_s^k = sum_i C(k,i) E S_{s-1}^i w_s^{k-i} E X_s^{k-i}.
inline measure project_measure(const std::vector<measure>& axes, const std::vector<real>& w,
                               int moments_to, std::string label = "pushforward") {
  require(!axes.empty() && axes.size() == w.size(),
          "project_measure: need one weight per axis");
  require(moments_to >= 2, "project_measure: need at least two moments");
  std::size_t L = static_cast<std::size_t>(moments_to);

  // Pascal triangle for the binomial convolution.
  std::vector<std::vector<real>> choose(L + 1, std::vector<real>(L + 1, real(0)));
  for (std::size_t k = 0; k <= L; ++k) {
    choose[k][0] = 1;
    for (std::size_t i = 1; i <= k; ++i)
      choose[k][i] = choose[k - 1][i - 1] + (i <= k - 1 ? choose[k - 1][i] : real(0));
  }

  std::vector<real> acc(L + 1, real(0));
  acc[0] = 1;
  for (std::size_t s = 0; s < axes.size(); ++s) {
    std::vector<real> wpow(L + 1, real(1));
    for (std::size_t k = 1; k <= L; ++k) wpow[k] = wpow[k - 1] * w[s];
    std::vector<real> next(L + 1, real(0));
    for (std::size_t k = 0; k <= L; ++k)
      for (std::size_t i = 0; i <= k; ++i)
        next[k] += choose[k][i] * acc[i] * wpow[k - i] * axes[s].moment(static_cast<int>(k - i));
    acc = std::move(next);
  }
  return measure::from_moments(std::move(acc), std::move(label));
}

struct projection_d_result {
  int d = 0;
  int D = 0;
  std::vector<std::vector<int>> exponents;  // graded-lex monomial orders
  std::vector<real> coeffs;
  real residual_norm{0};
  real f_norm_sq{0};
  std::vector<std::vector<real>> axis_nodes, axis_weights;
  std::function<real(const std::vector<real>&)> f;
};

namespace detail {

inline void enumerate_exponents(int d, int budget, std::vector<int>& cur,
                                std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == d) {
    out.push_back(cur);
    return;
  }
  for (int e = budget; e >= 0; --e) {
    cur.push_back(e);
    enumerate_exponents(d, budget - e, cur, out);
    cur.pop_back();
  }
}

// All exponent vectors with |alpha| <= D, graded by total degree and lex
// within a grade.
inline std::vector<std::vector<int>> graded_exponents(int d, int D) {
  std::vector<std::vector<int>> out;
  for (int total = 0; total <= D; ++total) {
    std::vector<std::vector<int>> grade;
    std::vector<int> cur;
    // Collect exact-total vectors by walking with the first coordinate high.
    std::function<void(int, int)> walk = [&](int pos, int left) {
      if (pos == d - 1) {
        cur.push_back(left);
        grade.push_back(cur);
        cur.pop_back();
        return;
      }
      for (int e = left; e >= 0; --e) {
        cur.push_back(e);
        walk(pos + 1, left - e);
        cur.pop_back();
      }
    };
    walk(0, total);
    for (auto& g : grade) out.push_back(std::move(g));
  }
  return out;
}

// Mixed-radix iteration over a product grid; fn receives the node index
// vector. Grid sizes are validated by the caller.
inline void for_each_grid_point(const std::vector<std::size_t>& sizes,
                                const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> idx(sizes.size(), 0);
  for (;;) {
    fn(idx);
    std::size_t p = 0;
    while (p < sizes.size()) {
      if (++idx[p] < sizes[p]) break;
      idx[p] = 0;
      ++p;
    }
    if (p == sizes.size()) return;
  }
}

// LDL^T with symmetric max-diagonal pivoting. Solves G a = b in place and
// reports failure through precision_exhausted when positivity is lost.
inline std::vector<real> solve_spd(std::vector<std::vector<real>> G, std::vector<real> b) {
  const std::size_t n = b.size();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  real max_diag(0);
  for (std::size_t i = 0; i < n; ++i)
    if (G[i][i] > max_diag) max_diag = G[i][i];
  const real pivot_floor =
      max_diag * pow_int(real(10), -static_cast<long>(precision_digits()) + 12);

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t j = k + 1; j < n; ++j)
      if (G[j][j] > G[p][p]) p = j;
    if (p != k) {
      std::swap(perm[k], perm[p]);
      std::swap(b[k], b[p]);
      G[k].swap(G[p]);
      for (std::size_t j = 0; j < n; ++j) std::swap(G[j][k], G[j][p]);
    }
    if (!(G[k][k] > pivot_floor))
      throw precision_exhausted("project_d: Gram matrix lost positive definiteness");
    for (std::size_t j = k + 1; j < n; ++j) {
      real m = G[j][k] / G[k][k];
      if (m == 0) continue;
      for (std::size_t c = k; c < n; ++c) G[j][c] -= m * G[k][c];
      b[j] -= m * b[k];
    }
  }
  std::vector<real> y(n);
  for (std::size_t ri = n; ri-- > 0;) {
    real s = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) s -= G[ri][c] * y[c];
    y[ri] = s / G[ri][ri];
  }
  std::vector<real> a(n);
  for (std::size_t i = 0; i < n; ++i) a[perm[i]] = y[i];
  return a;
}

inline real binomial_count(int n, int k) {
  real acc(1);
  for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;
  return acc;
}

}  // namespace detail

// Best total-degree-D polynomial approximation of f over a product of
// independent coordinate measures, by normal equations in the monomial
// basis solved with a pivoted LDL^T factorization. The inner products come
// from a product Gauss grid that is exact for the Gram entries.
inline projection_d_result project_d(const std::vector<measure>& axes,
                                     const std::function<real(const std::vector<real>&)>& f,
                                     int D) {
  const int d = static_cast<int>(axes.size());
  require(d >= 1 && d <= 6, "project_d: dimension must be between 1 and 6");
  require(D >= 0, "project_d: negative degree");
  real count = detail::binomial_count(d + D, D);
  if (!(count <= real(200000)))
    throw basis_too_large("project_d: the monomial basis would have " + count.str(6) +
                          " elements");

  projection_d_result out;
  out.d = d;
  out.D = D;
  out.f = f;
  out.exponents = detail::graded_exponents(d, D);
  const std::size_t N = out.exponents.size();

  // Per-axis rules must integrate the target, not just the monomials; in low
  // dimension the grid is cheap enough to carry a generous node surplus.
  const int n_axis = D + 1 + (d <= 3 ? 24 : 1);
  std::vector<std::size_t> sizes;
  real grid_count(1);
  for (int s = 0; s < d; ++s) {
    quad_rule rule = axes[static_cast<std::size_t>(s)].gauss(n_axis);
    out.axis_nodes.push_back(rule.x);
    out.axis_weights.push_back(rule.w);
    sizes.push_back(rule.x.size());
    grid_count *= static_cast<int>(rule.x.size());
  }
  if (!(grid_count <= real(2000000)))
    throw basis_too_large("project_d: the product grid would have " + grid_count.str(6) +
                          " nodes");

  // Per-axis node powers up to 2D, so Gram entries are table lookups.
  std::vector<std::vector<std::vector<real>>> powers(static_cast<std::size_t>(d));
  for (int s = 0; s < d; ++s) {
    auto& per_axis = powers[static_cast<std::size_t>(s)];
    per_axis.resize(sizes[static_cast<std::size_t>(s)]);
    for (std::size_t i = 0; i < per_axis.size(); ++i) {
      per_axis[i].assign(static_cast<std::size_t>(2 * D) + 1, real(1));
      for (int e = 1; e <= 2 * D; ++e)
        per_axis[i][static_cast<std::size_t>(e)] =
            per_axis[i][static_cast<std::size_t>(e - 1)] *
            out.axis_nodes[static_cast<std::size_t>(s)][i];
    }
  }

  // Gram entries factor across axes: <x^a, x^b> = prod_s m_s(a_s + b_s).
  std::vector<std::vector<real>> axis_moment(static_cast<std::size_t>(d));
  for (int s = 0; s < d; ++s) {
    auto& m = axis_moment[static_cast<std::size_t>(s)];
    m.assign(static_cast<std::size_t>(2 * D) + 1, real(0));
    for (std::size_t i = 0; i < sizes[static_cast<std::size_t>(s)]; ++i)
      for (int e = 0; e <= 2 * D; ++e)
        m[static_cast<std::size_t>(e)] += out.axis_weights[static_cast<std::size_t>(s)][i] *
                                          powers[static_cast<std::size_t>(s)][i]
                                                [static_cast<std::size_t>(e)];
  }
  std::vector<std::vector<real>> G(N, std::vector<real>(N, real(0)));
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = a; b < N; ++b) {
      real g(1);
      for (int s = 0; s < d; ++s)
        g *= axis_moment[static_cast<std::size_t>(s)]
                        [static_cast<std::size_t>(out.exponents[a][static_cast<std::size_t>(s)] +
                                                  out.exponents[b][static_cast<std::size_t>(s)])];
      G[a][b] = g;
      G[b][a] = g;
    }

  // Right-hand side and target norm over the grid.
  std::vector<real> rhs(N, real(0));
  real fsq(0);
  std::vector<real> point(static_cast<std::size_t>(d));
  detail::for_each_grid_point(sizes, [&](const std::vector<std::size_t>& idx) {
    real wgt(1);
    for (int s = 0; s < d; ++s) {
      point[static_cast<std::size_t>(s)] =
          out.axis_nodes[static_cast<std::size_t>(s)][idx[static_cast<std::size_t>(s)]];
      wgt *= out.axis_weights[static_cast<std::size_t>(s)][idx[static_cast<std::size_t>(s)]];
    }
    real fv = f(point);
    fsq += wgt * fv * fv;
    for (std::size_t a = 0; a < N; ++a) {
      real mono(1);
      for (int s = 0; s < d; ++s)
        mono *= powers[static_cast<std::size_t>(s)][idx[static_cast<std::size_t>(s)]]
                      [static_cast<std::size_t>(out.exponents[a][static_cast<std::size_t>(s)])];
      rhs[a] += wgt * fv * mono;
    }
  });
  out.f_norm_sq = fsq;
  out.coeffs = detail::solve_spd(G, rhs);

  // Residual norm measured directly on the grid, not through Pythagoras:
  // the monomial route is kept honest by recomputation.
  real rsq(0);
  detail::for_each_grid_point(sizes, [&](const std::vector<std::size_t>& idx) {
    real wgt(1);
    for (int s = 0; s < d; ++s) {
      point[static_cast<std::size_t>(s)] =
          out.axis_nodes[static_cast<std::size_t>(s)][idx[static_cast<std::size_t>(s)]];
      wgt *= out.axis_weights[static_cast<std::size_t>(s)][idx[static_cast<std::size_t>(s)]];
    }
    real pv(0);
    for (std::size_t a = 0; a < N; ++a) {
      real mono(1);
      for (int s = 0; s < d; ++s)
        mono *= powers[static_cast<std::size_t>(s)][idx[static_cast<std::size_t>(s)]]
                      [static_cast<std::size_t>(out.exponents[a][static_cast<std::size_t>(s)])];
      pv += out.coeffs[a] * mono;
    }
    real rv = f(point) - pv;
    rsq += wgt * rv * rv;
  });
  out.residual_norm = sqrt(rsq);
  return out;
}

// Residual value at a point.
inline real eval_residual_d(const projection_d_result& res, const std::vector<real>& x) {
  require(x.size() == static_cast<std::size_t>(res.d), "eval_residual_d: dimension mismatch");
  real pv(0);
  for (std::size_t a = 0; a < res.exponents.size(); ++a) {
    real mono(1);
    for (int s = 0; s < res.d; ++s)
      mono *= pow_int(x[static_cast<std::size_t>(s)],
                      res.exponents[a][static_cast<std::size_t>(s)]);
    pv += res.coeffs[a] * mono;
  }
  return res.f(x) - pv;
}

// phi(xi) = sum over the grid of w r(x) e^{-i <xi, x>}.
inline cnum spectral_transform_d(const projection_d_result& res, const std::vector<real>& xi) {
  require(xi.size() == static_cast<std::size_t>(res.d), "spectral_transform_d: dimension");
  std::vector<std::size_t> sizes;
  for (const auto& nd : res.axis_nodes) sizes.push_back(nd.size());
  real re(0), im(0);
  std::vector<real> point(static_cast<std::size_t>(res.d));
  detail::for_each_grid_point(sizes, [&](const std::vector<std::size_t>& idx) {
    real wgt(1), dot(0);
    for (int s = 0; s < res.d; ++s) {
      const real& xv = res.axis_nodes[static_cast<std::size_t>(s)][idx[static_cast<std::size_t>(s)]];
      point[static_cast<std::size_t>(s)] = xv;
      wgt *= res.axis_weights[static_cast<std::size_t>(s)][idx[static_cast<std::size_t>(s)]];
      dot += xi[static_cast<std::size_t>(s)] * xv;
    }
    real wr = wgt * eval_residual_d(res, point);
    re += wr * cos(dot);
    im -= wr * sin(dot);
  });
  return {re, im};
}

struct directional_derivative_report {
  real value{0};       // |d^k phi(xi)[v_1..v_k]|
  real kappa4{0};      // ||(prod <v_j, x>)^2||^{1/2}
  real strict_bound{0};
  bool strict_feasible = false;
  real subexp_bound{0};
  bool subexp_available = false;
};

// Mixed directional derivative of the residual transform and the class
// bounds it must respect:
//   strict  sqrt(A) ||r|| kappa4 (e r/(D-k))^{(D-k)/r} (2K|xi|)^{D-k},
//   subexp  e^{1/2} ||r|| kappa4 tanh(K pi |xi| / 2)^{D-k},
// with tail constants supplied by the caller for the law of the relevant
// one-dimensional marginals.
inline directional_derivative_report directional_derivative_check(
    const projection_d_result& res, const std::vector<std::vector<real>>& directions,
    const std::vector<real>& xi, const tail_class& tc) {
  const int k = static_cast<int>(directions.size());
  require(k >= 1 && k < res.D, "directional_derivative_check: need 1 <= k < D");
  for (const auto& v : directions)
    require(v.size() == static_cast<std::size_t>(res.d),
            "directional_derivative_check: direction dimension mismatch");
  require(xi.size() == static_cast<std::size_t>(res.d),
          "directional_derivative_check: point dimension mismatch");

  std::vector<std::size_t> sizes;
  for (const auto& nd : res.axis_nodes) sizes.push_back(nd.size());

  real re(0), im(0), g4(0);
  real xi_norm(0);
  for (const auto& c : xi) xi_norm += c * c;
  xi_norm = sqrt(xi_norm);

  std::vector<real> point(static_cast<std::size_t>(res.d));
  detail::for_each_grid_point(sizes, [&](const std::vector<std::size_t>& idx) {
    real wgt(1), dot(0);
    for (int s = 0; s < res.d; ++s) {
      const real& xv = res.axis_nodes[static_cast<std::size_t>(s)][idx[static_cast<std::size_t>(s)]];
      point[static_cast<std::size_t>(s)] = xv;
      wgt *= res.axis_weights[static_cast<std::size_t>(s)][idx[static_cast<std::size_t>(s)]];
      dot += xi[static_cast<std::size_t>(s)] * xv;
    }
    real g(1);
    for (const auto& v : directions) {
      real dv(0);
      for (int s = 0; s < res.d; ++s) dv += v[static_cast<std::size_t>(s)] * point[static_cast<std::size_t>(s)];
      g *= dv;
    }
    real wr = wgt * eval_residual_d(res, point) * g;
    re += wr * cos(dot);
    im -= wr * sin(dot);
    g4 += wgt * g * g * g * g;
  });

  directional_derivative_report rep;
  rep.value = hypot(re, im);
  rep.kappa4 = sqrt(sqrt(g4));

  const std::int64_t Dk = res.D - k;
  real rnorm(0);
  {
    // Residual norm of the multivariate projection enters both bounds.
    rnorm = res.residual_norm;
  }
  if (tc.has_strict && xi_norm > 0) {
    real floor_d = tc.r * pow(2 * tc.K * xi_norm, tc.r);
    if (real(Dk) > floor_d) {
      rep.strict_feasible = true;
      rep.strict_bound =
          sqrt(tc.A) * rnorm * rep.kappa4 * finite_order_bound(Dk, tc.r, 2 * tc.K, xi_norm);
    }
  }
  if (tc.has_subexp && xi_norm > 0) {
    rep.subexp_available = true;
    rep.subexp_bound = sqrt(const_e()) * rnorm * rep.kappa4 *
                       strip_bound(Dk, tc.K_sub * const_pi() * xi_norm / 2);
  }
  return rep;
}

}  // namespace dcpoly
