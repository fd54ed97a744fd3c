#pragma once

// Implementation details for measure: recurrence construction, auxiliary
// rules, tail classes. Included at the end of measures.hpp.

namespace dcpoly {
namespace detail {

// Greedy panelization of [A, B] with local width w(x), split at kinks.
inline std::vector<real> greedy_breakpoints(const real& A, const real& B,
                                            const std::function<real(const real&)>& width,
                                            std::vector<real> kinks) {
  std::vector<real> edges;
  kinks.push_back(A);
  kinks.push_back(B);
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
  for (std::size_t s = 0; s + 1 < kinks.size(); ++s) {
    if (kinks[s + 1] <= A || kinks[s] >= B) continue;
    real a = std::max(kinks[s], A), b = std::min(kinks[s + 1], B);
    edges.push_back(a);
    real x = a;
    int guard = 0;
    while (x < b) {
      real w = width(x);
      if (w <= 0) throw numeric_error("greedy_breakpoints: nonpositive width");
      x = x + w;
      if (x >= b - w / 4) x = b;
      edges.push_back(x);
      if (++guard > 20000) throw quadrature_insufficient("greedy_breakpoints: panel explosion");
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

// Geometric panel refinement into `pt` from whichever sides have neighboring
// breakpoints. Densities that are merely Hoelder-smooth at a point (fractional
// exponents, hard edges) defeat fixed-width panels; panels shrinking by 4x per
// level restore exponential convergence in the level count.
inline void grade_into(std::vector<real>& bp, const real& pt, int levels) {
  auto it = std::lower_bound(bp.begin(), bp.end(), pt);
  if (it == bp.end() || *it != pt) return;
  std::size_t i = static_cast<std::size_t>(it - bp.begin());
  std::vector<real> extra;
  if (i > 0) {
    real h = pt - bp[i - 1];
    for (int l = 0; l < levels; ++l) {
      h /= 4;
      extra.push_back(pt - h);
    }
  }
  if (i + 1 < bp.size()) {
    real h = bp[i + 1] - pt;
    for (int l = 0; l < levels; ++l) {
      h /= 4;
      extra.push_back(pt + h);
    }
  }
  bp.insert(bp.end(), extra.begin(), extra.end());
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
}

// Grading depth: the innermost panel must fall below the precision floor even
// for low Hoelder exponents.
inline int grade_levels() { return std::max(24, static_cast<int>(precision_digits())); }

// Points per composite panel, scaled so panels resolve the full working
// precision rather than a fixed digit count.
inline int panel_points() { return 48 + static_cast<int>(precision_digits()) / 2; }

// Fold a density into a Lebesgue composite rule.
inline quad_rule with_density(quad_rule r, const std::function<real(const real&)>& rho) {
  for (std::size_t i = 0; i < r.size(); ++i) r.w[i] *= rho(r.x[i]);
  return r;
}

// Mirror a rule on (0, inf) to the whole line, halving weights.
inline quad_rule mirror_symmetric(const quad_rule& half) {
  quad_rule r;
  r.x.reserve(2 * half.size());
  r.w.reserve(2 * half.size());
  for (std::size_t i = half.size(); i-- > 0;) {
    r.x.push_back(-half.x[i]);
    r.w.push_back(half.w[i] / 2);
  }
  for (std::size_t i = 0; i < half.size(); ++i) {
    r.x.push_back(half.x[i]);
    r.w.push_back(half.w[i] / 2);
  }
  return r;
}

}  // namespace detail

inline void measure::build_recurrence(int max_deg) const {
  const real& p = s_->p1;
  switch (s_->kind) {
    case measure_kind::gaussian:
      s_->rec = hermite_recurrence(max_deg, p);
      break;
    case measure_kind::uniform:
      s_->rec = uniform_recurrence(max_deg, p);
      break;
    case measure_kind::one_sided_exp:
      s_->rec = laguerre_recurrence(max_deg, p, real(1));
      break;
    case measure_kind::laplace: {
      // Exact for polynomials: two mirrored Gauss-Laguerre halves.
      int n_aux = max_deg + 16;
      quad_rule half = gauss_rule(laguerre_recurrence(n_aux, real(0), p), n_aux);
      s_->rec = stieltjes_recurrence(detail::mirror_symmetric(half), max_deg);
      break;
    }
    case measure_kind::freud:
    case measure_kind::custom: {
      quad_rule rule = density_rule(2 * max_deg + 2, 0.0, {});
      s_->rec = stieltjes_recurrence(rule, max_deg);
      // Gate: the recurrence must reproduce low moments of the measure.
      if (max_deg >= 2) {
        // For any measure, m2/m0 = beta_1 + alpha_0^2.
        real m2_rec = s_->rec.beta[1] + s_->rec.alpha[0] * s_->rec.alpha[0];
        real m2 = moment(2) / moment(0);
        real tol = pow(real(10), -(static_cast<long>(precision_digits()) / 2));
        if (abs(m2_rec - m2) > tol * (1 + abs(m2)))
          throw quadrature_insufficient("build_recurrence: moment check failed for " + s_->name);
      }
      break;
    }
    case measure_kind::discrete: {
      require(max_deg + 1 <= static_cast<int>(s_->atoms.size()),
              "recur: degree needs more sample points");
      quad_rule rule;
      rule.x = s_->atoms;
      rule.w.assign(s_->atoms.size(), real(1) / static_cast<long>(s_->atoms.size()));
      s_->rec = stieltjes_recurrence(rule, max_deg);
      break;
    }
    case measure_kind::moments:
      throw domain_error("recur: moment-born measure has a fixed table");
  }
  s_->rec_deg = max_deg;
  s_->rec_prec = static_cast<long>(precision_digits());
  s_->tails_cache.reset();
}

inline quad_rule measure::aux_rule(int max_deg, const std::vector<real>& extra_kinks) const {
  const real& p = s_->p1;
  const bool smooth = extra_kinks.empty();
  switch (s_->kind) {
    case measure_kind::gaussian: {
      if (smooth) return gauss(max_deg + 40);
      auto [A, B] = truncated_support(max_deg + 2);
      real lam = const_pi() / sqrt(real(2 * (max_deg + 1)));
      real wb = 13 * lam * p;
      auto bp = detail::greedy_breakpoints(A, B, [&](const real&) { return wb; }, extra_kinks);
      return detail::with_density(composite_legendre(bp, detail::panel_points()),
                                  [this](const real& x) { return density(x); });
    }
    case measure_kind::laplace: {
      // Mirrored Laguerre halves; the only kink our targets carry sits at 0,
      // which is already a panel boundary of the mirrored rule.
      for (const auto& k : extra_kinks)
        require(k == 0, "aux_rule: laplace rule only splits at 0");
      int n_aux = max_deg + 48;
      quad_rule half = gauss_rule(laguerre_recurrence(n_aux, real(0), p), n_aux);
      return detail::mirror_symmetric(half);
    }
    case measure_kind::one_sided_exp: {
      for (const auto& k : extra_kinks)
        require(k == 0, "aux_rule: one_sided_exp rule only splits at 0");
      return gauss(max_deg + 48);
    }
    case measure_kind::uniform: {
      if (smooth) return gauss(max_deg + 40);
      real n1 = real(max_deg + 1);
      real wb = 13 * const_pi() * p / n1;
      auto bp = detail::greedy_breakpoints(-p, p, [&](const real&) { return wb; }, extra_kinks);
      detail::grade_into(bp, -p, 2 * static_cast<int>(std::log2(to_double(n1))) + 4);
      detail::grade_into(bp, p, 2 * static_cast<int>(std::log2(to_double(n1))) + 4);
      return detail::with_density(composite_legendre(bp, detail::panel_points()),
                                  [this](const real& x) { return density(x); });
    }
    case measure_kind::freud:
    case measure_kind::custom:
      return density_rule(max_deg + 2, 0.0, extra_kinks);
    case measure_kind::discrete: {
      quad_rule r;
      r.x = s_->atoms;
      r.w.assign(s_->atoms.size(), real(1) / static_cast<long>(s_->atoms.size()));
      return r;
    }
    case measure_kind::moments:
      return gauss(std::min(max_deg + 16, s_->rec.max_degree() + 1));
  }
  throw numeric_error("aux_rule: unreachable");
}

inline quad_rule measure::adaptive_rule(int deg_power,
                                        const std::function<real(const real&)>& factor,
                                        int max_panels) const {
  require(density_backed(), "adaptive_rule: no density to sample for " + s_->name);
  const int q = detail::panel_points();
  // Panels never shrink below the scale where plain Gauss-Legendre exactness
  // takes over, so the degree cap is the per-panel one.
  require(deg_power <= 2 * q - 1, "adaptive_rule: degree beyond the per-panel budget");
  if (max_panels <= 0) max_panels = std::max(512, 12 * deg_power);

  auto [A, B] = truncated_support(deg_power);
  real span = B - A;
  real wb = span / std::max(12, deg_power / 13 + 4);

  // Density-informed starting widths; the density kinks and the hard support
  // edges become panel boundaries, so each starting panel is smooth inside.
  auto width = [&](const real& x) -> real {
    real h = std::max(real(span * real("1e-6")), real(wb / 64));
    real d0 = density(x), d1 = density(x + h);
    real slope(0);
    if (d0 > 0 && d1 > 0) slope = abs(log(d1) - log(d0)) / h;
    real w_decay = 40 / (1 + slope);
    return w_decay < wb ? w_decay : wb;
  };
  std::vector<real> kinks;
  if (s_->kind == measure_kind::freud || s_->kind == measure_kind::laplace)
    kinks.push_back(real(0));
  for (const auto& k : s_->density_kinks) kinks.push_back(k);
  auto bp = detail::greedy_breakpoints(A, B, width, kinks);

  auto raw_integral = [&](const real& a, const real& b, int pts) {
    const quad_rule& base = legendre_base(pts);
    real mid = (a + b) / 2, half = (b - a) / 2, s(0);
    for (std::size_t i = 0; i < base.size(); ++i) {
      real xx = mid + half * base.x[i];
      s += base.w[i] * factor(xx) * density(xx);
    }
    return real(s * half);
  };

  struct panel {
    real a, b, coarse, fine, err;
  };
  auto make_panel = [&](const real& a, const real& b) {
    real m = (a + b) / 2;
    panel p{a, b, raw_integral(a, b, q), real(0), real(0)};
    p.fine = raw_integral(a, m, q) + raw_integral(m, b, q);
    p.err = abs(p.fine - p.coarse);
    return p;
  };

  std::vector<panel> panels;
  for (std::size_t s = 0; s + 1 < bp.size(); ++s) panels.push_back(make_panel(bp[s], bp[s + 1]));

  const real tol = pow_int(real(10), -(static_cast<long>(precision_digits()) - 14));
  const real floor_abs = pow_int(real(10), -static_cast<long>(precision_digits()));
  real total(0);
  for (;;) {
    total = 0;
    real err(0);
    for (const auto& p : panels) {
      total += p.fine;
      err += p.err;
    }
    if (err <= tol * (abs(total) + floor_abs)) break;
    if (static_cast<int>(panels.size()) >= max_panels)
      throw quadrature_insufficient("adaptive_rule: panel budget exhausted for " + s_->name);
    std::size_t worst = 0;
    for (std::size_t i = 1; i < panels.size(); ++i)
      if (panels[i].err > panels[worst].err) worst = i;
    real a = panels[worst].a, b = panels[worst].b, m = (a + b) / 2;
    panels[worst] = make_panel(a, m);
    panels.push_back(make_panel(m, b));
  }

  // Independent certificate: the split-based estimates must survive a
  // higher-order recomputation of every panel.
  real defect(0);
  for (const auto& p : panels) defect += abs(raw_integral(p.a, p.b, q + 24) - p.fine);
  if (defect > 64 * tol * (abs(total) + floor_abs))
    throw quadrature_insufficient("adaptive_rule: refinement certificates disagree for " + s_->name);

  std::vector<real> edges;
  edges.reserve(panels.size() + 1);
  for (const auto& p : panels) edges.push_back(p.a);
  edges.push_back(B);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return detail::with_density(composite_legendre(edges, q),
                              [this](const real& x) { return density(x); });
}

// Shared construction of a density-weighted composite rule for the families
// without closed-form recurrences. deg_power caps the polynomial degree the
// rule must resolve; factor_log / factor_rate describe an optional exponential
// factor in the integrand (its log and the derivative of its log), with
// exp_shift an upper bound on |factor_rate| used for support truncation.
//
// Regions where the whole log-integrand sits below the working-precision
// floor are crossed with bulk-width panels; live regions get panels sized to
// the local log-slope, with boundaries pinned by a uniform scan so a bulk
// stride can never step across a narrow peak. Panels refine geometrically
// into density kinks and hard support edges so Hoelder points cannot stall
// convergence.
inline quad_rule measure::density_rule(int deg_power, double exp_shift,
                                       std::vector<real> extra_kinks,
                                       const std::function<real(const real&)>& factor_log,
                                       const std::function<real(const real&)>& factor_rate) const {
  auto [A, B] = truncated_support(deg_power, exp_shift);
  real span = B - A;
  real wb = span / std::max(12, deg_power / 13 + 4);

  auto log_integrand = [&](const real& x) {
    real d = density(x);
    if (d <= 0) return real(-1e300);
    real v = log(d) + deg_power * log(abs(x) + 1);
    if (factor_log) v += factor_log(x);
    return v;
  };

  // Precision floor from a uniform scan; pad live-interval boundaries into
  // the breakpoint set so dead-zone strides stop at them.
  const int scan_n = 512;
  std::vector<real> sx(scan_n + 1), sv(scan_n + 1);
  real vmax = real(-1e300);
  for (int i = 0; i <= scan_n; ++i) {
    sx[i] = A + span * i / scan_n;
    sv[i] = log_integrand(sx[i]);
    if (sv[i] > vmax) vmax = sv[i];
  }
  const real floor_log = vmax - (real(precision_digits()) + 25) * log(real(10));
  std::vector<real> kinks = std::move(extra_kinks);
  for (int i = 0; i < scan_n; ++i)
    if ((sv[i] > floor_log) != (sv[i + 1] > floor_log)) {
      kinks.push_back(sx[i]);
      kinks.push_back(sx[i + 1]);
    }

  auto width = [&](const real& x) {
    if (log_integrand(x) <= floor_log) return wb;
    real h = std::max(real(span * real(1e-6)), real(wb / 64));
    real d0 = density(x), d1 = density(x + h);
    real slope(0);
    if (factor_rate) slope = abs(factor_rate(x));
    if (d0 > 0 && d1 > 0) slope += abs(log(d1) - log(d0)) / h;
    real w_decay = 40 / (1 + slope);
    return w_decay < wb ? w_decay : wb;
  };

  std::vector<real> graded;
  if (s_->kind == measure_kind::freud) graded.push_back(real(0));
  for (const auto& k : s_->density_kinks) graded.push_back(k);
  auto [lo, lo_inf] = support_lo();
  auto [hi, hi_inf] = support_hi();
  if (!lo_inf) graded.push_back(lo);
  if (!hi_inf) graded.push_back(hi);
  for (const auto& k : graded) kinks.push_back(k);
  auto bp = detail::greedy_breakpoints(A, B, width, kinks);
  for (const auto& k : graded) detail::grade_into(bp, k, detail::grade_levels());
  return detail::with_density(composite_legendre(bp, detail::panel_points()),
                              [this](const real& x) { return density(x); });
}

inline const tail_class& measure::tails() const {
  if (s_->tails_cache) return *s_->tails_cache;
  // Tail constants are envelope certificates, not spectral quantities; thirty
  // digits is far beyond what any consumer of K can use, and the numeric MGF
  // integrals get much cheaper.
  precision_guard guard(30);
  auto tc = std::make_unique<tail_class>();
  const real& p = s_->p1;
  const real e2 = exp(real(2));

  // Bounded support radius.
  {
    auto [lo, lo_inf] = support_lo();
    auto [hi, hi_inf] = support_hi();
    if (!lo_inf && !hi_inf) {
      tc->has_bounded = true;
      tc->radius = std::max(real(abs(lo)), real(abs(hi)));
    }
  }

  // Strict exponential-type envelopes with minimal constants.
  switch (s_->kind) {
    case measure_kind::gaussian:
      tc->has_strict = true;
      tc->r = 2;
      tc->K = p;
      tc->A = 1;
      tc->strict_note = "exact: ||e^{xi X}|| = exp(sigma^2 xi^2)";
      break;
    case measure_kind::uniform:
      tc->has_strict = true;
      tc->r = 1;
      tc->K = p;
      tc->A = 1;
      tc->strict_note = "support radius: ||e^{xi X}|| <= e^{R |xi|}";
      break;
    case measure_kind::freud:
      if (p > 1) {
        tc->has_strict = true;
        tc->r = p / (p - 1);
        tc->A = const_e();
        // Laplace-method asymptote, then bisect the smallest K with
        // sup_xi [log ||e^{xi X}|| - (K xi)^r] <= 1 on a log grid.
        real r_ = tc->r;
        real k_asym = 2 * pow((1 - 1 / p) / 2, 1 / r_) * pow(p, -1 / p);
        real xi_star = 3 / k_asym;
        std::vector<real> grid, logm;
        for (int i = 0; i <= 48; ++i) {
          grid.push_back(xi_star * pow(real(400), real(i) / 48 - real(1) / 2));
          logm.push_back(log(mgf_norm(grid.back())));
        }
        auto ok = [&](const real& K) {
          for (std::size_t i = 0; i < grid.size(); ++i)
            if (logm[i] - pow(K * grid[i], r_) > 1) return false;
          return true;
        };
        real lo = k_asym / 2, hi = 4 * k_asym;
        require(ok(hi), "tails: strict envelope search failed");
        for (int it = 0; it < 60; ++it) {
          real mid = (lo + hi) / 2;
          (ok(mid) ? hi : lo) = mid;
        }
        tc->K = hi;
        tc->strict_note = "A = e fixed, K minimal on a 49-point log grid of xi";
      }
      break;
    case measure_kind::custom:
    case measure_kind::discrete:
      if (tc->has_bounded) {
        tc->has_strict = true;
        tc->r = 1;
        tc->K = tc->radius;
        tc->A = 1;
        tc->strict_note = "support radius";
      }
      break;
    default:
      break;
  }

  // Subexponential constant: smallest K with E e^{2|X|/K} <= e^2, by
  // bisection on the monotone map K -> E e^{2|X|/K}.
  {
    bool feasible = true;
    if (s_->kind == measure_kind::freud && p < 1) feasible = false;
    if (feasible) {
      real K_hi = real(1) / 8;
      bool found = false;
      for (int it = 0; it < 80; ++it) {
        bool finite_ok = false;
        try {
          if (abs_mgf(2 / K_hi) <= e2) finite_ok = true;
        } catch (const domain_error&) {
        } catch (const quadrature_insufficient&) {
        }
        if (finite_ok) {
          found = true;
          break;
        }
        K_hi *= 2;
      }
      if (found) {
        real lo = K_hi / 2, hi = K_hi;
        auto fits = [&](const real& K) {
          try {
            return abs_mgf(2 / K) <= e2;
          } catch (const domain_error&) {
            return false;
          } catch (const quadrature_insufficient&) {
            return false;
          }
        };
        while (fits(lo)) {
          hi = lo;
          lo /= 2;
        }
        for (int it = 0; it < 80; ++it) {
          real mid = (lo + hi) / 2;
          (fits(mid) ? hi : lo) = mid;
        }
        tc->has_subexp = true;
        tc->K_sub = hi;
        tc->subexp_note = "bisection on E e^{2|X|/K} = e^2";
      }
    }
  }

  s_->tails_cache = std::move(tc);
  return *s_->tails_cache;
}

}  // namespace dcpoly
