#pragma once

// Spectral-residual envelopes and degree planners. The envelopes bound how
// much a degree-D orthogonal-projection residual can weigh against a band
// of frequencies; the planners invert them, picking a frequency cutoff and
// the smallest degree whose certified error fits a caller budget.

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "dcpoly/carleman.hpp"
#include "dcpoly/errors.hpp"
#include "dcpoly/measures.hpp"
#include "dcpoly/real.hpp"

namespace dcpoly {

// Which decay mechanism a plan's certificate rests on.
enum class plan_regime { strictly_subexp, subexp, carleman_general, bounded };

inline const char* to_string(plan_regime g) {
  switch (g) {
    case plan_regime::strictly_subexp: return "strictly_subexp";
    case plan_regime::subexp: return "subexp";
    case plan_regime::carleman_general: return "carleman_general";
    case plan_regime::bounded: return "bounded";
  }
  return "unknown";
}

// How the error budget splits between the in-band term and the spectral
// tail beyond the cutoff.
struct eps_split {
  real band_term{0};
  real tail_term{0};
};

// Echo of the inputs a plan was built from, so a certificate can be
// re-evaluated without re-supplying them.
struct plan_inputs {
  real eps{0};
  real A{0};
  real K{0};
  real r{0};
  real band_mass_at_omega{0};
};

struct degree_plan {
  std::int64_t D = 1;
  real omega{0};
  eps_split split;
  plan_regime regime = plan_regime::strictly_subexp;
  plan_inputs inputs;
  // Spatial truncation radius for smoothed-target plans; zero otherwise.
  real truncation_radius{0};
};

// Ceiling with a tiny downward snap so a value that is an integer up to
// accumulated rounding noise does not get bumped a full step.
inline std::int64_t ceil_snapped(const real& v) {
  real shifted = ceil(v - real("1e-40") * (1 + abs(v)));
  require(shifted < real("4e15"),
          "ceil_snapped: planned degree exceeds the supported integer range");
  return std::llround(to_double(shifted));
}

// Envelope for the normalized spectral function of a degree-D residual on
// the line from an exponential-moment bound: tanh(|xi|)^D after rescaling
// the strip to unit half-width. Evaluated in log space so very deep degrees
// stay representable. Sharp: x^D on the unit disk pushes forward to meet it.
inline real strip_bound(std::int64_t D, const real& xi_abs) {
  require(D >= 1, "strip_bound: degree must be at least 1");
  require(xi_abs >= 0, "strip_bound: the frequency argument is a magnitude");
  if (xi_abs == 0) return real(0);
  return exp(real(D) * log(tanh(xi_abs)));
}

// Envelope from a finite-order moment bound E|X|^n <= A (K n^{1/r})^n:
// (e r / D)^{D/r} (K |xi|)^D, valid once D clears the feasibility floor
// r (K |xi|)^r. Below the floor the minimized exponent turns the wrong way,
// so that is rejected rather than returned.
inline real finite_order_bound(std::int64_t D, const real& r, const real& K,
                               const real& xi_abs) {
  require(D >= 1, "finite_order_bound: degree must be at least 1");
  require(r >= 1, "finite_order_bound: moment growth order must be >= 1");
  require(K > 0, "finite_order_bound: moment scale must be positive");
  require(xi_abs >= 0, "finite_order_bound: the frequency argument is a magnitude");
  if (xi_abs == 0) return real(0);
  real Dr(static_cast<long long>(D));
  if (!(Dr > r * pow(K * xi_abs, r)))
    throw degree_too_small(
        "finite_order_bound: degree must exceed r (K |xi|)^r");
  return exp(Dr / r * (1 + log(r) - log(Dr)) + Dr * log(K * xi_abs));
}

namespace detail {

struct omega_pick {
  real omega;
  real tail_term;
};

// Smallest cutoff on a doubling grid whose tail mass fits the budget, then
// bisection toward the true threshold. The passing endpoint is kept exactly,
// so a tail that vanishes at a grid point certifies that point itself.
inline omega_pick select_omega(const std::function<real(const real&)>& tail_mass,
                               const real& budget) {
  const real two_pi = 2 * const_pi();
  real omega = real(1) / 1024;
  real t = tail_mass(omega) / two_pi;
  if (t > budget) {
    real lo = omega;
    bool found = false;
    for (int j = 0; j < 75; ++j) {
      omega *= 2;
      t = tail_mass(omega) / two_pi;
      if (t <= budget) {
        found = true;
        break;
      }
      lo = omega;
    }
    if (!found)
      throw tail_never_small(
          "cutoff search: the spectral tail never fits its budget on the grid");
    real hi = omega;
    for (int it = 0; it < 200; ++it) {
      if (hi - lo < real("1e-30") * hi) break;
      real mid = (lo + hi) / 2;
      if (tail_mass(mid) / two_pi <= budget)
        hi = mid;
      else
        lo = mid;
    }
    omega = hi;
    t = tail_mass(omega) / two_pi;
  }
  return {omega, t};
}

}  // namespace detail

// Plan the cutoff and degree for a target whose spectral masses are supplied
// by the caller, under a finite-order moment envelope with growth order r.
// The tail gets at most half the budget; the band keeps whatever the chosen
// cutoff leaves over, and the degree is the smallest admissible one whose
// band term fits.
inline degree_plan plan_degree_strict(
    const real& eps, const real& A, const real& K, const real& r,
    const std::function<real(const real&)>& band_mass,
    const std::function<real(const real&)>& tail_mass) {
  require(eps > 0, "plan_degree_strict: the error budget must be positive");
  require(A > 0 && K > 0, "plan_degree_strict: moment constants must be positive");
  require(r >= 1, "plan_degree_strict: moment growth order must be >= 1");
  detail::omega_pick pick = detail::select_omega(tail_mass, eps / 2);
  const real two_pi = 2 * const_pi();
  real bm = band_mass(pick.omega);
  real budget = eps - pick.tail_term;
  auto band_at = [&](std::int64_t D) -> real {
    return real(A * bm / two_pi * finite_order_bound(D, r, K, pick.omega));
  };
  std::int64_t D = ceil_snapped(r * pow(K * pick.omega, r)) + 1;
  if (band_at(D) > budget) {
    // The band term decreases strictly in D above the floor, so double out
    // of the infeasible stretch and binary-search the threshold.
    std::int64_t lo = D;
    std::int64_t hi = D;
    for (;;) {
      if (hi > (std::int64_t{1} << 55))
        throw numeric_error("plan_degree_strict: degree search diverged");
      hi *= 2;
      if (band_at(hi) <= budget) break;
      lo = hi;
    }
    while (hi - lo > 1) {
      std::int64_t mid = lo + (hi - lo) / 2;
      if (band_at(mid) <= budget)
        hi = mid;
      else
        lo = mid;
    }
    D = hi;
  }
  degree_plan plan;
  plan.D = D;
  plan.omega = pick.omega;
  plan.split.band_term = band_at(D);
  plan.split.tail_term = pick.tail_term;
  plan.regime = plan_regime::strictly_subexp;
  plan.inputs.eps = eps;
  plan.inputs.A = A;
  plan.inputs.K = K;
  plan.inputs.r = r;
  plan.inputs.band_mass_at_omega = bm;
  return plan;
}

// Same planning scheme under a bare exponential-moment envelope: the band
// term is e tanh(K pi Omega / 4)^D, whose inversion for D is a single log
// ratio. The echoed constants record the envelope actually used.
inline degree_plan plan_degree_subexp(
    const real& eps, const real& K,
    const std::function<real(const real&)>& band_mass,
    const std::function<real(const real&)>& tail_mass) {
  require(eps > 0, "plan_degree_subexp: the error budget must be positive");
  require(K > 0, "plan_degree_subexp: the moment scale must be positive");
  detail::omega_pick pick = detail::select_omega(tail_mass, eps / 2);
  const real two_pi = 2 * const_pi();
  real bm = band_mass(pick.omega);
  real budget = eps - pick.tail_term;
  real xi = K * const_pi() * pick.omega / 4;
  real prefactor = const_e() * bm / two_pi;
  std::int64_t D = 1;
  if (prefactor > budget && xi > 0) {
    real ratio = log(budget / prefactor) / log(tanh(xi));
    std::int64_t wanted = ceil_snapped(ratio);
    if (wanted > 1) D = wanted;
  }
  degree_plan plan;
  plan.D = D;
  plan.omega = pick.omega;
  plan.split.band_term = prefactor * strip_bound(D, xi);
  plan.split.tail_term = pick.tail_term;
  plan.regime = plan_regime::subexp;
  plan.inputs.eps = eps;
  plan.inputs.A = const_e();
  plan.inputs.K = K;
  plan.inputs.r = 0;
  plan.inputs.band_mass_at_omega = bm;
  return plan;
}

// Knobs for the smoothed-target planner. Each multiplier scales one planned
// quantity and defaults to 1, so the returned values are the bare formulas
// until a caller tightens or relaxes them.
struct smoothed_config {
  real radius_mult{1};
  real omega_mult{1};
  real degree_mult{1};
  real exponent_mult{1};
};

// Plan spatial truncation radius, cutoff, and degree for learning a
// sigma-smoothed k-variate target under the measure's tail class. The
// branches differ in how fast directional moments can grow, which sets the
// concentration exponent available for the radius and how hard the degree
// must work.
inline degree_plan plan_degree_smoothed(const real& eps, const real& sigma,
                                        int k_intrinsic, const tail_class& tail,
                                        smoothed_config cfg = {}) {
  require(eps > 0, "plan_degree_smoothed: the error budget must be positive");
  require(sigma > 0, "plan_degree_smoothed: the smoothing width must be positive");
  require(k_intrinsic >= 1, "plan_degree_smoothed: need at least one active direction");
  const real k(k_intrinsic);
  const real log5 = log(real(5));
  auto clamp0 = [](const real& v) { return v > 0 ? v : real(0); };
  degree_plan plan;
  plan.inputs.eps = eps;
  if (tail.has_strict && tail.r > 1) {
    const real r = tail.r;
    const real K = tail.K;
    // Chernoff radius for a tail decaying like exp(-(t/b)^{c'}), with
    // b = K r (r-1)^{1/r-1} and c' = min(r/(r-1), 2).
    real b = K * r * pow(r - 1, 1 / r - 1);
    real cp = r > 2 ? r / (r - 1) : real(2);
    plan.truncation_radius =
        cfg.radius_mult * 2 * (sigma + b) * pow(2 * log(4 / eps) + k * log5, 1 / cp);
    real inner = r > 2 ? clamp0(log(1 / eps) + k * log(k / sigma))
                       : clamp0(log(1 / eps) + k * log(1 / sigma));
    plan.omega = cfg.omega_mult * sqrt(inner) / sigma;
    plan.D = std::max<std::int64_t>(
        1, ceil_snapped(cfg.degree_mult * pow(inner / (sigma * sigma), r / 2)));
    plan.regime = plan_regime::strictly_subexp;
    plan.inputs.A = tail.A;
    plan.inputs.K = K;
    plan.inputs.r = r;
  } else if (tail.has_strict || tail.has_bounded) {
    // Growth order 1 forces bounded support, so the support radius and the
    // order-1 moment scale play the same role here.
    const real scale = tail.has_strict ? tail.K : tail.radius;
    plan.truncation_radius =
        cfg.radius_mult * 2 * (sigma + scale) * sqrt(2 * log(2 / eps) + k * log5);
    real inner = clamp0(log(1 / eps) + k * log(1 / sigma));
    plan.omega = cfg.omega_mult * sqrt(inner) / sigma;
    plan.D = std::max<std::int64_t>(
        1, ceil_snapped(cfg.degree_mult * sqrt(inner) / sigma));
    plan.regime =
        tail.has_strict ? plan_regime::strictly_subexp : plan_regime::bounded;
    plan.inputs.A = tail.has_strict ? tail.A : real(1);
    plan.inputs.K = scale;
    plan.inputs.r = 1;
  } else if (tail.has_subexp) {
    const real K = tail.K_sub;
    plan.truncation_radius =
        cfg.radius_mult * 4 * (sigma + K) * (2 * log(4 * const_e() / eps) + k * log5);
    real inner = clamp0(log(1 / eps) + k * log(k / sigma));
    plan.omega = cfg.omega_mult * sqrt(inner) / sigma;
    real core = (1 / eps) * pow(k / sigma, k);
    plan.D = std::max<std::int64_t>(
        1, ceil_snapped(cfg.degree_mult * pow(core, cfg.exponent_mult / sigma)));
    plan.regime = plan_regime::subexp;
    plan.inputs.A = real(1);
    plan.inputs.K = K;
    plan.inputs.r = 0;
  } else {
    throw domain_error(
        "plan_degree_smoothed: the measure carries no usable tail class");
  }
  // Budget allocation echoed as an even split; the smoothed certificate is
  // re-derived downstream rather than re-evaluated from these terms.
  plan.split.band_term = eps / 2;
  plan.split.tail_term = eps / 2;
  plan.inputs.band_mass_at_omega = 0;
  return plan;
}

struct carleman_residual {
  real value{0};
  real band_term{0};
  real tail_term{0};
  carleman_bound_result pointwise;
};

// Residual certificate when only a general moment-growth envelope is known:
// the pointwise bound at the band edge scales the in-band mass, and the
// spectral tail beyond the cutoff rides on top unchanged.
inline carleman_residual carleman_residual_bound(
    const carleman_sequence& s, const real& B, const real& K, int D,
    const real& omega, const std::function<real(const real&)>& band_mass,
    const std::function<real(const real&)>& tail_mass, const real& Y,
    std::vector<real> alpha_grid,
    integral_route route = integral_route::antiderivative) {
  carleman_residual res;
  res.pointwise = carleman_bound(s, B, K, D, omega, Y, std::move(alpha_grid), route);
  const real two_pi = 2 * const_pi();
  res.band_term = band_mass(omega) / two_pi * res.pointwise.value;
  res.tail_term = tail_mass(omega) / two_pi;
  res.value = res.band_term + res.tail_term;
  return res;
}

}  // namespace dcpoly
