#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include <dcpoly/bounds.hpp>
#include <dcpoly/carleman.hpp>
#include <dcpoly/errors.hpp>
#include <dcpoly/real.hpp>
#include <dcpoly/rng.hpp>

#include "fit_util.hpp"

using namespace dcpoly;

namespace {

real rel_err(const real& got, const real& want) {
  if (want == 0) return abs(got);
  return abs(got - want) / abs(want);
}

// Independent oracle for the finite-order envelope: the envelope arises as
// the minimum over a rescaling parameter lambda >= 1 of
// exp(-D log lambda + (lambda K xi)^r); scan a fine lambda grid and refine
// once around the best point.
real finite_order_oracle(std::int64_t D, const real& r, const real& K, const real& xi) {
  auto value = [&](const real& lam) -> real {
    return exp(-real(D) * log(lam) + pow(lam * K * xi, r));
  };
  real best = value(real(1)), best_lam = real(1);
  for (int i = 0; i <= 99000; ++i) {
    real lam = 1 + real(i) / 1000;
    real v = value(lam);
    if (v < best) {
      best = v;
      best_lam = lam;
    }
  }
  for (int i = -1000; i <= 1000; ++i) {
    real lam = best_lam + real(i) / real(1000000);
    if (lam < 1) continue;
    real v = value(lam);
    if (v < best) best = v;
  }
  return best;
}

// Step-profile spectra of a band-limited target: all mass inside [-cut, cut].
std::function<real(const real&)> step_tail(double cut) {
  return [cut](const real& omega) -> real {
    return omega >= real(cut) ? real(0) : real(6) * const_pi();
  };
}

std::function<real(const real&)> const_band(double mass_over_2pi) {
  return [mass_over_2pi](const real& omega) -> real {
    (void)omega;
    return 2 * const_pi() * real(mass_over_2pi);
  };
}

}  // namespace

TEST(Bounds, StripBoundValues) {
  // An order-D zero pins the value at the origin.
  EXPECT_EQ(to_double(strip_bound(3, real(0))), 0.0);
  // The envelope saturates toward 1 but never reaches it.
  real far = strip_bound(1, real(30));
  EXPECT_LT(far, real(1));
  EXPECT_GT(far, 1 - real("1e-25"));
  // Sharpness: the envelope is attained by direct evaluation of tanh(x)^D.
  for (int i = 1; i <= 10; ++i) {
    real x = real(3 * i) / 10;
    EXPECT_LT(rel_err(strip_bound(7, x), pow(tanh(x), 7)), real("1e-70")) << i;
  }
}

TEST(Bounds, StripBoundMonotone) {
  // Nondecreasing in the frequency, nonincreasing in the degree.
  real prev(0);
  for (int i = 1; i <= 40; ++i) {
    real cur = strip_bound(5, real(i) / 10);
    EXPECT_GE(cur, prev) << i;
    prev = cur;
  }
  for (int D = 1; D <= 40; ++D) {
    EXPECT_LE(strip_bound(D + 1, real("0.8")), strip_bound(D, real("0.8"))) << D;
  }
}

TEST(Bounds, FiniteOrderOracle) {
  // Frozen value of e^10 / 10^10, the closed envelope at r=1, K=1, D=10,
  // xi=1, cross-checked against the lambda-scan oracle.
  const real frozen("2.20264657948067165169579006452842443663535126185567810742354e-6");
  real closed = finite_order_bound(10, real(1), real(1), real(1));
  EXPECT_LT(rel_err(closed, frozen), real("1e-55"));
  real scanned = finite_order_oracle(10, real(1), real(1), real(1));
  EXPECT_LT(rel_err(scanned, closed), real("1e-8"));

  // A second point with fractional order: r=2, K=1/2, D=12, xi=1.
  real closed2 = finite_order_bound(12, real(2), real(1) / 2, real(1));
  real scanned2 = finite_order_oracle(12, real(2), real(1) / 2, real(1));
  EXPECT_LT(rel_err(scanned2, closed2), real("1e-8"));

  // The zero at the origin has full order.
  EXPECT_EQ(to_double(finite_order_bound(5, real(2), real(1), real(0))), 0.0);
}

TEST(Bounds, FiniteOrderBoundaryAndErrors) {
  // Just above the feasibility floor with small K*xi the envelope is already
  // below 1; these points keep the ceiling at least a factor e above the
  // floor, which is what the plug-in bound needs.
  struct pt {
    double r, K, xi;
  };
  for (pt p : {pt{1, 1, 0.5}, pt{2, 1, 0.5}, pt{1.5, 0.7, 0.8}}) {
    real floor_val = real(p.r) * pow(real(p.K) * real(p.xi), real(p.r));
    std::int64_t D = ceil_snapped(floor_val) + 1;
    real v = finite_order_bound(D, real(p.r), real(p.K), real(p.xi));
    EXPECT_LE(v, real(1)) << p.r << " " << p.K << " " << p.xi;
    EXPECT_GT(v, real(0));
  }
  // At or below the floor the bound is undefined.
  EXPECT_THROW(finite_order_bound(10, real(1), real(1), real(12)), degree_too_small);
  EXPECT_THROW(finite_order_bound(10, real(1), real(1), real(10)), degree_too_small);
}

TEST(Bounds, FiniteOrderMonotone) {
  // Strictly decreasing in D on the admissible range at fixed xi.
  real prev(0);
  bool first = true;
  for (std::int64_t D = 5; D <= 60; ++D) {
    real v = finite_order_bound(D, real(2), real(1), real("0.9"));
    if (!first) EXPECT_LT(v, prev) << D;
    prev = v;
    first = false;
  }
  // Nondecreasing in xi at fixed admissible D.
  prev = real(0);
  for (int i = 0; i <= 20; ++i) {
    real xi = real(i) / 10;
    real v = finite_order_bound(40, real(2), real(1), xi);
    EXPECT_GE(v, prev) << i;
    prev = v;
  }
}

TEST(Bounds, PlanStrictBandLimited) {
  // Band-limited target: all spectral mass inside [-1, 1]; the cutoff
  // search must settle exactly on the step location, leaving zero tail.
  auto band = const_band(1.0);
  auto tail = step_tail(1.0);
  real K = 1 / sqrt(real(2));
  std::vector<double> inv_log_eps, ratio;
  std::int64_t prev_D = 0;
  for (int p = 2; p <= 12; ++p) {
    real eps = pow(real(10), -p);
    degree_plan plan = plan_degree_strict(eps, real(1), K, real(2), band, tail);
    EXPECT_EQ(to_double(plan.omega), 1.0) << p;
    EXPECT_EQ(to_double(plan.split.tail_term), 0.0) << p;
    EXPECT_LE(plan.split.band_term + plan.split.tail_term, eps) << p;
    EXPECT_GE(plan.D, prev_D) << p;
    // Minimality: one degree lower (when admissible) breaks the band budget.
    std::int64_t floor_D = ceil_snapped(real(2) * pow(K * plan.omega, real(2))) + 1;
    EXPECT_GE(plan.D, floor_D) << p;
    if (plan.D > floor_D) {
      real below = plan.inputs.band_mass_at_omega / (2 * const_pi()) *
                   finite_order_bound(plan.D - 1, real(2), K, plan.omega);
      EXPECT_GT(below, eps - plan.split.tail_term) << p;
    }
    prev_D = plan.D;
    double le = p * std::log(10.0);
    ratio.push_back(static_cast<double>(plan.D) * std::log(le) / le);
    inv_log_eps.push_back(le);
  }
  // Growth regime log(1/eps)/loglog(1/eps): the normalized ratio stays in a
  // narrow band across ten orders of magnitude in eps.
  double lo = ratio[0], hi = ratio[0];
  for (double v : ratio) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_LT(hi / lo, 2.5);
}

TEST(Bounds, PlanStrictHugeEps) {
  // With a budget beyond both masses, the planner returns the constraint
  // floor at its smallest cutoff.
  auto band = const_band(1.0);
  auto tail = step_tail(1.0);
  degree_plan plan = plan_degree_strict(real(100), real(1), real(1), real(2), band, tail);
  EXPECT_LT(plan.omega, real("0.001"));
  std::int64_t floor_D = ceil_snapped(real(2) * pow(plan.omega, real(2))) + 1;
  EXPECT_EQ(plan.D, floor_D);
  EXPECT_LE(plan.split.band_term + plan.split.tail_term, real(100));
}

TEST(Bounds, PlanStrictSigmoidTrend) {
  // Sigmoid-type spectrum: tail mass decaying like 16 e^{-Omega} forces the
  // cutoff to grow like log(1/eps), and the planned degree like log(1/eps)^r.
  auto band = const_band(1.0);
  auto tail = [](const real& omega) -> real { return 2 * const_pi() * 16 * exp(-omega); };
  std::vector<double> x, y;
  for (int p = 3; p <= 12; ++p) {
    real eps = pow(real(10), -p);
    degree_plan plan = plan_degree_strict(eps, real(1), 1 / sqrt(real(2)), real(2), band, tail);
    EXPECT_LE(plan.split.band_term + plan.split.tail_term, eps) << p;
    x.push_back(std::log(std::log(std::pow(10.0, p))));
    y.push_back(std::log(static_cast<double>(plan.D)));
  }
  line_fit f = fit_line(x, y);
  EXPECT_GT(f.slope, 1.5);
  EXPECT_LT(f.slope, 2.5);
  EXPECT_GT(f.r2, 0.9);
}

TEST(Bounds, PlanSubexpExactInversion) {
  // K = 4/pi puts the strip map's argument at exactly Omega; with band mass
  // 2 pi / e the prefactor collapses to 1, and eps = tanh(1)^20 at a zero
  // tail must invert to exactly D = 20.
  auto band = [](const real& omega) -> real {
    (void)omega;
    return 2 * const_pi() / const_e();
  };
  auto tail = step_tail(1.0);
  real eps = pow(tanh(real(1)), 20);
  degree_plan plan = plan_degree_subexp(eps, 4 / const_pi(), band, tail);
  EXPECT_EQ(plan.D, 20);
  EXPECT_EQ(to_double(plan.omega), 1.0);
  EXPECT_EQ(to_double(plan.split.tail_term), 0.0);
  EXPECT_LT(rel_err(plan.split.band_term, eps), real("1e-60"));
  EXPECT_LE(plan.split.band_term + plan.split.tail_term, eps * (1 + real("1e-60")));
}

TEST(Bounds, PlanSubexpDegreeNotOmega) {
  // Once the tail is exhausted the cutoff freezes and only the degree can
  // buy accuracy; tanh < 1 strictly, so the band term keeps decaying in D.
  auto band = const_band(1.0);
  auto tail = step_tail(1.0);
  std::int64_t prev_D = 0;
  for (int p = 2; p <= 10; p += 4) {
    real eps = pow(real(10), -p);
    degree_plan plan = plan_degree_subexp(eps, real(1), band, tail);
    EXPECT_EQ(to_double(plan.omega), 1.0) << p;
    EXPECT_GT(plan.D, prev_D) << p;
    EXPECT_LE(plan.split.band_term + plan.split.tail_term, eps) << p;
    prev_D = plan.D;
  }
}

TEST(Bounds, PlanSubexpSlowTailTrend) {
  // A 1/Omega tail (the rough-activation profile) forces the cutoff to scale
  // like 1/eps, and the degree to explode like exp(O(1/eps)): log D against
  // 1/eps must be close to linear.
  auto band = const_band(1.0);
  auto tail = [](const real& omega) -> real { return 2 * const_pi() * 4 / omega; };
  std::vector<double> x, y;
  for (double eps_d : {8.0, 4.0, 2.0, 1.0}) {
    real eps(eps_d);
    degree_plan plan = plan_degree_subexp(eps, real("2.32"), band, tail);
    EXPECT_LE(plan.split.band_term + plan.split.tail_term, eps) << eps_d;
    x.push_back(1.0 / eps_d);
    y.push_back(std::log(static_cast<double>(plan.D)));
  }
  line_fit f = fit_line(x, y);
  EXPECT_GT(f.slope, 0.0);
  EXPECT_GT(f.r2, 0.9);
  // The last plan is astronomically deep; it must still be a sound int64.
  EXPECT_GT(std::llround(std::exp(y.back())), 1000000LL);
}

TEST(Bounds, PlanMinimalityRandom) {
  rng gen(20240817);
  for (int trial = 0; trial < 20; ++trial) {
    real eps = pow(real(10), -real(1) - 6 * real(gen.uniform()));
    real A = real(gen.uniform(0.5, 3.0));
    real K = real(gen.uniform(0.3, 1.5));
    real r = real(gen.uniform(1.0, 3.0));
    double bm = gen.uniform(0.5, 4.0);
    double decay = gen.uniform(0.5, 2.0);
    auto band = const_band(bm);
    auto tail = [decay](const real& omega) -> real {
      return 2 * const_pi() * 8 * exp(-real(decay) * omega);
    };
    if (trial % 2 == 0) {
      degree_plan plan = plan_degree_strict(eps, A, K, r, band, tail);
      EXPECT_LE(plan.split.band_term + plan.split.tail_term, eps) << trial;
      std::int64_t floor_D = ceil_snapped(r * pow(K * plan.omega, r)) + 1;
      if (plan.D > floor_D) {
        real below = A * plan.inputs.band_mass_at_omega / (2 * const_pi()) *
                     finite_order_bound(plan.D - 1, r, K, plan.omega);
        EXPECT_GT(below, eps - plan.split.tail_term) << trial;
      }
    } else {
      degree_plan plan = plan_degree_subexp(eps, K, band, tail);
      EXPECT_LE(plan.split.band_term + plan.split.tail_term, eps) << trial;
      if (plan.D > 1) {
        real below = const_e() * plan.inputs.band_mass_at_omega / (2 * const_pi()) *
                     strip_bound(plan.D - 1, K * const_pi() * plan.omega / 4);
        EXPECT_GT(below, eps - plan.split.tail_term) << trial;
      }
    }
  }
}

TEST(Bounds, SmoothedPlannerFormulas) {
  // Low-order branch: the degree formula is the r/2 power of the smoothing
  // budget; recompute it directly.
  tail_class strict2;
  strict2.has_strict = true;
  strict2.r = real(2);
  strict2.K = real(1);
  real eps("1e-3"), sigma("0.5");
  int k = 2;
  degree_plan plan = plan_degree_smoothed(eps, sigma, k, strict2);
  {
    real inner = log(1 / eps) + k * log(1 / sigma);
    std::int64_t want = std::max<std::int64_t>(1, ceil_snapped(pow(inner / (sigma * sigma), real(1))));
    EXPECT_EQ(plan.D, want);
    EXPECT_EQ(plan.regime, plan_regime::strictly_subexp);
    EXPECT_GT(plan.truncation_radius, real(0));
    EXPECT_GT(plan.omega, real(0));
  }

  // High-order branch switches the interior log to k/sigma.
  tail_class strict3 = strict2;
  strict3.r = real(3);
  degree_plan plan3 = plan_degree_smoothed(eps, sigma, k, strict3);
  {
    real inner = log(1 / eps) + k * log(k / sigma);
    std::int64_t want =
        std::max<std::int64_t>(1, ceil_snapped(pow(inner / (sigma * sigma), real(3) / 2)));
    EXPECT_EQ(plan3.D, want);
  }

  // Heavy-tail branch: degree is the 1/sigma power of eps^{-1} (k/sigma)^k.
  tail_class sub;
  sub.has_subexp = true;
  sub.K_sub = real(2);
  degree_plan plan_sub = plan_degree_smoothed(eps, sigma, k, sub);
  {
    real core = (1 / eps) * pow(real(k) / sigma, real(k));
    std::int64_t want = std::max<std::int64_t>(1, ceil_snapped(pow(core, 1 / sigma)));
    EXPECT_EQ(plan_sub.D, want);
    EXPECT_EQ(plan_sub.regime, plan_regime::subexp);
  }

  // Bounded support maps to the low-order branch with the radius as scale.
  tail_class bounded;
  bounded.has_bounded = true;
  bounded.radius = real(1);
  degree_plan plan_b = plan_degree_smoothed(eps, sigma, k, bounded);
  EXPECT_EQ(plan_b.regime, plan_regime::bounded);
  EXPECT_GE(plan_b.D, 1);
}

TEST(Bounds, SmoothedMonotoneInSigma) {
  tail_class strict2;
  strict2.has_strict = true;
  strict2.r = real(2);
  strict2.K = real(1);
  std::int64_t prev = 0;
  bool first = true;
  for (double s : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    degree_plan plan = plan_degree_smoothed(real("1e-3"), real(s), 2, strict2);
    if (!first) EXPECT_LE(plan.D, prev) << s;
    prev = plan.D;
    first = false;
  }
}

TEST(Bounds, CarlemanResidualComposition) {
  // The residual evaluator is an exact composition of the pointwise bound
  // with the band and tail masses.
  carleman_sequence s = carleman_sequence::subgaussian();
  auto band = const_band(1.0);
  auto tail = [](const real& omega) -> real { return 2 * const_pi() * exp(-omega); };
  int D = 12;
  real omega(1);
  real Y = 1 / s.a(D + 1);
  carleman_residual res = carleman_residual_bound(s, real(1), real(1), D, omega, band, tail, Y,
                                                  {sqrt(real(D))});
  real manual = band(omega) / (2 * const_pi()) * res.pointwise.value +
                tail(omega) / (2 * const_pi());
  EXPECT_LT(rel_err(res.value, manual), real("1e-60"));
  EXPECT_EQ(res.pointwise.N, D);
}

TEST(Bounds, ComplexBeatsRealVariable) {
  // Both routes bound the same normalized spectral function at the same
  // point xi = 0.1: the strip envelope e tanh(K pi xi / 4)^D against the
  // derivative-counting envelope 8 B K xi / (a_1 + ... + a_D). The analytic
  // route must win for every D and the gap must widen like exp(c sqrt(D))
  // at least.
  carleman_sequence s = carleman_sequence::subgaussian();
  const real x("0.1"), B(1), K(1);
  std::vector<double> sqrtD, logratio;
  for (int D = 10; D <= 100; D += 10) {
    real complex_side = const_e() * strip_bound(D, K * const_pi() * x / 4);
    real real_side = real_variable_bound(s, B, K, D, x);
    EXPECT_LT(complex_side, real_side) << D;
    sqrtD.push_back(std::sqrt(static_cast<double>(D)));
    logratio.push_back(to_double(log(real_side / complex_side)));
  }
  line_fit f = fit_line(sqrtD, logratio);
  EXPECT_GT(f.slope, 0.0);
  EXPECT_GT(f.r2, 0.9);
}

TEST(Bounds, GeneralRouteOvertakesRealVariable) {
  // The log-integral route carries constant-factor overhead, so it needs
  // depth before it wins; from D = 40 on it must beat the elementary route
  // at x = 0.1 with a growing margin.
  carleman_sequence s = carleman_sequence::subgaussian();
  const real x("0.1");
  real prev_margin(0);
  for (int D = 40; D <= 100; D += 20) {
    real Y = 1 / s.a(D + 1);
    real complex_side = carleman_bound(s, real(1), real(1), D, x, Y, {sqrt(real(D))}).value;
    real real_side = real_variable_bound(s, real(1), real(1), D, x);
    EXPECT_LT(complex_side, real_side) << D;
    real margin = log(real_side / complex_side);
    EXPECT_GT(margin, prev_margin) << D;
    prev_margin = margin;
  }
}
