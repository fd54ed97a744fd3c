#include <gtest/gtest.h>

#include "dcpoly/measures.hpp"
#include "dcpoly/polynomial.hpp"
#include "dcpoly/quadrature.hpp"
#include "dcpoly/rng.hpp"
#include "dcpoly/stieltjes.hpp"

using namespace dcpoly;

namespace {

real rel_err(const real& got, const real& want) {
  real denom = abs(want) > 0 ? abs(want) : real(1);
  return abs(got - want) / denom;
}

}  // namespace

TEST(Quadrature, LegendreFivePointNodes) {
  quad_rule r = gauss_rule(legendre_recurrence(5), 5);
  // Classical abscissae for n = 5 on [-1, 1].
  EXPECT_LT(abs(r.x[2]), real("1e-70"));
  EXPECT_LT(abs(r.x[3] - real("0.5384693101056830910363144207002088049672866069055599562022316270594711")),
            real("1e-68"));
  EXPECT_LT(abs(r.x[4] - real("0.9061798459386639927976268782993929651256519107625308628737622865437707")),
            real("1e-68"));
  EXPECT_LT(abs(r.w[2] - real(128) / 225), real("1e-70"));
  EXPECT_LT(abs(r.w[3] - real("0.4786286704993664680412915148356381929122955533431415399727276673338382")),
            real("1e-68"));
}

TEST(Quadrature, HermiteMomentsExact) {
  real sigma = real("1.3");
  quad_rule r = gauss_rule(hermite_recurrence(24, sigma), 24);
  for (int k = 0; k <= 24; k += 2) {
    real want = pow_int(sigma, k) * double_factorial(k - 1);
    real got = r.integrate([&](const real& x) { return pow_int(x, k); });
    EXPECT_LT(rel_err(got, want), real("1e-70")) << "k=" << k;
  }
}

TEST(Quadrature, LaguerreMomentsExact) {
  real a = real("0.7");
  quad_rule r = gauss_rule(laguerre_recurrence(20, a, real(1)), 20);
  for (int k = 0; k <= 20; ++k) {
    real want = exp(lgamma(a + 1 + k) - lgamma(a + 1));
    real got = r.integrate([&](const real& x) { return pow_int(x, k); });
    EXPECT_LT(rel_err(got, want), real("1e-68")) << "k=" << k;
  }
}

// Gauss rules integrate random degree-(2n-1) polynomials to the closed-form
// moment values; the stricter acceptance pass repeats this per measure.
TEST(Quadrature, RandomPolynomialExactness) {
  rng g(20240817);
  std::vector<measure> ms = {measure::gaussian(real(1)), measure::laplace(real(1)),
                             measure::uniform(real(2)), measure::one_sided_exp(real("0.5"))};
  for (const auto& mu : ms) {
    for (int trial = 0; trial < 5; ++trial) {
      int n = 8 + static_cast<int>(g.raw() % 12);
      quad_rule r = mu.gauss(n);
      int deg = 2 * n - 1;
      std::vector<real> coef(deg + 1);
      for (auto& c : coef) c = real(g.uniform(-1.0, 1.0));
      real want(0);
      for (int k = 0; k <= deg; ++k) want += coef[k] * mu.moment(k);
      polynomial<real> poly(coef);
      real got = r.integrate([&](const real& x) { return poly(x); });
      EXPECT_LT(abs(got - want), real("1e-55") * (1 + abs(want))) << mu.name() << " n=" << n;
    }
  }
}

TEST(Quadrature, SmoothPanelIntegrator) {
  real got = integrate_smooth([](const real& x) { return exp(x); }, real(0), real(1),
                              real("1e-60"));
  EXPECT_LT(rel_err(got, const_e() - 1), real("1e-58"));
}

TEST(Quadrature, GradedCompositeCoversKink) {
  // integral of |x| against N(0,1): sqrt(2/pi).
  measure mu = measure::gaussian(real(1));
  quad_rule aux = mu.aux_rule(16, {real(0)});
  real got = aux.integrate([](const real& x) { return abs(x); });
  real want = sqrt(2 / const_pi());
  EXPECT_LT(rel_err(got, want), real("1e-55"));
}

TEST(Stieltjes, RecoversHermiteRecurrence) {
  measure mu = measure::gaussian(real(1));
  quad_rule r = mu.gauss(40);
  recurrence rec = stieltjes_recurrence(r, 30);
  for (int k = 1; k <= 30; ++k) {
    EXPECT_LT(abs(rec.alpha[k - 1]), real("1e-60"));
    EXPECT_LT(rel_err(rec.beta[k], real(k)), real("1e-60")) << k;
  }
}

TEST(Stieltjes, MomentRouteMatchesClassicalRecurrence) {
  // Dual construction: the exponentially ill-conditioned moment route at
  // elevated precision must agree with the closed-form recurrence.
  std::vector<real> mom(32);
  for (int k = 0; k < 32; ++k) mom[k] = (k % 2) ? real(0) : double_factorial(k - 1);
  recurrence via_moments;
  {
    precision_guard guard(4 * precision_digits());
    via_moments = recurrence_from_moments(mom);
  }
  for (int k = 1; k < 16; ++k) {
    EXPECT_LT(abs(via_moments.alpha[k - 1]), real("1e-40"));
    EXPECT_LT(rel_err(via_moments.beta[k], real(k)), real("1e-40")) << k;
  }
}

TEST(Stieltjes, NonPositiveHankelRejected) {
  std::vector<real> bad = {real(1), real(0), real(1), real(0), real("0.5"), real(0)};
  EXPECT_THROW(recurrence_from_moments(bad), not_determinate_error);
}
