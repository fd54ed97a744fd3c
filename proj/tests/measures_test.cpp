#include <gtest/gtest.h>

#include "dcpoly/measures.hpp"
#include "dcpoly/rng.hpp"

using namespace dcpoly;

namespace {

real rel_err(const real& got, const real& want) {
  real denom = abs(want) > 0 ? abs(want) : real(1);
  return abs(got - want) / denom;
}

}  // namespace

TEST(Measures, LaplaceRecurrenceMatchesMomentRoute) {
  // Laplace has no classical recurrence; its Stieltjes construction must
  // agree with the moment-based Chebyshev route run at elevated precision.
  measure mu = measure::laplace(real(1));
  const recurrence& rec = mu.recur(14);
  std::vector<real> mom(30);
  for (int k = 0; k < 30; ++k) mom[k] = (k % 2) ? real(0) : factorial(k);
  recurrence dual;
  {
    precision_guard guard(4 * precision_digits());
    dual = recurrence_from_moments(mom);
  }
  for (int k = 1; k <= 14; ++k) {
    EXPECT_LT(abs(rec.alpha[k - 1]), real("1e-45")) << k;
    EXPECT_LT(rel_err(rec.beta[k], dual.beta[k]), real("1e-30")) << k;
  }
}

TEST(Measures, OrthonormalityUnderGaussRule) {
  for (const auto& mu : {measure::laplace(real("1.5")), measure::freud(real("1.5")),
                         measure::uniform(real(1)), measure::one_sided_exp(real(2))}) {
    int m = 18;
    quad_rule r = mu.gauss(m + 4);
    std::vector<std::vector<real>> vals(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) vals[i] = mu.orthonormal_at(r.x[i], m);
    for (int a = 0; a <= m; ++a)
      for (int b = a; b <= m; ++b) {
        real acc(0);
        for (std::size_t i = 0; i < r.size(); ++i) acc += r.w[i] * vals[i][a] * vals[i][b];
        real want = (a == b) ? real(1) : real(0);
        EXPECT_LT(abs(acc - want), real("1e-50")) << mu.name() << " " << a << "," << b;
      }
  }
}

TEST(Measures, MomentsAgainstMonteCarlo) {
  // Coarse statistical cross-check of the closed-form moment tables.
  rng g(7);
  measure mu = measure::one_sided_exp(real("1.25"));
  const int n = 200000;
  double s2 = 0, s3 = 0;
  for (int i = 0; i < n; ++i) {
    double x = mu.sample(g);
    s2 += x * x;
    s3 += x * x * x;
  }
  double m2 = to_double(mu.moment(2)), m3 = to_double(mu.moment(3));
  EXPECT_NEAR(s2 / n, m2, 0.05 * m2);
  EXPECT_NEAR(s3 / n, m3, 0.08 * m3);
}

TEST(Measures, LaplaceSubexpConstantClosedForm) {
  for (double bd : {0.5, 1.0, 2.25}) {
    real b(bd);
    measure mu = measure::laplace(b);
    const tail_class& tc = mu.tails();
    ASSERT_TRUE(tc.has_subexp);
    real want = 2 * b / (1 - exp(real(-2)));
    EXPECT_LT(rel_err(tc.K_sub, want), real("1e-20")) << bd;
    ASSERT_FALSE(tc.has_strict);
  }
}

TEST(Measures, OneSidedSubexpConstantClosedForm) {
  real a = real("1.5");
  measure mu = measure::one_sided_exp(a);
  const tail_class& tc = mu.tails();
  ASSERT_TRUE(tc.has_subexp);
  // (1 - 2/K)^{-(a+1)} = e^2  =>  K = 2 / (1 - exp(-2/(a+1))).
  real want = 2 / (1 - exp(-2 / (a + 1)));
  EXPECT_LT(rel_err(tc.K_sub, want), real("1e-20"));
}

TEST(Measures, GaussianTailClasses) {
  real sigma = real("0.8");
  measure mu = measure::gaussian(sigma);
  const tail_class& tc = mu.tails();
  ASSERT_TRUE(tc.has_strict);
  EXPECT_EQ(to_double(tc.r), 2.0);
  EXPECT_LT(rel_err(tc.K, sigma), real("1e-70"));
  EXPECT_LT(rel_err(tc.A, real(1)), real("1e-70"));
  ASSERT_TRUE(tc.has_subexp);
  // Independent Newton solve of E e^{t|X|} = e^2 in the test.
  real t("1.0");
  for (int it = 0; it < 80; ++it) {
    real f = exp(t * t * sigma * sigma / 2) * (1 + erf(t * sigma / sqrt(real(2)))) - exp(real(2));
    real h = real("1e-30");
    real fp = (exp((t + h) * (t + h) * sigma * sigma / 2) *
                   (1 + erf((t + h) * sigma / sqrt(real(2)))) -
               exp(real(2)) - f) /
              h;
    t -= f / fp;
  }
  EXPECT_LT(rel_err(tc.K_sub, 2 / t), real("1e-18"));
}

TEST(Measures, UniformTailClasses) {
  real R = real(3);
  measure mu = measure::uniform(R);
  const tail_class& tc = mu.tails();
  ASSERT_TRUE(tc.has_bounded);
  EXPECT_LT(rel_err(tc.radius, R), real("1e-70"));
  ASSERT_TRUE(tc.has_strict);
  EXPECT_EQ(to_double(tc.r), 1.0);
  EXPECT_LT(rel_err(tc.K, R), real("1e-70"));
  ASSERT_TRUE(tc.has_subexp);
  // mgf on the grid obeys the declared envelope.
  for (double xi : {0.1, 0.7, 2.0, 5.0})
    EXPECT_LE(mu.mgf_norm(real(xi)), exp(tc.K * xi) * real("1.0000000001"));
}

TEST(Measures, FreudStrictEnvelopeHolds) {
  measure mu = measure::freud(real("1.5"));
  const tail_class& tc = mu.tails();
  ASSERT_TRUE(tc.has_strict);
  EXPECT_NEAR(to_double(tc.r), 3.0, 1e-12);
  for (double xi : {0.05, 0.3, 1.0, 2.5, 6.0}) {
    real lhs = mu.mgf_norm(real(xi));
    real rhs = tc.A * exp(pow(tc.K * xi, tc.r));
    EXPECT_LE(lhs, rhs * real("1.0000001")) << xi;
  }
}

TEST(Measures, CarlemanSumDiagnostic) {
  // Gaussian: partial sums of m_{2k}^{-1/(2k)} keep growing (determinate);
  // a log-normal-like fast-growing moment sequence levels off.
  measure g = measure::gaussian(real(1));
  real s10 = g.carleman_sum(10), s40 = g.carleman_sum(40);
  EXPECT_GT(to_double(s40 - s10), 1.0);
  std::vector<real> lognormal_moments(24);
  for (int k = 0; k < 24; ++k) lognormal_moments[k] = exp(real(k) * real(k) / 2);
  measure ln = measure::from_moments(lognormal_moments);
  real t4 = ln.carleman_sum(4), t8 = ln.carleman_sum(8);
  EXPECT_LT(to_double(t8 - t4), 0.1);
}

TEST(Measures, EmpiricalMeasureBasics) {
  rng g(99);
  std::vector<real> pts;
  for (int i = 0; i < 500; ++i) pts.push_back(real(g.normal()));
  measure mu = measure::from_samples(pts);
  const recurrence& rec = mu.recur(6);
  EXPECT_GT(rec.beta[1], 0);
  // Exact discrete orthonormality.
  quad_rule r = mu.aux_rule(6);
  real acc(0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    auto v = mu.orthonormal_at(r.x[i], 4);
    acc += r.w[i] * v[3] * v[4];
  }
  EXPECT_LT(abs(acc), real("1e-60"));
}

TEST(Measures, CustomDensityMatchesBuiltin)
{
  // A custom-density clone of laplace(1) must reproduce its moments.
  auto rho = [](const real& x) { return exp(-abs(x)) / 2; };
  measure mu = measure::custom(rho, real(0), real(0), true, true, {real(0)}, "laplace_clone");
  EXPECT_LT(rel_err(mu.moment(2), real(2)), real("1e-40"));
  EXPECT_LT(rel_err(mu.moment(4), real(24)), real("1e-40"));
  const tail_class& tc = mu.tails();
  ASSERT_TRUE(tc.has_subexp);
  EXPECT_LT(rel_err(tc.K_sub, 2 / (1 - exp(real(-2)))), real("1e-18"));
}
