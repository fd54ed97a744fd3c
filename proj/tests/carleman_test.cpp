#include <gtest/gtest.h>

#include <dcpoly/carleman.hpp>
#include <dcpoly/measures.hpp>

using namespace dcpoly;

namespace {

real rel_err(const real& got, const real& want) {
  real denom = abs(want) > 0 ? abs(want) : real(1);
  return abs(got - want) / denom;
}

// Independent oracle: the associated function as a literal infimum over the
// first n_max sequence entries.
real tau_brute_force(const carleman_sequence& s, const real& r, int n_max = 200) {
  real best(1);
  real rn(1);
  for (int n = 1; n <= n_max; ++n) {
    rn *= r;
    real v = s.M(n) / rn;
    if (v < best) best = v;
  }
  return best;
}

}  // namespace

TEST(Carleman, SequenceEntries) {
  carleman_sequence f = carleman_sequence::factorial();
  EXPECT_EQ(to_double(f.M(0)), 1.0);
  EXPECT_EQ(to_double(f.M(4)), 24.0);
  EXPECT_LT(rel_err(f.a(7), real(1) / 7), real("1e-70"));

  carleman_sequence s = carleman_sequence::subgaussian();
  // M_6 = 6^3.
  EXPECT_LT(rel_err(s.M(6), real(216)), real("1e-70"));
  // a_n = (1/sqrt(n)) (1 - 1/n)^{(n-1)/2}, checked at n = 9.
  real a9 = (1 / sqrt(real(9))) * pow(1 - real(1) / 9, real(8) / 2);
  EXPECT_LT(rel_err(s.a(9), a9), real("1e-70"));

  carleman_sequence q = carleman_sequence::quasi();
  // a_n = 1 / (n log(e n)), checked at n = 5.
  real a5 = 1 / (5 * log(const_e() * 5));
  EXPECT_LT(rel_err(q.a(5), a5), real("1e-70"));
}

TEST(Carleman, TauClosedValues) {
  carleman_sequence f = carleman_sequence::factorial();
  // r <= 1 never activates a factor.
  EXPECT_EQ(to_double(tau(f, real("0.5"))), 1.0);
  EXPECT_EQ(to_double(tau(f, real(1))), 1.0);
  // r = 2: the single active factor is k = 1, giving (1*2)^{-1}... k = 1 has
  // a_1 = 1, so factors k = 1 operate at a_k r = 2: product (1/2). The brute
  // force minimum is 2!/2^2 = 1/2.
  EXPECT_LT(rel_err(tau(f, real(2)), real(1) / 2), real("1e-70"));
  // r = 3.5: active k in {1, 2, 3}; product 1*2*3/3.5^3 = 48/343.
  EXPECT_LT(rel_err(tau(f, real("3.5")), real(48) / 343), real("1e-70"));
  EXPECT_LT(rel_err(tau_brute_force(f, real("3.5")), real(48) / 343), real("1e-70"));
}

TEST(Carleman, TauProductMatchesBruteForce) {
  std::vector<carleman_sequence> seqs = {carleman_sequence::factorial(),
                                         carleman_sequence::subgaussian(),
                                         carleman_sequence::quasi()};
  for (const auto& s : seqs) {
    for (double r : {1.5, 2.0, 3.5, 7.0, 20.0, 50.0}) {
      // The 200-entry scan must bracket the minimizing index, which for the
      // subgaussian family sits near r^2/e; skip its two largest radii.
      if (s.source() == carleman_source::subgaussian && r > 23) continue;
      real got = tau(s, real(r));
      real want = tau_brute_force(s, real(r));
      EXPECT_LT(rel_err(got, want), real("1e-20")) << s.name() << " r=" << r;
    }
  }
}

TEST(Carleman, TauMonotoneRapidDecay) {
  carleman_sequence f = carleman_sequence::factorial();
  // Nonincreasing on a half-integer grid, and exponentially small: the exact
  // value floor(r)!/r^floor(r) sits under the Robbins envelope
  // e sqrt(n) (n/e)^n / n^n = e sqrt(n) e^{-n} with n = floor(r).
  real prev = tau(f, real(1));
  for (int twice_r = 3; twice_r <= 100; ++twice_r) {
    real r = real(twice_r) / 2;
    real cur = tau(f, r);
    EXPECT_LE(cur, prev) << twice_r;
    int n = twice_r / 2;
    EXPECT_LE(cur, const_e() * sqrt(real(n)) * exp(real(-n))) << twice_r;
    prev = cur;
  }
  // The envelope is tight: at r = 40 the value is within a factor 3 of it.
  EXPECT_GT(tau(f, real(40)) * 3, const_e() * sqrt(real(40)) * exp(real(-40)));
}

TEST(Carleman, TauTruncatedBranches) {
  carleman_sequence f = carleman_sequence::factorial();
  // N = 0 collapses to M_0 = 1 for every r.
  for (double r : {0.3, 1.0, 5.0, 40.0}) EXPECT_EQ(to_double(tau_truncated(f, real(r), 0)), 1.0);
  // Below the crossover (r <= 1/a_{N+1}) the full product applies.
  EXPECT_LT(rel_err(tau_truncated(f, real(2), 5), real(1) / 2), real("1e-70"));
  // Above it the last retained term M_N / r^N takes over: 2!/10^2.
  EXPECT_LT(rel_err(tau_truncated(f, real(10), 2), real("0.02")), real("1e-70"));
}

TEST(Carleman, LogIntegralDualRoute) {
  // The logarithmic integral evaluated through the term-by-term closed
  // antiderivative must match blunt adaptive quadrature of log tau.
  carleman_sequence f = carleman_sequence::factorial();
  for (double alpha : {0.25, 1.0, 3.0}) {
    real ia = carleman_log_integral(f, 10, real(alpha), integral_route::antiderivative);
    real iq = carleman_log_integral(f, 10, real(alpha), integral_route::quadrature);
    EXPECT_LT(to_double(ia), 0.0);
    EXPECT_LT(rel_err(ia, iq), real("1e-10")) << alpha;
  }
  carleman_sequence s = carleman_sequence::subgaussian();
  real ia = carleman_log_integral(s, 25, real("1.7"), integral_route::antiderivative);
  real iq = carleman_log_integral(s, 25, real("1.7"), integral_route::quadrature);
  EXPECT_LT(rel_err(ia, iq), real("1e-10"));
}

TEST(Carleman, BoundComponentsIdentity) {
  carleman_sequence f = carleman_sequence::factorial();
  std::vector<real> grid;
  for (int i = 0; i <= 8; ++i) grid.push_back(pow(real(2), i - 4));
  carleman_bound_result b =
      carleman_bound(f, real(1), real(1), 10, real("0.1"), real(11), grid);
  real recon = b.components.prefactor * (b.components.integral_term + b.components.tail_term);
  EXPECT_LT(rel_err(b.value, recon), real("1e-60"));
  EXPECT_GT(to_double(b.alpha_star), 0.0);
  // The reported value can only improve on every grid point.
  for (const auto& alpha : grid) {
    carleman_bound_result one =
        carleman_bound(f, real(1), real(1), 10, real("0.1"), real(11), {alpha});
    EXPECT_LE(b.value, one.value * (1 + real("1e-60")));
  }
}

TEST(Carleman, BoundNoVanishingCollapses) {
  // N = 0: the logarithmic integral is empty, so the bracket is 1 + tau(Y/K).
  carleman_sequence f = carleman_sequence::factorial();
  real B(2), K(3), x("0.07"), Y("2.5"), alpha("1.3");
  carleman_bound_result b = carleman_bound(f, B, K, 0, x, Y, {alpha});
  EXPECT_LT(rel_err(b.components.integral_term, real(1)), real("1e-60"));
  real expect = B * Y * exp(K * alpha * x) / (alpha * const_pi() * K) * (1 + tau(f, Y / K));
  EXPECT_LT(rel_err(b.value, expect), real("1e-60"));
}

TEST(Carleman, BoundRejectsLargeY) {
  carleman_sequence f = carleman_sequence::factorial();
  // 1/a_{11} = 11, so Y may not exceed K * 11.
  EXPECT_THROW(
      carleman_bound(f, real(1), real(1), 10, real(0), real("11.001"), {real(1)}),
      parameter_out_of_range);
  EXPECT_NO_THROW(carleman_bound(f, real(1), real(1), 10, real(0), real(11), {real(1)}));
}

TEST(Carleman, BoundSharpensWithVanishingOrder) {
  // Deep vanishing plus a wide window crush the bound for divergent-sum
  // ratio sequences.
  carleman_sequence f = carleman_sequence::factorial();
  std::vector<real> grid;
  for (int i = 0; i <= 16; ++i) grid.push_back(pow(real(2), real(i) / 2 - 4));
  real x("0.1"), one(1);
  carleman_bound_result shallow = carleman_bound(f, one, one, 5, x, real(6), grid);
  carleman_bound_result deep = carleman_bound(f, one, one, 200, x, real(201), grid);
  EXPECT_LT(deep.value, real("1e-6") * shallow.value);
}

TEST(Carleman, SubgaussianExponentialTrend) {
  // At alpha = sqrt(N) and maximal Y the bound decays exponentially in N:
  // -log(value) should scale linearly, so quadrupling N should far more than
  // double it.
  carleman_sequence s = carleman_sequence::subgaussian();
  auto value_at = [&](int N) {
    real alpha = sqrt(real(N));
    real Y = 1 / s.a(N + 1);
    carleman_bound_result b = carleman_bound(s, real(1), real(1), N, real(0), Y, {alpha});
    return b.value;
  };
  real v16 = value_at(16), v64 = value_at(64);
  real v25 = value_at(25), v100 = value_at(100);
  EXPECT_LT(v64, v16);
  EXPECT_LT(v100, v25);
  EXPECT_GT(to_double(log(v64) / log(v16)), 2.0);
  EXPECT_GT(to_double(log(v100) / log(v25)), 2.0);
  EXPECT_LT(to_double(v100), 1e-2);
}

TEST(Carleman, QuasiBoundStillShrinks) {
  // The borderline sequence with a_n = 1/(n log(en)) still has divergent
  // ratio sums, so deeper vanishing keeps helping, just slowly.
  carleman_sequence q = carleman_sequence::quasi();
  std::vector<real> grid;
  for (int i = 0; i <= 12; ++i) grid.push_back(pow(real(2), real(i) / 2 - 3));
  real x("0.05"), one(1);
  real prev(-1);
  for (int N : {5, 20, 80}) {
    carleman_bound_result b = carleman_bound(q, one, one, N, x, 1 / q.a(N + 1), grid);
    if (prev >= 0) EXPECT_LT(b.value, prev);
    prev = b.value;
  }
}

TEST(Carleman, RealVariableComparisonBound) {
  carleman_sequence f = carleman_sequence::factorial();
  EXPECT_EQ(to_double(real_variable_bound(f, real(1), real(1), 10, real(0))), 0.0);
  // Direct formula: 8 B K x / (a_1 + ... + a_m) with harmonic partial sum.
  real H5 = real(1) + real(1) / 2 + real(1) / 3 + real(1) / 4 + real(1) / 5;
  real x = H5 / 16;  // inside the admissible window x <= H5 / 8
  EXPECT_LT(rel_err(real_variable_bound(f, real(1), real(2), 5, x / 2),
                    8 * real(2) * (x / 2) / H5),
            real("1e-70"));
  EXPECT_THROW(real_variable_bound(f, real(1), real(1), 5, H5), parameter_out_of_range);
}

TEST(Carleman, RatioSumAsymptotics) {
  // Subgaussian: sum_{j<=m} a_j tracks 2 sqrt(m/e) within a factor of two.
  carleman_sequence s = carleman_sequence::subgaussian();
  for (int m : {100, 1000, 10000}) {
    real sum(0);
    for (int j = 1; j <= m; ++j) sum += s.a(j);
    double ratio = to_double(sum / (2 * sqrt(real(m) / const_e())));
    EXPECT_GT(ratio, 0.5) << m;
    EXPECT_LT(ratio, 2.0) << m;
  }
  // Factorial: the ratio sum is the harmonic number, pinned against log.
  carleman_sequence f = carleman_sequence::factorial();
  for (int m : {100, 10000}) {
    real sum(0);
    for (int j = 1; j <= m; ++j) sum += f.a(j);
    double ratio = to_double(sum / log(real(m)));
    EXPECT_GT(ratio, 1.0) << m;
    EXPECT_LT(ratio, 1.6) << m;
  }
}

TEST(Carleman, MomentFittedSequence) {
  measure mu = measure::gaussian(real(1));
  carleman_sequence s = carleman_sequence::from_moments(mu, 24);
  // The fitted envelope certifies ||x^k|| <= B K^k M_k for every captured k.
  for (int k = 0; k <= 24; ++k) {
    real norm_k = sqrt(mu.moment(2 * k));
    EXPECT_LE(norm_k, s.B() * pow_int(s.K(), k) * s.M(k) * (1 + real("1e-50"))) << k;
  }
  // Log-convexity and nonincreasing ratios.
  for (int k = 1; k + 1 <= 24; ++k) {
    EXPECT_LE(s.M(k) * s.M(k), s.M(k - 1) * s.M(k + 1) * (1 + real("1e-30"))) << k;
    EXPECT_LE(s.a(k + 1), s.a(k) * (1 + real("1e-30"))) << k;
  }
  // Standard normal: ||x^k||^2 = (2k-1)!!, already log-convex, so the hull is
  // tight: M_5 = sqrt(9!!) and K = 1.
  EXPECT_LT(rel_err(s.K(), real(1)), real("1e-50"));
  EXPECT_LT(rel_err(s.M(5), sqrt(real(945))), real("1e-50"));
}

TEST(Carleman, RejectsNonLogConvex) {
  std::vector<real> bad = {real(1), real(1), real(4), real(5)};  // M_1^2... M_2^2 = 16 > M_1 M_3 = 5
  EXPECT_THROW(carleman_sequence::custom(bad, "bad"), domain_error);
  std::vector<real> good = {real(1), real(1), real(2), real(6), real(24)};
  EXPECT_NO_THROW(carleman_sequence::custom(good, "factorial-prefix"));
}
