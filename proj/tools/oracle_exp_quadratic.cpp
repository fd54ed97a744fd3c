// Standalone oracle: inner products of exp(c x^2) with the first orthonormal
// Hermite polynomials over N(0,1), by direct Gauss quadrature at high
// precision. Run once to freeze reference decimals for the expansion tests.
// The quadrature route never touches the closed-form coefficient code.

#include <iostream>

#include "dcpoly/measures.hpp"
#include "dcpoly/real.hpp"

using namespace dcpoly;

int main() {
  set_precision_digits(120);
  measure g = measure::gaussian(1);
  // exp(c x^2) against the N(0,1) weight is exp(-(1/2 - c) x^2); node tails
  // past |x| ~ sqrt(2 * 120 ln 10 / (1 - 2c)) are negligible, and an 800-node
  // rule reaches |x| ~ 40. Doubling to 1600 confirms stability below.
  for (const real& c : {real(1) / 6, real("0.05"), real("0.1"), real("0.2")}) {
    for (int n : {800, 1600}) {
      quad_rule r = g.gauss(n);
      real a0(0), a2(0), a4(0);
      for (std::size_t i = 0; i < r.size(); ++i) {
        real x = r.x[i];
        real f = exp(c * x * x);
        real h2 = (x * x - 1) / sqrt(real(2));
        real h4 = (x * x * x * x - 6 * x * x + 3) / sqrt(real(24));
        a0 += r.w[i] * f;
        a2 += r.w[i] * f * h2;
        a4 += r.w[i] * f * h4;
      }
      std::cout << "c=" << c.str(8) << " n=" << n << "\n  a0=" << a0.str(70)
                << "\n  a2=" << a2.str(70) << "\n  a4=" << a4.str(70) << "\n";
    }
  }
  return 0;
}
