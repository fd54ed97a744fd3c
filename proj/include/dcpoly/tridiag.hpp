#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "dcpoly/errors.hpp"
#include "dcpoly/real.hpp"

namespace dcpoly {

// Eigen-decomposition of a symmetric tridiagonal matrix by the implicit-shift
// QL iteration, tracking only the first component of each eigenvector (all a
// Gauss rule needs). Runs at the current mpfr precision.
//
// Inputs: diag d[0..n-1], offdiag e[0..n-2]. Outputs: eigenvalues ascending in
// d, first eigenvector components (orthonormal basis) in z.
inline void tridiag_eigen_first_components(std::vector<real>& d, std::vector<real>& e,
                                           std::vector<real>& z) {
  const int n = static_cast<int>(d.size());
  z.assign(n, real(0));
  if (n == 0) return;
  z[0] = 1;
  if (n == 1) return;
  e.resize(n, real(0));  // sentinel slot e[n-1] = 0

  // Convergence threshold tied to the working precision in bits.  Read the
  // precision off a freshly constructed number: the library default prec and
  // the precision of new values can differ.
  real one(1);
  const long bits = mpfr_get_prec(one.backend().data());
  const real eps = ldexp(real(1), static_cast<int>(-(bits - 4)));

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    for (;;) {
      for (m = l; m < n - 1; ++m) {
        real dd = abs(d[m]) + abs(d[m + 1]);
        if (abs(e[m]) <= eps * dd) break;
      }
      if (m == l) break;
      if (++iter > 100) throw numeric_error("tridiag QL failed to converge");
      real g = (d[l + 1] - d[l]) / (2 * e[l]);
      real r = hypot(g, real(1));
      real denom = g + (g >= 0 ? r : -r);
      g = d[m] - d[l] + e[l] / denom;
      real s(1), c(1), p(0);
      bool underflow = false;
      for (int i = m - 1; i >= l; --i) {
        real f = s * e[i];
        real b = c * e[i];
        r = hypot(f, g);
        e[i + 1] = r;
        if (r == 0) {
          d[i + 1] -= p;
          e[m] = 0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        f = z[i + 1];
        z[i + 1] = s * z[i] + c * f;
        z[i] = c * z[i] - s * f;
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0;
    }
  }

  // Sort ascending, carrying first components along.
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });
  std::vector<real> ds(n), zs(n);
  for (int i = 0; i < n; ++i) {
    ds[i] = d[idx[i]];
    zs[i] = z[idx[i]];
  }
  d.swap(ds);
  z.swap(zs);
}

}  // namespace dcpoly
