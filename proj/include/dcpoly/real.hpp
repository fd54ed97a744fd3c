#pragma once

#include <mpfr.h>

#include <boost/multiprecision/mpfr.hpp>
#include <string>

#include "dcpoly/errors.hpp"

namespace dcpoly {

// Arbitrary-precision real. Precision is set once at startup (plus guard
// digits) and raised locally through precision_guard for ill-conditioned
// oracles. mpfr's exponent range absorbs values like (2k)! ~ 1e2860 and
// truncated tail weights ~ 1e-3000 without over/underflow.
using real = boost::multiprecision::mpfr_float;

inline void set_precision_digits(unsigned decimal_digits) {
  real::default_precision(decimal_digits);
}

inline unsigned precision_digits() { return real::default_precision(); }

// Boost's default_precision is sticky; restore explicitly on scope exit.
class precision_guard {
 public:
  explicit precision_guard(unsigned decimal_digits) : saved_(real::default_precision()) {
    real::default_precision(decimal_digits);
  }
  ~precision_guard() { real::default_precision(saved_); }
  precision_guard(const precision_guard&) = delete;
  precision_guard& operator=(const precision_guard&) = delete;

 private:
  unsigned saved_;
};

inline real const_pi() {
  real r;
  mpfr_const_pi(r.backend().data(), MPFR_RNDN);
  return r;
}

inline real const_e() { return exp(real(1)); }

inline double to_double(const real& x) { return x.convert_to<double>(); }

// x^n for integer n, by binary powering; exact sign handling for n < 0.
inline real pow_int(real x, long n) {
  if (n < 0) return 1 / pow_int(x, -n);
  real acc(1);
  while (n > 0) {
    if (n & 1) acc *= x;
    x *= x;
    n >>= 1;
  }
  return acc;
}

inline real factorial(unsigned long n) {
  real acc(1);
  for (unsigned long k = 2; k <= n; ++k) acc *= k;
  return acc;
}

// n!! with the convention (-1)!! = 0!! = 1.
inline real double_factorial(long n) {
  real acc(1);
  for (long k = n; k >= 2; k -= 2) acc *= k;
  return acc;
}

inline real log_factorial(unsigned long n) { return lgamma(real(n + 1)); }

// Minimal complex pair over real; used for characteristic-function values
// and Bargmann transforms, which only need +, *, conj, abs.
struct cnum {
  real re{0};
  real im{0};

  cnum() = default;
  cnum(real r, real i) : re(std::move(r)), im(std::move(i)) {}
  explicit cnum(real r) : re(std::move(r)) {}

  cnum operator+(const cnum& o) const { return {re + o.re, im + o.im}; }
  cnum operator-(const cnum& o) const { return {re - o.re, im - o.im}; }
  cnum operator*(const cnum& o) const {
    return {re * o.re - im * o.im, re * o.im + im * o.re};
  }
  cnum& operator+=(const cnum& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  cnum operator*(const real& s) const { return {re * s, im * s}; }
  real abs() const { return hypot(re, im); }
};

// exp(i t) as a cnum.
inline cnum cis(const real& t) { return {cos(t), sin(t)}; }

// exp(z) for complex z.
inline cnum cexp(const cnum& z) {
  real m = exp(z.re);
  return {m * cos(z.im), m * sin(z.im)};
}

}  // namespace dcpoly
