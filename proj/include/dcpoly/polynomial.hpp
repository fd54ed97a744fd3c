#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace dcpoly {

// Dense univariate polynomial, coefficients low degree first. Templated so the
// same arithmetic runs over mpfr reals and exact rationals.
template <class T>
struct polynomial {
  std::vector<T> c;  // c[k] multiplies x^k; empty means the zero polynomial

  polynomial() = default;
  explicit polynomial(std::vector<T> coeffs) : c(std::move(coeffs)) { trim(); }

  static polynomial constant(T v) { return polynomial(std::vector<T>{std::move(v)}); }

  int degree() const { return static_cast<int>(c.size()) - 1; }

  void trim() {
    while (!c.empty() && c.back() == 0) c.pop_back();
  }

  T operator()(const T& x) const {
    T acc(0);
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
    return acc;
  }

  polynomial& operator+=(const polynomial& o) {
    if (o.c.size() > c.size()) c.resize(o.c.size(), T(0));
    for (std::size_t i = 0; i < o.c.size(); ++i) c[i] += o.c[i];
    trim();
    return *this;
  }

  polynomial& operator-=(const polynomial& o) {
    if (o.c.size() > c.size()) c.resize(o.c.size(), T(0));
    for (std::size_t i = 0; i < o.c.size(); ++i) c[i] -= o.c[i];
    trim();
    return *this;
  }

  polynomial operator+(const polynomial& o) const {
    polynomial r = *this;
    r += o;
    return r;
  }

  polynomial operator-(const polynomial& o) const {
    polynomial r = *this;
    r -= o;
    return r;
  }

  polynomial operator*(const polynomial& o) const {
    if (c.empty() || o.c.empty()) return {};
    polynomial r;
    r.c.assign(c.size() + o.c.size() - 1, T(0));
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < o.c.size(); ++j) r.c[i + j] += c[i] * o.c[j];
    r.trim();
    return r;
  }

  polynomial operator*(const T& s) const {
    polynomial r = *this;
    for (auto& v : r.c) v *= s;
    r.trim();
    return r;
  }

  polynomial derivative() const {
    if (c.size() <= 1) return {};
    polynomial r;
    r.c.resize(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) r.c[i - 1] = c[i] * T(static_cast<long>(i));
    return r;
  }

  // Antiderivative with zero constant term.
  polynomial antiderivative() const {
    polynomial r;
    r.c.assign(c.size() + 1, T(0));
    for (std::size_t i = 0; i < c.size(); ++i) r.c[i + 1] = c[i] / T(static_cast<long>(i + 1));
    r.trim();
    return r;
  }

  // p(a x + b) by Horner in the affine argument.
  polynomial compose_affine(const T& a, const T& b) const {
    polynomial arg(std::vector<T>{b, a});
    polynomial acc;
    for (std::size_t i = c.size(); i-- > 0;) {
      acc = acc * arg;
      acc += constant(c[i]);
    }
    return acc;
  }
};

}  // namespace dcpoly
