#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace dcpoly {

// Deterministic sampling helpers. The engine is std::mt19937_64 (its output
// sequence is fixed by the standard), and all real-valued transforms are done
// here rather than with std:: distributions, whose algorithms vary across
// standard libraries. Fixed seed therefore means bit-identical samples.
class rng {
 public:
  explicit rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform on [0, 1), 53-bit mantissa.
  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Standard normal via Box-Muller; one value per call, cached pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 2.0 * M_PI * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Exp(1) by inversion.
  double exponential() {
    double u = 0.0;
    while (u == 0.0) u = uniform();
    return -std::log(u);
  }

  // Laplace with scale b: difference of exponentials.
  double laplace(double b) { return b * (exponential() - exponential()); }

  // Rademacher +-1.
  int sign() { return (eng_() & 1ull) ? 1 : -1; }

  // Uniform point in the unit ball of R^d (normal direction, radius by cdf).
  std::vector<double> ball(int d) {
    std::vector<double> x(d);
    double n2 = 0.0;
    for (int i = 0; i < d; ++i) {
      x[i] = normal();
      n2 += x[i] * x[i];
    }
    double r = std::pow(uniform(), 1.0 / d) / std::sqrt(n2);
    for (auto& v : x) v *= r;
    return x;
  }

  // Uniform unit vector in R^d.
  std::vector<double> unit_vector(int d) {
    std::vector<double> x(d);
    double n2 = 0.0;
    for (int i = 0; i < d; ++i) {
      x[i] = normal();
      n2 += x[i] * x[i];
    }
    double inv = 1.0 / std::sqrt(n2);
    for (auto& v : x) v *= inv;
    return x;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace dcpoly
