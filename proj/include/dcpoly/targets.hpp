#pragma once

// Target functions for projection experiments. Each target carries its
// evaluator, the abscissae where smoothness fails, and (where an explicit
// profile exists) upper envelopes for the spectral mass inside and outside
// a frequency window. Band-limited targets also keep their atomic spectrum
// so residual identities can be evaluated exactly.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dcpoly/errors.hpp"
#include "dcpoly/quadrature.hpp"
#include "dcpoly/real.hpp"

namespace dcpoly {

enum class target_kind {
  cosine,
  sine,
  sinc,
  gauss_smoothed_indicator,
  relu,
  sigmoid,
  abs_value,
  lipschitz_sample,
  exp_quadratic,
  trig_poly,
  custom
};

// One atomic line of a band-limited spectrum: the target contributes
// cos_coeff * cos(omega x) + sin_coeff * sin(omega x).
struct trig_term {
  real omega;
  real cos_coeff;
  real sin_coeff;
};

class target_function {
 public:
  target_kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  real operator()(const real& x) const { return eval_(x); }

  // Abscissae where the evaluator is not smooth; quadrature splits here.
  const std::vector<real>& kinks() const { return kinks_; }
  bool smooth() const { return smooth_; }

  bool has_band_profile() const { return static_cast<bool>(band_mass_); }
  bool has_tail_profile() const { return static_cast<bool>(tail_mass_); }

  // Upper envelope for the spectral mass inside [-W, W].
  real band_mass(const real& W) const {
    require(has_band_profile(), "band_mass: no spectral profile for " + name_);
    return band_mass_(W);
  }

  // Upper envelope for the spectral mass outside [-W, W].
  real tail_mass(const real& W) const {
    require(has_tail_profile(), "tail_mass: no spectral profile for " + name_);
    return tail_mass_(W);
  }

  bool band_limited() const { return band_limited_; }
  const real& band_edge() const { return band_edge_; }
  const std::vector<trig_term>& spectrum() const {
    require(band_limited_ && !terms_.empty(), "spectrum: target has no atomic spectrum");
    return terms_;
  }

  // Lipschitz metadata for pipeline consumers; zero when not declared.
  const real& lipschitz_constant() const { return lip_; }

  static target_function cosine(real omega) {
    require(omega > 0, "cosine: frequency must be positive");
    target_function t(target_kind::cosine, "cos(" + omega.str(6) + " x)");
    real w = omega;
    t.eval_ = [w](const real& x) { return cos(w * x); };
    t.terms_ = {{omega, real(1), real(0)}};
    t.finish_atomic(omega);
    return t;
  }

  static target_function sine(real omega) {
    require(omega > 0, "sine: frequency must be positive");
    target_function t(target_kind::sine, "sin(" + omega.str(6) + " x)");
    real w = omega;
    t.eval_ = [w](const real& x) { return sin(w * x); };
    t.terms_ = {{omega, real(0), real(1)}};
    t.finish_atomic(omega);
    return t;
  }

  // Finite combination of cosine and sine lines.
  static target_function trig_combination(std::vector<trig_term> terms,
                                          std::string label = "trig_poly") {
    require(!terms.empty(), "trig_combination: need at least one term");
    target_function t(target_kind::trig_poly, std::move(label));
    real edge(0);
    for (const auto& tm : terms) {
      require(tm.omega > 0, "trig_combination: frequencies must be positive");
      if (tm.omega > edge) edge = tm.omega;
    }
    auto terms_copy = terms;
    t.eval_ = [terms_copy](const real& x) {
      real acc(0);
      for (const auto& tm : terms_copy)
        acc += tm.cos_coeff * cos(tm.omega * x) + tm.sin_coeff * sin(tm.omega * x);
      return acc;
    };
    t.terms_ = std::move(terms);
    t.finish_atomic(edge);
    return t;
  }

  // sin(omega x) / (omega x); flat spectrum pi/omega on [-omega, omega].
  static target_function sinc(real omega) {
    require(omega > 0, "sinc: frequency must be positive");
    target_function t(target_kind::sinc, "sinc(" + omega.str(6) + " x)");
    real w = omega;
    t.eval_ = [w](const real& x) -> real {
      if (x == 0) return real(1);
      return sin(w * x) / (w * x);
    };
    t.band_limited_ = true;
    t.band_edge_ = omega;
    real edge = omega;
    const real two_pi = 2 * const_pi();
    t.band_mass_ = [edge, two_pi](const real& W) -> real {
      real inside = W < edge ? W : edge;
      if (inside < 0) inside = 0;
      return two_pi * inside / edge;
    };
    t.tail_mass_ = [edge, two_pi](const real& W) -> real {
      if (W >= edge) return real(0);
      real outside = (edge - W) / edge;
      return two_pi * outside;
    };
    return t;
  }

  // Indicator of [a, b] convolved with a centered gaussian of width sigma.
  static target_function gauss_smoothed_indicator(real a, real b, real sigma) {
    require(a < b, "gauss_smoothed_indicator: need a < b");
    require(sigma > 0, "gauss_smoothed_indicator: need sigma > 0");
    target_function t(target_kind::gauss_smoothed_indicator,
                      "smoothed_indicator[" + a.str(4) + "," + b.str(4) + "](sigma=" +
                          sigma.str(4) + ")");
    real aa = a, bb = b, s = sigma;
    real rt2 = sqrt(real(2));
    t.eval_ = [aa, bb, s, rt2](const real& x) {
      // Difference of gaussian CDFs, written with erfc for tail accuracy.
      real u = (x - aa) / (s * rt2);
      real v = (x - bb) / (s * rt2);
      return (erfc(-u) - erfc(-v)) / 2;
    };
    // |fhat(xi)| <= min(b - a, 2/|xi|) e^{-sigma^2 xi^2 / 2}; the band mass
    // integrates that envelope, the tail mass uses the closed bounds
    //   int_W^inf e^{-s^2 t^2/2}/t dt <= e^{-s^2 W^2/2}/(s^2 W^2)   and
    //   int_W^inf e^{-s^2 t^2/2} dt = sqrt(pi/2)/s erfc(s W / sqrt 2).
    real len = b - a;
    t.band_mass_ = [len, s](const real& W) -> real {
      if (W <= 0) return real(0);
      real knee = 2 / len;
      real acc(0);
      real lo_edge = W < knee ? W : knee;
      acc += 2 * len * integrate_band_envelope_flat(s, lo_edge);
      if (W > knee) acc += 4 * integrate_band_envelope_decay(s, knee, W);
      return acc;
    };
    t.tail_mass_ = [len, s, rt2](const real& W) -> real {
      require(W > 0, "tail_mass: need a positive cutoff");
      real e_half = exp(-s * s * W * W / 2);
      real opt1 = 4 * e_half / (s * s * W * W);
      real opt2 = 2 * len * sqrt(const_pi() / 2) / s * erfc(s * W / rt2);
      return opt1 < opt2 ? opt1 : opt2;
    };
    return t;
  }

  static target_function relu() {
    target_function t(target_kind::relu, "relu");
    t.eval_ = [](const real& x) { return x > 0 ? x : real(0); };
    t.kinks_ = {real(0)};
    t.smooth_ = false;
    // Outside [-W, W] the spectrum weighs like 1/xi^2 once the affine part
    // is removed by any projection of degree >= 1.
    t.tail_mass_ = [](const real& W) {
      require(W > 0, "tail_mass: need a positive cutoff");
      return 4 / W;
    };
    return t;
  }

  static target_function abs_value() {
    target_function t(target_kind::abs_value, "abs");
    t.eval_ = [](const real& x) { return abs(x); };
    t.kinks_ = {real(0)};
    t.smooth_ = false;
    t.tail_mass_ = [](const real& W) {
      require(W > 0, "tail_mass: need a positive cutoff");
      return 8 / W;
    };
    return t;
  }

  static target_function sigmoid() {
    target_function t(target_kind::sigmoid, "sigmoid");
    t.eval_ = [](const real& x) { return 1 / (1 + exp(-x)); };
    t.tail_mass_ = [](const real& W) {
      require(W > 0, "tail_mass: need a positive cutoff");
      return 16 * exp(-W);
    };
    return t;
  }

  // e^{-c x^2}; gaussian spectrum, masses exact.
  static target_function exp_quadratic(real c) {
    require(c > 0, "exp_quadratic: need c > 0");
    target_function t(target_kind::exp_quadratic, "exp(-" + c.str(6) + " x^2)");
    real cc = c;
    t.eval_ = [cc](const real& x) { return exp(-cc * x * x); };
    const real two_pi = 2 * const_pi();
    real half_width = 2 * sqrt(c);
    t.band_mass_ = [two_pi, half_width](const real& W) -> real {
      if (W <= 0) return real(0);
      return two_pi * erf(W / half_width);
    };
    t.tail_mass_ = [two_pi, half_width](const real& W) -> real {
      if (W <= 0) return two_pi;
      return two_pi * erfc(W / half_width);
    };
    return t;
  }

  // Caller-supplied M-Lipschitz function; no spectral profile.
  static target_function lipschitz_sample(real M, std::function<real(const real&)> f,
                                          std::vector<real> kink_points = {},
                                          std::string label = "lipschitz_sample") {
    require(M > 0, "lipschitz_sample: need a positive constant");
    target_function t(target_kind::lipschitz_sample, std::move(label));
    t.eval_ = std::move(f);
    t.kinks_ = std::move(kink_points);
    t.smooth_ = t.kinks_.empty();
    t.lip_ = std::move(M);
    return t;
  }

  static target_function custom(std::function<real(const real&)> f,
                                std::vector<real> kink_points = {},
                                std::function<real(const real&)> band_mass = {},
                                std::function<real(const real&)> tail_mass = {},
                                std::string label = "custom", bool is_smooth = true) {
    target_function t(target_kind::custom, std::move(label));
    t.eval_ = std::move(f);
    t.kinks_ = std::move(kink_points);
    t.smooth_ = is_smooth && t.kinks_.empty();
    t.band_mass_ = std::move(band_mass);
    t.tail_mass_ = std::move(tail_mass);
    return t;
  }

 private:
  target_function(target_kind k, std::string nm) : kind_(k), name_(std::move(nm)) {}

  // Shared wiring for targets with purely atomic spectra.
  void finish_atomic(const real& edge) {
    band_limited_ = true;
    band_edge_ = edge;
    const real two_pi = 2 * const_pi();
    auto terms = terms_;
    band_mass_ = [terms, two_pi](const real& W) {
      real acc(0);
      for (const auto& tm : terms)
        if (tm.omega <= W)
          acc += two_pi * sqrt(tm.cos_coeff * tm.cos_coeff + tm.sin_coeff * tm.sin_coeff);
      return acc;
    };
    tail_mass_ = [terms, two_pi](const real& W) {
      real acc(0);
      for (const auto& tm : terms)
        if (tm.omega > W)
          acc += two_pi * sqrt(tm.cos_coeff * tm.cos_coeff + tm.sin_coeff * tm.sin_coeff);
      return acc;
    };
  }

  // int_0^edge e^{-s^2 t^2 / 2} dt, closed form.
  static real integrate_band_envelope_flat(const real& s, const real& edge) {
    return sqrt(const_pi() / 2) / s * erf(s * edge / sqrt(real(2)));
  }

  // int_knee^W e^{-s^2 t^2 / 2} / t dt by panel-doubling quadrature; the
  // integrand is smooth on [knee, W].
  static real integrate_band_envelope_decay(const real& s, const real& knee, const real& W) {
    return integrate_smooth(
        [&](const real& t) { return exp(-s * s * t * t / 2) / t; }, knee, W,
        pow_int(real(10), -static_cast<long>(precision_digits()) + 10));
  }

  target_kind kind_;
  std::string name_;
  std::function<real(const real&)> eval_;
  std::vector<real> kinks_;
  bool smooth_ = true;
  std::function<real(const real&)> band_mass_, tail_mass_;
  bool band_limited_ = false;
  real band_edge_{0};
  std::vector<trig_term> terms_;
  real lip_{0};
};

}  // namespace dcpoly
