#pragma once

#include <stdexcept>
#include <string>

namespace dcpoly {

// Input or precondition violations. The CLI maps these to exit code 2.
struct domain_error : std::runtime_error {
  explicit domain_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A requested certificate or validation could not be established from the
// inputs (not a bug, a verdict). CLI also maps these to exit code 2.
struct not_determinate_error : domain_error {
  explicit not_determinate_error(const std::string& msg) : domain_error(msg) {}
};

// An argument lies outside the window where the requested bound is valid.
struct parameter_out_of_range : domain_error {
  explicit parameter_out_of_range(const std::string& msg) : domain_error(msg) {}
};

// The requested polynomial degree sits at or below the feasibility floor of
// the bound being evaluated.
struct degree_too_small : domain_error {
  explicit degree_too_small(const std::string& msg) : domain_error(msg) {}
};

// The spectral tail never drops under the planner's budget on its search
// grid, so no frequency cutoff can be certified.
struct tail_never_small : domain_error {
  explicit tail_never_small(const std::string& msg) : domain_error(msg) {}
};

// A multivariate polynomial basis would exceed the configured memory budget.
struct basis_too_large : domain_error {
  explicit basis_too_large(const std::string& msg) : domain_error(msg) {}
};

// Internal numerical failures. The CLI maps these to exit code 1.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct quadrature_insufficient : numeric_error {
  explicit quadrature_insufficient(const std::string& msg) : numeric_error(msg) {}
};

// Orthonormality or a comparable internal identity failed at the configured
// working precision; rerun under a precision_guard with more digits.
struct precision_exhausted : numeric_error {
  explicit precision_exhausted(const std::string& msg) : numeric_error(msg) {}
};

struct normalization_failed : numeric_error {
  explicit normalization_failed(const std::string& msg) : numeric_error(msg) {}
};

struct solver_stalled : numeric_error {
  explicit solver_stalled(const std::string& msg) : numeric_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw domain_error(msg);
}

}  // namespace dcpoly
