#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tailsim/errors.hpp"

namespace tailsim {

/// One bounded basic variable. The distribution may depend on the values of
/// the variables simulated before it (the prefix), so both the CDF and the
/// quantile take the prefix explicitly. Prefix-independent variables simply
/// ignore it.
struct BoundedVariable {
  double lower = 0.0;
  double upper = 1.0;
  std::function<double(std::span<const double> prefix, double x)> conditional_cdf;
  std::function<double(std::span<const double> prefix, double p)> conditional_quantile;
};

/// Uniform(a, b), independent of the prefix.
inline BoundedVariable uniform_variable(double a, double b) {
  if (!(std::isfinite(a) && std::isfinite(b)) || !(a < b)) {
    throw ConfigError("uniform_variable: bounds must be finite with lower < upper");
  }
  BoundedVariable v;
  v.lower = a;
  v.upper = b;
  v.conditional_cdf = [a, b](std::span<const double>, double x) {
    if (x <= a) return 0.0;
    if (x >= b) return 1.0;
    return (x - a) / (b - a);
  };
  v.conditional_quantile = [a, b](std::span<const double>, double p) {
    if (p <= 0.0) return a;
    if (p >= 1.0) return b;
    return a + p * (b - a);
  };
  return v;
}

/// Ordered collection of basic variables. Variable i may condition only on
/// variables 0..i-1.
struct JointModel {
  std::vector<BoundedVariable> variables;

  std::size_t dimension() const { return variables.size(); }

  std::vector<double> lower_corner() const {
    std::vector<double> c(variables.size());
    for (std::size_t i = 0; i < variables.size(); ++i) c[i] = variables[i].lower;
    return c;
  }

  std::vector<double> upper_corner() const {
    std::vector<double> c(variables.size());
    for (std::size_t i = 0; i < variables.size(); ++i) c[i] = variables[i].upper;
    return c;
  }
};

inline JointModel uniform_box(std::size_t n, double a = 0.0, double b = 1.0) {
  if (n < 1) throw ConfigError("uniform_box: need at least one variable");
  JointModel m;
  m.variables.reserve(n);
  for (std::size_t i = 0; i < n; ++i) m.variables.push_back(uniform_variable(a, b));
  return m;
}

}  // namespace tailsim
