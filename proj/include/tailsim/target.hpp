#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tailsim/errors.hpp"
#include "tailsim/model.hpp"

namespace tailsim {

enum class TailSide { left, right };

using Vector = std::vector<double>;
using Matrix = std::vector<std::vector<double>>;

/// A componentwise-monotone target z = h(x). `monotone_signs[i]` is +1 when h
/// is nondecreasing in x_i and -1 when nonincreasing. `coordinate_inverse`,
/// `gradient` and `hessian` are optional: when absent, callers fall back to
/// the affine two-evaluation inverse and to finite differences.
struct TargetFunction {
  std::size_t dimension = 0;
  std::vector<int> monotone_signs;
  std::function<double(std::span<const double>)> evaluate;
  std::function<double(std::size_t i, std::span<const double> x, double z)> coordinate_inverse;
  std::function<Vector(std::span<const double>)> gradient;
  std::function<Matrix(std::span<const double>)> hessian;

  bool all_decreasing() const {
    for (int s : monotone_signs)
      if (s >= 0) return false;
    return !monotone_signs.empty();
  }
};

/// Solves h(x with x_i := t) = z for targets that are affine in x_i when the
/// other coordinates are held fixed. Two evaluations recover the affine
/// coefficients: c0 = h(x_i := 0), c1 = h(x_i := 1) - c0, t = (z - c0) / c1.
inline double multilinear_coordinate_inverse(const TargetFunction& f, std::size_t i,
                                             std::span<const double> x, double z) {
  std::vector<double> probe(x.begin(), x.end());
  probe[i] = 0.0;
  const double c0 = f.evaluate(probe);
  probe[i] = 1.0;
  const double c1 = f.evaluate(probe) - c0;
  if (!(std::fabs(c1) >= 1e-14)) {
    throw CoordinateInactive("coordinate inactive: target does not depend on coordinate " +
                             std::to_string(i) + " at this point");
  }
  return (z - c0) / c1;
}

/// Coordinate inverse through the registered closed form, or the affine
/// fallback when none is registered.
inline double invert_coordinate(const TargetFunction& f, std::size_t i,
                                std::span<const double> x, double z) {
  if (f.coordinate_inverse) return f.coordinate_inverse(i, x, z);
  return multilinear_coordinate_inverse(f, i, x, z);
}

namespace detail {

inline double checked_eval(const TargetFunction& f, std::span<const double> p) {
  const double v = f.evaluate(p);
  if (!std::isfinite(v)) throw std::runtime_error("evaluation failure at probe point");
  return v;
}

}  // namespace detail

/// Central finite differences for the gradient and Hessian, with one-sided
/// stencils at box faces. Step per coordinate: max(1e-6, 1e-6 |p_k|).
/// The Hessian is symmetrised by averaging.
inline std::pair<Vector, Matrix> numeric_derivatives(const TargetFunction& f,
                                                     std::span<const double> p,
                                                     std::span<const double> lower,
                                                     std::span<const double> upper) {
  const std::size_t n = f.dimension;
  std::vector<double> x(p.begin(), p.end());
  std::vector<double> h(n);
  // Per-axis probe offsets, pulled inside the box when p sits on a face.
  std::vector<double> op(n), om(n);
  for (std::size_t k = 0; k < n; ++k) {
    h[k] = std::max(1e-6, 1e-6 * std::fabs(p[k]));
    const bool plus_ok = lower.empty() || p[k] + h[k] <= upper[k];
    const bool minus_ok = lower.empty() || p[k] - h[k] >= lower[k];
    if (!plus_ok && !minus_ok) throw ConfigError("numeric_derivatives: box narrower than step");
    op[k] = plus_ok ? h[k] : 0.0;
    om[k] = minus_ok ? -h[k] : 0.0;
  }

  auto eval_at = [&](std::size_t k, double dk) {
    const double save = x[k];
    x[k] = p[k] + dk;
    const double v = detail::checked_eval(f, x);
    x[k] = save;
    return v;
  };
  auto eval_at2 = [&](std::size_t k, double dk, std::size_t l, double dl) {
    const double sk = x[k], sl = x[l];
    x[k] = p[k] + dk;
    x[l] = p[l] + dl;
    const double v = detail::checked_eval(f, x);
    x[k] = sk;
    x[l] = sl;
    return v;
  };

  const double f0 = detail::checked_eval(f, x);

  Vector grad(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (op[k] > 0.0 && om[k] < 0.0) {
      grad[k] = (eval_at(k, h[k]) - eval_at(k, -h[k])) / (2.0 * h[k]);
    } else if (op[k] > 0.0) {
      // second-order forward difference
      grad[k] = (-3.0 * f0 + 4.0 * eval_at(k, h[k]) - eval_at(k, 2.0 * h[k])) / (2.0 * h[k]);
    } else {
      grad[k] = (3.0 * f0 - 4.0 * eval_at(k, -h[k]) + eval_at(k, -2.0 * h[k])) / (2.0 * h[k]);
    }
  }

  Matrix hess(n, Vector(n, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    if (op[k] > 0.0 && om[k] < 0.0) {
      hess[k][k] = (eval_at(k, h[k]) - 2.0 * f0 + eval_at(k, -h[k])) / (h[k] * h[k]);
    } else if (op[k] > 0.0) {
      hess[k][k] = (f0 - 2.0 * eval_at(k, h[k]) + eval_at(k, 2.0 * h[k])) / (h[k] * h[k]);
    } else {
      hess[k][k] = (f0 - 2.0 * eval_at(k, -h[k]) + eval_at(k, -2.0 * h[k])) / (h[k] * h[k]);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k + 1; l < n; ++l) {
      // 2x2 divided difference on whatever offsets fit inside the box; a
      // zero offset reuses the centre point.
      auto at = [&](double dk, double dl) {
        if (dk == 0.0 && dl == 0.0) return f0;
        if (dk == 0.0) return eval_at(l, dl);
        if (dl == 0.0) return eval_at(k, dk);
        return eval_at2(k, dk, l, dl);
      };
      const double v = (at(op[k], op[l]) - at(op[k], om[l]) - at(om[k], op[l]) + at(om[k], om[l])) /
                       ((op[k] - om[k]) * (op[l] - om[l]));
      hess[k][l] = hess[l][k] = v;
    }
  }
  // symmetry holds by construction; the average keeps it exact under rounding
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = k + 1; l < n; ++l) {
      const double s = 0.5 * (hess[k][l] + hess[l][k]);
      hess[k][l] = hess[l][k] = s;
    }
  return {std::move(grad), std::move(hess)};
}

inline std::pair<Vector, Matrix> numeric_derivatives(const TargetFunction& f,
                                                     std::span<const double> p) {
  return numeric_derivatives(f, p, {}, {});
}

inline Vector gradient_at(const TargetFunction& f, std::span<const double> p) {
  if (f.gradient) return f.gradient(p);
  return numeric_derivatives(f, p).first;
}

inline Matrix hessian_at(const TargetFunction& f, std::span<const double> p) {
  if (f.hessian) return f.hessian(p);
  return numeric_derivatives(f, p).second;
}

/// g(x) = -f(x), with the monotone directions, the coordinate inverse and the
/// derivatives negated consistently. Right tails of f become left tails of g.
inline TargetFunction negate_target(const TargetFunction& f) {
  TargetFunction g;
  g.dimension = f.dimension;
  g.monotone_signs.reserve(f.monotone_signs.size());
  for (int s : f.monotone_signs) g.monotone_signs.push_back(-s);
  g.evaluate = [f = f.evaluate](std::span<const double> x) { return -f(x); };
  if (f.coordinate_inverse) {
    g.coordinate_inverse = [inv = f.coordinate_inverse](std::size_t i, std::span<const double> x,
                                                        double z) { return inv(i, x, -z); };
  }
  if (f.gradient) {
    g.gradient = [grad = f.gradient](std::span<const double> x) {
      Vector v = grad(x);
      for (double& e : v) e = -e;
      return v;
    };
  }
  if (f.hessian) {
    g.hessian = [hess = f.hessian](std::span<const double> x) {
      Matrix m = hess(x);
      for (auto& row : m)
        for (double& e : row) e = -e;
      return m;
    };
  }
  return g;
}

// ---------------------------------------------------------------------------
// Built-in targets
// ---------------------------------------------------------------------------

/// h(x) = sum of the coordinates.
inline TargetFunction sum_target(std::size_t n) {
  if (n < 1) throw ConfigError("sum_target: n must be >= 1");
  TargetFunction f;
  f.dimension = n;
  f.monotone_signs.assign(n, 1);
  f.evaluate = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  };
  f.coordinate_inverse = [](std::size_t i, std::span<const double> x, double z) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k)
      if (k != i) s += x[k];
    return z - s;
  };
  f.gradient = [n](std::span<const double>) { return Vector(n, 1.0); };
  f.hessian = [n](std::span<const double>) { return Matrix(n, Vector(n, 0.0)); };
  return f;
}

/// h(x) = product of the coordinates (nonnegative variables).
inline TargetFunction product_target(std::size_t n) {
  if (n < 1) throw ConfigError("product_target: n must be >= 1");
  TargetFunction f;
  f.dimension = n;
  f.monotone_signs.assign(n, 1);
  f.evaluate = [](std::span<const double> x) {
    double p = 1.0;
    for (double v : x) p *= v;
    return p;
  };
  f.gradient = [](std::span<const double> x) {
    Vector g(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      double p = 1.0;
      for (std::size_t j = 0; j < x.size(); ++j)
        if (j != k) p *= x[j];
      g[k] = p;
    }
    return g;
  };
  f.hessian = [](std::span<const double> x) {
    const std::size_t n = x.size();
    Matrix h(n, Vector(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        double p = 1.0;
        for (std::size_t k = 0; k < n; ++k)
          if (k != i && k != j) p *= x[k];
        h[i][j] = h[j][i] = p;
      }
    return h;
  };
  // The target is affine in each coordinate, so the two-evaluation inverse is
  // exact; leaving coordinate_inverse unset routes through it.
  return f;
}

/// System unavailability target z = 1 - alpha * x1 x2 x3 on [beta, 1]^3.
/// The whole range has width alpha (1 - beta^3), about 3e-4 in the standby
/// system case, so the product is accumulated in log space and recombined
/// with expm1 to keep full relative precision on z.
struct ReliabilityTarget {
  double alpha = 1.0;
  double beta = 0.5;
  TargetFunction target;
  JointModel model;
};

inline ReliabilityTarget reliability_target(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("reliability_target: alpha must be in (0,1]");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("reliability_target: beta must be in (0,1)");
  ReliabilityTarget r;
  r.alpha = alpha;
  r.beta = beta;
  r.model = uniform_box(3, beta, 1.0);
  TargetFunction f;
  f.dimension = 3;
  f.monotone_signs.assign(3, -1);
  f.evaluate = [alpha](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += std::log1p(v - 1.0);
    return (1.0 - alpha) - alpha * std::expm1(s);
  };
  // Affine in each coordinate, so the two-evaluation inverse applies.
  f.gradient = [alpha](std::span<const double> x) {
    Vector g(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      double p = 1.0;
      for (std::size_t j = 0; j < x.size(); ++j)
        if (j != k) p *= x[j];
      g[k] = -alpha * p;
    }
    return g;
  };
  f.hessian = [alpha](std::span<const double> x) {
    const std::size_t n = x.size();
    Matrix h(n, Vector(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        double p = 1.0;
        for (std::size_t k = 0; k < n; ++k)
          if (k != i && k != j) p *= x[k];
        h[i][j] = h[j][i] = -alpha * p;
      }
    return h;
  };
  r.target = std::move(f);
  return r;
}

// ---------------------------------------------------------------------------
// Tail specification
// ---------------------------------------------------------------------------

/// Which tail of z is simulated and how deep it reaches. The left tail is
/// (z_min, z_min + epsilon], the right tail (z_max - epsilon, z_max].
struct TailSpec {
  TailSide side = TailSide::left;
  double epsilon = 0.0;
  double z_min = 0.0;
  double z_max = 0.0;
};

/// Corner of the variable box where h attains its minimum (per-coordinate
/// monotone directions decide which face each coordinate sits on).
inline std::vector<double> low_corner(const TargetFunction& f, const JointModel& model) {
  std::vector<double> c(f.dimension);
  for (std::size_t k = 0; k < f.dimension; ++k)
    c[k] = f.monotone_signs[k] > 0 ? model.variables[k].lower : model.variables[k].upper;
  return c;
}

inline std::vector<double> high_corner(const TargetFunction& f, const JointModel& model) {
  std::vector<double> c(f.dimension);
  for (std::size_t k = 0; k < f.dimension; ++k)
    c[k] = f.monotone_signs[k] > 0 ? model.variables[k].upper : model.variables[k].lower;
  return c;
}

inline TailSpec make_tail_spec(const TargetFunction& f, const JointModel& model, TailSide side,
                               double epsilon) {
  if (f.dimension != model.dimension()) throw ConfigError("target/model dimension mismatch");
  if (f.monotone_signs.size() != f.dimension) throw ConfigError("monotone_signs size mismatch");
  TailSpec spec;
  spec.side = side;
  spec.epsilon = epsilon;
  spec.z_min = f.evaluate(low_corner(f, model));
  spec.z_max = f.evaluate(high_corner(f, model));
  if (!(epsilon > 0.0) || !(epsilon < spec.z_max - spec.z_min)) {
    throw ConfigError("tail spec: epsilon must satisfy 0 < epsilon < range width");
  }
  return spec;
}

inline bool in_tail(const TailSpec& spec, double z) {
  return spec.side == TailSide::left ? z <= spec.z_min + spec.epsilon
                                     : z > spec.z_max - spec.epsilon;
}

/// Tail spec for -f corresponding to `spec` on f: sides swap, bounds mirror.
inline TailSpec mirror_tail_spec(const TailSpec& spec) {
  TailSpec m;
  m.side = spec.side == TailSide::left ? TailSide::right : TailSide::left;
  m.epsilon = spec.epsilon;
  m.z_min = -spec.z_max;
  m.z_max = -spec.z_min;
  return m;
}

}  // namespace tailsim
