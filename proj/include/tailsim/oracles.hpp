#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "tailsim/errors.hpp"
#include "tailsim/estimator.hpp"
#include "tailsim/model.hpp"
#include "tailsim/random.hpp"
#include "tailsim/sample.hpp"
#include "tailsim/target.hpp"

namespace tailsim {

/// CDF of the sum of n independent U(0,1):
///   F(x) = (1/n!) sum_{r=0}^{floor(x)} (-1)^r C(n,r) (x-r)^n.
inline double irwin_hall_cdf(unsigned n, double x) {
  if (n < 1) throw ConfigError("irwin_hall_cdf: n must be >= 1");
  if (x <= 0.0) return 0.0;
  if (x >= static_cast<double>(n)) return 1.0;
  double sum = 0.0;
  double binom = 1.0;  // C(n, r)
  double sign = 1.0;
  const unsigned rmax = static_cast<unsigned>(std::floor(x));
  for (unsigned r = 0; r <= rmax; ++r) {
    sum += sign * binom * std::pow(x - r, static_cast<int>(n));
    sign = -sign;
    binom *= static_cast<double>(n - r) / static_cast<double>(r + 1);
  }
  double fact = 1.0;
  for (unsigned k = 2; k <= n; ++k) fact *= k;
  return sum / fact;
}

/// CDF of the product of n independent U(0,1):
///   F(x) = x sum_{i=0}^{n-1} (-log x)^i / i!,  F(0) = 0 by continuity.
inline double product_uniform_cdf(unsigned n, double x) {
  if (n < 1) throw ConfigError("product_uniform_cdf: n must be >= 1");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double l = -std::log(x);
  double term = 1.0, sum = 1.0;
  for (unsigned i = 1; i < n; ++i) {
    term *= l / i;
    sum += term;
  }
  return x * sum;
}

/// CDF of U = X1 X2 X3 with X_i iid U(beta, 1), on the piece
/// beta^3 <= u < beta^2. The textbook closed form divides a difference of
/// near-equal O(1) terms by (1-beta)^3, which at beta = 0.9999 cancels to
/// nothing in doubles. Substituting u = beta^3 e^d collapses the numerator
/// exactly to beta^3 (e^d (1 - d + d^2/2) - 1), whose bracket is the series
///   sum_{k>=3} (k-1)(k-2)/(2 k!) d^k,
/// so the value is computed to full relative precision.
inline double product_beta_uniform_cdf(double u, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("product_beta_uniform_cdf: beta in (0,1)");
  const double b3 = beta * beta * beta;
  const double b2 = beta * beta;
  if (u < b3 * (1.0 - 1e-12) || u >= b2)
    throw std::runtime_error("outside supported piece: need beta^3 <= u < beta^2");
  double d = std::log1p((u - b3) / b3);
  if (d < 0.0) d = 0.0;
  double term = d * d * d / 6.0;  // k = 3
  double g = term;
  for (unsigned k = 4; k <= 60; ++k) {
    term *= d * static_cast<double>(k - 1) / (static_cast<double>(k) * static_cast<double>(k - 3));
    g += term;
    if (term < 1e-18 * g) break;
  }
  const double w = 1.0 - beta;
  return b3 * g / (w * w * w);
}

/// CDF of the unavailability target Z = 1 - alpha U: F_Z(z) = 1 - F_U((1-z)/alpha).
inline double reliability_cdf(double z, double alpha, double beta) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("reliability_cdf: alpha in (0,1]");
  const double u = (1.0 - z) / alpha;
  return 1.0 - product_beta_uniform_cdf(u, beta);
}

struct RegionVolumes {
  double vol_tail = 0.0;
  double vol_region = 0.0;
};

/// Volumes of the exact tail set and of the simple covering region for the
/// product of three U(0,1). Right tail: region cut by the plane through the
/// symmetric level point, a corner simplex of volume 27 (1 - cbrt(1-eps))^3 / 6;
/// the tail volume is the upper product mass 1 - F(1-eps). Left tail: the
/// tail volume is F(eps) and the region is the min-corner set
/// {min x_i < cbrt(eps)} of volume 1 - (1 - cbrt(eps))^3.
inline RegionVolumes product_region_volumes(double epsilon, TailSide side) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("product_region_volumes: eps in (0,1)");
  RegionVolumes v;
  if (side == TailSide::right) {
    const double d = 1.0 - std::cbrt(1.0 - epsilon);
    v.vol_region = 27.0 * d * d * d / 6.0;
    v.vol_tail = 1.0 - product_uniform_cdf(3, 1.0 - epsilon);
  } else {
    const double t = std::cbrt(epsilon);
    v.vol_tail = product_uniform_cdf(3, epsilon);
    v.vol_region = 1.0 - (1.0 - t) * (1.0 - t) * (1.0 - t);
  }
  return v;
}

/// Small-eps expansion of the right-tail volume rejection proportion:
/// eps/4 + 4 eps^2 / 45. Documented validity eps <= 0.2.
inline double asymptotic_rejection(double epsilon) {
  return epsilon / 4.0 + 4.0 * epsilon * epsilon / 45.0;
}

struct BruteForceCdf {
  TailCdf cdf;
  std::vector<WeightedPoint> raw_hits;  // the tail draws themselves, for audits
  double tail_mass = 0.0;               // hits / M
  double std_error = 0.0;               // binomial standard error of tail_mass
  std::size_t hits = 0;
};

/// Ground-truth tail CDF by plain Monte Carlo at large M: draw the full box,
/// keep tail hits with unit weight. The caller must pick M large enough for
/// the tail probability at hand; below 100 hits the oracle refuses.
inline BruteForceCdf brute_force_tail_cdf(const TargetFunction& f, const JointModel& model,
                                          const TailSpec& spec, std::size_t M, const Rng& root) {
  if (M < 1) throw ConfigError("brute_force_tail_cdf: M must be >= 1");
  const std::size_t n = model.dimension();
  std::vector<WeightedPoint> hits;
  std::vector<double> x(n);
  Rng rng = root.split(0x0bf5);
  for (std::size_t j = 0; j < M; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      std::span<const double> prefix(x.data(), i);
      x[i] = model.variables[i].conditional_quantile(prefix, rng.uniform01());
    }
    const double z = f.evaluate(x);
    if (in_tail(spec, z)) hits.push_back({z, 1.0, x});
  }
  if (hits.size() < 100) throw std::runtime_error("oracle underpowered: fewer than 100 tail hits");
  BruteForceCdf out;
  out.hits = hits.size();
  out.tail_mass = static_cast<double>(hits.size()) / static_cast<double>(M);
  out.std_error = std::sqrt(out.tail_mass * (1.0 - out.tail_mass) / static_cast<double>(M));
  out.cdf = assemble_tail_cdf(hits, M, spec.side);
  out.raw_hits = std::move(hits);
  return out;
}

}  // namespace tailsim
