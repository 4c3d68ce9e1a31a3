#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tailsim/detail/numeric.hpp"
#include "tailsim/errors.hpp"
#include "tailsim/model.hpp"
#include "tailsim/no_rejection.hpp"
#include "tailsim/random.hpp"
#include "tailsim/sample.hpp"
#include "tailsim/target.hpp"

namespace tailsim {

// Sampler whose stage densities are reweighted by the downstream feasible
// mass, so that every draw carries the identical score: the total mass of
// the tail region under the true distribution.
//
// Stage i samples x_i proportional to f(x_i | prefix) * M_{i+1}(prefix, x_i)
// on its truncation interval, where M_{i+1} is the probability that the
// remaining variables complete the prefix into the tail. The recursion
// bottoms out at the last stage, whose mass is an exact CDF difference; the
// inner stages are tabulated by per-interval Simpson quadrature in
// probability space (u = F(x)), which removes any need for densities, and
// inverted through a monotone cubic interpolant.

struct EqualScoreTables {
  TargetFunction original_target;  // evaluates z for emitted points
  TargetFunction target;           // normalized (all-increasing) form
  JointModel model;
  TailSpec spec;  // normalized tail
  std::size_t resolution = 0;
  double score = 0.0;  // G1(U1) - G1(L1): identical weight of every draw
  double u_lo = 0.0, u_hi = 0.0;
  detail::MonotoneCubic stage1;  // cumulative stage-1 mass over u
};

namespace detail {

struct StageSlice {
  double u_lo = 0.0, u_hi = 0.0;
  double mass = 0.0;
  MonotoneCubic cum;
};

/// Probability that stages i..n-1 can be completed into the tail given the
/// prefix, under the true conditional distributions. Zero when the prefix
/// sits on the boundary where the feasible slice degenerates.
inline double stage_mass(const TargetFunction& f, const JointModel& model, const TailSpec& spec,
                         std::size_t i, std::vector<double>& prefix, std::size_t resolution);

/// Tabulates the cumulative of u -> stage_mass(i+1, prefix + Q_i(u)) over the
/// truncated u-range of stage i.
inline StageSlice tabulate_stage(const TargetFunction& f, const JointModel& model,
                                 const TailSpec& spec, std::size_t i, std::vector<double>& prefix,
                                 std::size_t resolution) {
  const auto [L, U] = sequential_bounds(f, model, spec, i, prefix);
  const auto& var = model.variables[i];
  StageSlice slice;
  slice.u_lo = var.conditional_cdf(prefix, L);
  slice.u_hi = var.conditional_cdf(prefix, U);
  if (!(slice.u_hi > slice.u_lo)) throw std::runtime_error("quadrature failure: empty stage slice");

  const std::size_t R = resolution;
  const double h = (slice.u_hi - slice.u_lo) / static_cast<double>(R);
  prefix.push_back(0.0);
  auto integrand = [&](double u) {
    prefix.back() = var.conditional_quantile(std::span<const double>(prefix.data(), i), u);
    const double v = stage_mass(f, model, spec, i + 1, prefix, resolution);
    if (!std::isfinite(v)) throw std::runtime_error("quadrature failure: non-finite stage mass");
    return v;
  };

  std::vector<double> us(R + 1), cum(R + 1);
  us[0] = slice.u_lo;
  cum[0] = 0.0;
  double g_left = integrand(slice.u_lo);
  for (std::size_t k = 0; k < R; ++k) {
    const double u_r = (k + 1 == R) ? slice.u_hi : slice.u_lo + h * static_cast<double>(k + 1);
    const double g_mid = integrand(0.5 * (us[k] + u_r));
    const double g_right = integrand(u_r);
    us[k + 1] = u_r;
    cum[k + 1] = cum[k] + (u_r - us[k]) / 6.0 * (g_left + 4.0 * g_mid + g_right);
    g_left = g_right;
  }
  prefix.pop_back();
  slice.mass = cum[R];
  slice.cum = MonotoneCubic(std::move(us), std::move(cum));
  return slice;
}

inline double stage_mass(const TargetFunction& f, const JointModel& model, const TailSpec& spec,
                         std::size_t i, std::vector<double>& prefix, std::size_t resolution) {
  const std::size_t n = f.dimension;
  const auto iv = tailsim::detail::truncation_interval(f, model, spec, i, prefix);
  if (!(iv.first < iv.second)) return 0.0;
  const auto& var = model.variables[i];
  if (i + 1 == n) {
    // last stage: the mass is an exact CDF difference
    return std::max(0.0, var.conditional_cdf(prefix, iv.second) -
                             var.conditional_cdf(prefix, iv.first));
  }
  return tabulate_stage(f, model, spec, i, prefix, resolution).mass;
}

}  // namespace detail

inline EqualScoreTables build_sampling_tables(const TargetFunction& f, const JointModel& model,
                                              const TailSpec& spec, std::size_t resolution) {
  if (resolution < 8) throw ConfigError("equal-score tables: resolution must be >= 8");
  if (f.dimension > 4) throw ConfigError("equal-score tables: supported for n <= 4");
  const auto norm = detail::normalize_problem(f, spec);
  EqualScoreTables t;
  t.original_target = f;
  t.target = norm.target;
  t.model = model;
  t.spec = norm.spec;
  t.resolution = resolution;
  std::vector<double> prefix;
  if (f.dimension == 1) {
    const auto [L, U] = sequential_bounds(t.target, model, t.spec, 0, prefix);
    const auto& var = model.variables[0];
    t.u_lo = var.conditional_cdf(prefix, L);
    t.u_hi = var.conditional_cdf(prefix, U);
    t.score = t.u_hi - t.u_lo;
    t.stage1 = detail::MonotoneCubic({t.u_lo, t.u_hi}, {0.0, t.score});
    return t;
  }
  auto slice = detail::tabulate_stage(t.target, model, t.spec, 0, prefix, resolution);
  t.u_lo = slice.u_lo;
  t.u_hi = slice.u_hi;
  t.score = slice.mass;
  t.stage1 = std::move(slice.cum);
  return t;
}

/// One draw with the tabulated stage densities. The emitted score is the
/// stage-1 table mass, the same number for every draw.
inline WeightedPoint draw_equal_score_sample(const EqualScoreTables& t, Rng& rng) {
  const std::size_t n = t.target.dimension;
  WeightedPoint pt;
  pt.x.resize(n);
  pt.score = t.score;
  std::vector<double> prefix;
  prefix.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& var = t.model.variables[i];
    double u;
    if (i + 1 == n) {
      const auto [L, U] = sequential_bounds(t.target, t.model, t.spec, i, prefix);
      const double FL = var.conditional_cdf(prefix, L);
      const double FU = var.conditional_cdf(prefix, U);
      u = FL + rng.uniform01() * (FU - FL);
    } else if (i == 0) {
      u = t.stage1.inverse(rng.uniform01() * t.score);
    } else {
      auto slice = detail::tabulate_stage(t.target, t.model, t.spec, i, prefix, t.resolution);
      u = slice.cum.inverse(rng.uniform01() * slice.mass);
    }
    const double xi = var.conditional_quantile(prefix, u);
    pt.x[i] = xi;
    prefix.push_back(xi);
  }
  pt.z = t.original_target.evaluate(pt.x);
  return pt;
}

/// Importance weight actually realised by a draw: the true conditional mass
/// divided by the density the tabulated scheme sampled from. With exact
/// tables this is the constant table score; the spread across draws measures
/// the quadrature and interpolation error of the tables.
inline double realized_score(const EqualScoreTables& t, std::span<const double> x) {
  const std::size_t n = t.target.dimension;
  double w = 1.0;
  std::vector<double> prefix;
  prefix.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& var = t.model.variables[i];
    if (i + 1 == n) {
      const auto [L, U] = sequential_bounds(t.target, t.model, t.spec, i, prefix);
      w *= var.conditional_cdf(prefix, U) - var.conditional_cdf(prefix, L);
    } else {
      const auto slice = (i == 0)
                             ? detail::StageSlice{t.u_lo, t.u_hi, t.score, t.stage1}
                             : detail::tabulate_stage(t.target, t.model, t.spec, i, prefix,
                                                      t.resolution);
      const double u = var.conditional_cdf(prefix, x[i]);
      // sampled density of u is C'(u) / mass; the true density of u is 1
      w *= slice.mass / slice.cum.derivative(u);
    }
    prefix.push_back(x[i]);
  }
  return w;
}

}  // namespace tailsim
