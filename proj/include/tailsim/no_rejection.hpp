#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "tailsim/errors.hpp"
#include "tailsim/model.hpp"
#include "tailsim/random.hpp"
#include "tailsim/sample.hpp"
#include "tailsim/target.hpp"

namespace tailsim {

namespace detail {

/// Samplers reduce an all-decreasing target to its negation, which is
/// increasing, and mirror the tail; bounds and draws are identical in
/// x-space, only the z bookkeeping flips.
struct NormalizedProblem {
  TargetFunction target;  // copy (possibly negated)
  TailSpec spec;
  bool negated = false;
};

inline NormalizedProblem normalize_problem(const TargetFunction& f, const TailSpec& spec) {
  if (f.all_decreasing()) return {negate_target(f), mirror_tail_spec(spec), true};
  return {f, spec, false};
}

inline std::optional<double> try_invert(const TargetFunction& f, std::size_t i,
                                        std::span<const double> x, double z) {
  try {
    const double t = invert_coordinate(f, i, x, z);
    if (std::isnan(t)) return std::nullopt;
    return t;
  } catch (const CoordinateInactive&) {
    return std::nullopt;  // the constraint does not bind this coordinate
  }
}

/// Simple index-parallel loop used by the run_* drivers. Results must be
/// written by index so the output is independent of the worker count.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
  if (jobs <= 1 || count < 2) {
    for (std::size_t j = 0; j < count; ++j) fn(j);
    return;
  }
  jobs = std::min(jobs, count);
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t t = 0; t < jobs; ++t) {
    workers.emplace_back([&, t] {
      for (std::size_t j = t; j < count; j += jobs) fn(j);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace detail

namespace detail {

/// Core of sequential_bounds: may return an empty interval (L >= U), which
/// arises only for prefixes on the exact boundary of feasibility.
inline std::pair<double, double> truncation_interval(const TargetFunction& f,
                                                     const JointModel& model,
                                                     const TailSpec& spec, std::size_t i,
                                                     std::span<const double> prefix) {
  const std::size_t n = f.dimension;
  if (i >= n || prefix.size() != i) throw ConfigError("sequential_bounds: bad stage or prefix");

  const double a_i = model.variables[i].lower;
  const double b_i = model.variables[i].upper;
  std::vector<double> x(n, 0.0);
  std::copy(prefix.begin(), prefix.end(), x.begin());

  auto fill_future = [&](bool at_low) {
    for (std::size_t k = i + 1; k < n; ++k) {
      const bool take_lower = (f.monotone_signs[k] > 0) == at_low;
      x[k] = take_lower ? model.variables[k].lower : model.variables[k].upper;
    }
  };
  auto self_corner = [&](bool at_low) {
    const bool take_lower = (f.monotone_signs[i] > 0) == at_low;
    return take_lower ? a_i : b_i;
  };

  double L = a_i, U = b_i;
  const int s_i = f.monotone_signs[i];

  // Constraint from the tail boundary, with the future at its most
  // favourable corner so the interval is as wide as possible.
  {
    const bool left = spec.side == TailSide::left;
    const double level = left ? spec.z_min + spec.epsilon : spec.z_max - spec.epsilon;
    fill_future(left);
    if (auto t = detail::try_invert(f, i, x, level)) {
      // left tail: h <= level caps x_i on its h-increasing side
      const bool upper_cap = left == (s_i > 0);
      if (upper_cap)
        U = std::min(U, *t);
      else
        L = std::max(L, *t);
    }
  }

  // Constraint from the moving extremum achievable given the prefix: the
  // other end of the feasible slice, computed literally with the future at
  // the opposite corner. It usually collapses onto the box bound.
  {
    const bool left = spec.side == TailSide::left;
    fill_future(left);
    x[i] = self_corner(left);
    const double reachable = f.evaluate(x);  // h(prefix, extremal completion)
    fill_future(!left);
    if (auto t = detail::try_invert(f, i, x, reachable)) {
      if (std::isfinite(*t)) {
        const bool lower_cut = left == (s_i > 0);
        if (lower_cut)
          L = std::max(L, *t);
        else
          U = std::min(U, *t);
      }
    }
  }

  return {L, U};
}

}  // namespace detail

/// Truncation interval for X_i given the values simulated so far, chosen as
/// the largest interval for which the tail remains reachable. The extremum
/// over the not-yet-simulated variables is taken at the box corner selected
/// by the monotone directions, which is exact for componentwise-monotone
/// targets. Throws "infeasible prefix" if the interval is empty, which cannot
/// happen when the earlier bounds were respected.
inline std::pair<double, double> sequential_bounds(const TargetFunction& f,
                                                   const JointModel& model, const TailSpec& spec,
                                                   std::size_t i, std::span<const double> prefix) {
  const auto iv = detail::truncation_interval(f, model, spec, i, prefix);
  if (!(iv.first < iv.second))
    throw std::runtime_error("infeasible prefix: empty truncation interval");
  return iv;
}

/// One guaranteed tail draw: simulate each X_i on its truncation interval by
/// inverse-CDF, accumulate the truncation mass as the score, and evaluate z.
inline WeightedPoint draw_sample(const TargetFunction& f, const JointModel& model,
                                 const TailSpec& spec, Rng& rng) {
  const auto norm = detail::normalize_problem(f, spec);
  const std::size_t n = f.dimension;
  WeightedPoint pt;
  pt.x.resize(n);
  pt.score = 1.0;
  std::vector<double> prefix;
  prefix.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [L, U] = sequential_bounds(norm.target, model, norm.spec, i, prefix);
    const auto& var = model.variables[i];
    const double FL = var.conditional_cdf(prefix, L);
    const double FU = var.conditional_cdf(prefix, U);
    const double mass = FU - FL;
    if (!(mass > 0.0)) throw std::runtime_error("infeasible prefix: zero truncation mass");
    const double xi = std::clamp(var.conditional_quantile(prefix, FL + rng.uniform01() * mass), L, U);
    pt.score *= mass;
    pt.x[i] = xi;
    prefix.push_back(xi);
  }
  pt.z = f.evaluate(pt.x);
  return pt;
}

/// m guaranteed tail draws. Every draw gets its own substream split from the
/// root generator, so the result is reproducible and independent of `jobs`.
inline SimulationResult run_tail_simulation(const TargetFunction& f, const JointModel& model,
                                            const TailSpec& spec, std::size_t m, const Rng& root,
                                            std::size_t jobs = 1) {
  if (m < 1) throw ConfigError("run_tail_simulation: sample size must be >= 1");
  SimulationResult out;
  out.points.resize(m);
  detail::parallel_for(m, jobs, [&](std::size_t j) {
    Rng stream = root.split(j);
    out.points[j] = draw_sample(f, model, spec, stream);
  });
  out.stats.m_total = m;
  out.stats.m_accepted = m;
  out.stats.count_rejection = 0.0;
  out.stats.volume_rejection = 0.0;  // proposal region and tail coincide
  return out;
}

}  // namespace tailsim
