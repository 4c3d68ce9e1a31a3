#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "tailsim/errors.hpp"
#include "tailsim/sample.hpp"
#include "tailsim/target.hpp"

namespace tailsim {

struct CdfPoint {
  double z = 0.0;
  double cdf = 0.0;     // estimate of F_Z(z)
  double weight = 0.0;  // total score carried by this z (ties merged)
};

/// Weighted tail CDF assembled from scored draws. For the left tail the
/// estimates are running score sums divided by m_total; for the right tail
/// they are one minus the mass still above each point. tail_mass is the
/// estimate of P(Z in tail).
struct TailCdf {
  TailSide side = TailSide::left;
  std::size_t m_total = 0;
  double tail_mass = 0.0;
  std::vector<CdfPoint> points;
};

/// Sorts draws by z (ties merged by summing scores) and accumulates the
/// scored CDF estimates. m_total includes rejected draws when the sampler
/// had any; scores carry no 1/m factor, the division happens here.
inline TailCdf assemble_tail_cdf(std::span<const WeightedPoint> points, std::size_t m_total,
                                 TailSide side) {
  if (points.empty()) throw std::runtime_error("no tail hits: cannot assemble a tail cdf");
  if (m_total < points.size())
    throw ConfigError("assemble_tail_cdf: m_total smaller than the number of points");

  std::vector<CdfPoint> pts;
  pts.reserve(points.size());
  for (const auto& p : points) pts.push_back({p.z, 0.0, p.score});
  std::sort(pts.begin(), pts.end(), [](const CdfPoint& a, const CdfPoint& b) { return a.z < b.z; });

  std::vector<CdfPoint> merged;
  merged.reserve(pts.size());
  for (const auto& p : pts) {
    if (!merged.empty() && merged.back().z == p.z)
      merged.back().weight += p.weight;
    else
      merged.push_back(p);
  }

  double total = 0.0;
  for (const auto& p : merged) total += p.weight;

  TailCdf out;
  out.side = side;
  out.m_total = m_total;
  out.tail_mass = total / static_cast<double>(m_total);
  out.points = std::move(merged);

  const double m = static_cast<double>(m_total);
  if (side == TailSide::left) {
    double acc = 0.0;
    for (auto& p : out.points) {
      acc += p.weight;
      p.cdf = acc / m;
    }
  } else {
    double above = total;
    for (auto& p : out.points) {
      above -= p.weight;
      p.cdf = 1.0 - above / m;
    }
  }
  return out;
}

/// CDF of Z conditioned on the tail: the same points with self-normalised
/// estimates in [0, 1]. Useful for comparing tail shapes across methods and
/// against exact conditional curves.
inline TailCdf conditional(const TailCdf& cdf) {
  TailCdf out;
  out.side = cdf.side;
  out.m_total = cdf.m_total;
  out.tail_mass = 1.0;
  out.points = cdf.points;
  double total = 0.0;
  for (const auto& p : cdf.points) total += p.weight;
  double acc = 0.0;
  for (auto& p : out.points) {
    acc += p.weight;
    p.cdf = acc / total;
  }
  return out;
}

/// Combines two runs over the same tail into the assembly one big run would
/// have produced (weighted accumulation is associative).
inline TailCdf merge_tail_cdfs(const TailCdf& a, const TailCdf& b) {
  if (a.side != b.side) throw ConfigError("merge_tail_cdfs: sides differ");
  std::vector<WeightedPoint> pts;
  pts.reserve(a.points.size() + b.points.size());
  for (const auto& p : a.points) pts.push_back({p.z, p.weight, {}});
  for (const auto& p : b.points) pts.push_back({p.z, p.weight, {}});
  return assemble_tail_cdf(pts, a.m_total + b.m_total, a.side);
}

/// Smallest interpolated z with cdf estimate >= p (linear between points).
inline double quantile(const TailCdf& cdf, double p) {
  const auto& pts = cdf.points;
  if (pts.empty() || p < pts.front().cdf || p > pts.back().cdf)
    throw std::runtime_error("quantile outside simulated tail");
  auto it = std::lower_bound(pts.begin(), pts.end(), p,
                             [](const CdfPoint& a, double v) { return a.cdf < v; });
  if (it == pts.begin()) return it->z;
  const auto lo = *(it - 1);
  const auto hi = *it;
  if (!(hi.cdf > lo.cdf)) return hi.z;
  return lo.z + (p - lo.cdf) * (hi.z - lo.z) / (hi.cdf - lo.cdf);
}

/// One-sided interval (0, z*) with P(Z <= z*) approximately `level`, read off
/// a right-tail CDF.
inline std::pair<double, double> one_sided_interval(const TailCdf& cdf, double level) {
  if (cdf.side != TailSide::right)
    throw ConfigError("one_sided_interval: needs a right-tail cdf");
  return {0.0, quantile(cdf, level)};
}

/// Kolmogorov-style distance between the assembled estimates and an exact
/// curve, evaluated at the assembled points.
inline double sup_distance(const TailCdf& cdf, const std::function<double(double)>& oracle) {
  double sup = 0.0;
  for (const auto& p : cdf.points) sup = std::max(sup, std::fabs(p.cdf - oracle(p.z)));
  return sup;
}

}  // namespace tailsim
