#pragma once

#include <cstddef>
#include <vector>

#include "tailsim/errors.hpp"
#include "tailsim/model.hpp"
#include "tailsim/no_rejection.hpp"
#include "tailsim/random.hpp"
#include "tailsim/sample.hpp"
#include "tailsim/target.hpp"

namespace tailsim {

/// Plain Monte Carlo baseline: sample the whole box, keep tail hits with unit
/// score. The accepted fraction estimates the tail probability, and the
/// rejection proportion approaches one as the tail narrows.
inline SimulationResult run_standard_mc(const TargetFunction& f, const JointModel& model,
                                        const TailSpec& spec, std::size_t m, const Rng& root,
                                        std::size_t jobs = 1) {
  if (m < 1) throw ConfigError("run_standard_mc: sample size must be >= 1");
  const std::size_t n = model.dimension();

  struct Slot {
    WeightedPoint pt;
    bool accepted = false;
  };
  std::vector<Slot> slots(m);

  detail::parallel_for(m, jobs, [&](std::size_t j) {
    Rng rng = root.split(j);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::span<const double> prefix(x.data(), i);
      x[i] = model.variables[i].conditional_quantile(prefix, rng.uniform01());
    }
    const double z = f.evaluate(x);
    if (in_tail(spec, z)) {
      slots[j].accepted = true;
      slots[j].pt = {z, 1.0, std::move(x)};
    }
  });

  SimulationResult out;
  for (auto& slot : slots)
    if (slot.accepted) out.points.push_back(std::move(slot.pt));
  out.stats.m_total = m;
  out.stats.m_accepted = out.points.size();
  out.stats.count_rejection =
      static_cast<double>(m - out.stats.m_accepted) / static_cast<double>(m);
  out.stats.volume_rejection = out.stats.count_rejection;
  return out;
}

}  // namespace tailsim
