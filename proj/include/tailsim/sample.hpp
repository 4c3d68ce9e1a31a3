#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace tailsim {

/// One simulated point: target value, importance score (the probability mass
/// of the truncation box under the true distribution), and the basic-variable
/// draw kept for audits.
struct WeightedPoint {
  double z = 0.0;
  double score = 1.0;
  std::vector<double> x;
};

/// Draw bookkeeping for a whole run. count_rejection is (m - m*) / m.
/// volume_rejection, when available, is the estimated fraction of the
/// proposal region's probability mass that falls outside the tail:
/// 1 - (accepted score sum) / (total score sum).
struct RejectionStats {
  std::size_t m_total = 0;
  std::size_t m_accepted = 0;
  double count_rejection = 0.0;
  std::optional<double> volume_rejection;
};

struct SimulationResult {
  std::vector<WeightedPoint> points;
  RejectionStats stats;
};

}  // namespace tailsim
