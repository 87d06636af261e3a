#pragma once

#include <cstdint>
#include <vector>

namespace sbs {

/// Memory state of one agent: 0 = no preference, k in 1..K = prefers arm k.
using Memory = std::uint32_t;

/// Bandit and dynamics parameters shared by every agent.
///
/// rewards[k-1] is the Bernoulli parameter of arm k. Arms must be ordered
/// with a strictly unique best arm: p_1 > p_2 >= ... >= p_K >= 0.
struct ModelParams {
  std::vector<double> rewards;
  double exploration = 0.0;  // mu
  double clock_rate = 1.0;   // lambda

  std::size_t num_arms() const { return rewards.size(); }
  /// p_k for k in 1..K.
  double reward(Memory arm) const { return rewards[arm - 1]; }
  double reward_sum() const;

  /// Throws ValidationError, or TiedBestArmError when p_1 == p_2.
  void validate() const;
};

}  // namespace sbs
