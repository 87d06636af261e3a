#include "sbs/model.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "sbs/error.hpp"

namespace sbs {

double ModelParams::reward_sum() const { return std::accumulate(rewards.begin(), rewards.end(), 0.0); }

void ModelParams::validate() const {
  if (rewards.empty()) throw ValidationError("model: at least one arm required");
  for (std::size_t k = 0; k < rewards.size(); ++k) {
    const double p = rewards[k];
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
      throw ValidationError(fmt::format("model: p_{} = {} is not a probability", k + 1, p));
  }
  if (rewards.size() >= 2 && rewards[0] == rewards[1])
    throw TiedBestArmError(fmt::format("model: p_1 = p_2 = {}; the best arm must be unique", rewards[0]));
  for (std::size_t k = 1; k < rewards.size(); ++k) {
    if (rewards[k] > rewards[k - 1] || (k == 1 && rewards[k] >= rewards[0]))
      throw ValidationError("model: rewards must satisfy p_1 > p_2 >= ... >= p_K");
  }
  if (!(exploration >= 0.0 && exploration <= 1.0))
    throw ValidationError(fmt::format("model: exploration mu = {} outside [0, 1]", exploration));
  if (!(clock_rate > 0.0) || !std::isfinite(clock_rate))
    throw ValidationError(fmt::format("model: clock rate lambda = {} must be positive", clock_rate));
}

}  // namespace sbs
