#include "sbs/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sbs/error.hpp"

namespace sbs {

namespace {

void check_simplex(std::span<const double> y, std::size_t num_arms) {
  if (y.size() != num_arms + 1)
    throw ValidationError(fmt::format("ode state has {} entries, expected K + 1 = {}", y.size(), num_arms + 1));
  double total = 0.0;
  for (double v : y) {
    if (!std::isfinite(v) || v < -kSimplexTol) throw ValidationError("ode state has a negative or non-finite entry");
    total += v;
  }
  if (std::abs(total - 1.0) > kSimplexTol)
    throw ValidationError(fmt::format("ode state sums to {}, not 1", total));
}

void drift_into(std::span<const double> y, const ModelParams& params, std::span<double> out) {
  const std::size_t num_arms = params.num_arms();
  const double lambda = params.clock_rate;
  const double mu = params.exploration;
  const double explore = mu / static_cast<double>(num_arms);

  double weighted = 0.0;   // sum_j p_j y_j
  double committed = 0.0;  // sum_j y_j
  for (std::size_t j = 1; j <= num_arms; ++j) {
    weighted += params.rewards[j - 1] * y[j];
    committed += y[j];
  }
  const double y0 = y[0];
  out[0] = -y0 * lambda * explore * params.reward_sum() - y0 * lambda * (1.0 - mu) * weighted;
  for (std::size_t k = 1; k <= num_arms; ++k) {
    const double p = params.rewards[k - 1];
    out[k] = y0 * lambda * explore * p + y[k] * lambda * ((1.0 - mu) * p * y0 + p * committed - weighted);
  }
}

}  // namespace

std::vector<double> drift(std::span<const double> y, const ModelParams& params) {
  params.validate();
  check_simplex(y, params.num_arms());
  std::vector<double> out(y.size());
  drift_into(y, params, out);
  return out;
}

OdeTrajectory::OdeTrajectory(double step, std::vector<double> times, std::vector<OdeState> values,
                             std::vector<std::vector<double>> slopes)
    : step_(step), times_(std::move(times)), values_(std::move(values)), slopes_(std::move(slopes)) {}

std::size_t OdeTrajectory::segment(double t) const {
  const std::size_t last = times_.size() - 2;
  auto idx = static_cast<std::size_t>(std::max(0.0, std::floor(t / step_)));
  idx = std::min(idx, last);
  while (idx < last && times_[idx + 1] < t) ++idx;
  while (idx > 0 && times_[idx] > t) --idx;
  return idx;
}

double OdeTrajectory::eta_at(double t, std::size_t k) const {
  if (!(t >= -1e-12 && t <= t_end() + 1e-9))
    throw std::out_of_range(fmt::format("eta_at({}) outside [0, {}]", t, t_end()));
  if (times_.size() == 1) return values_[0][k];
  t = std::clamp(t, 0.0, t_end());
  const std::size_t idx = segment(t);
  const double width = times_[idx + 1] - times_[idx];
  const double s = (t - times_[idx]) / width;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * values_[idx][k] + h10 * width * slopes_[idx][k] + h01 * values_[idx + 1][k] +
         h11 * width * slopes_[idx + 1][k];
}

OdeState OdeTrajectory::eta_at(double t) const {
  OdeState out(values_.front().size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = eta_at(t, k);
  return out;
}

OdeTrajectory integrate(const OdeState& y0, const ModelParams& params, double t_end, double h) {
  params.validate();
  check_simplex(y0, params.num_arms());
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("integrate: t_end must be positive");
  if (!(h > 0.0)) throw ValidationError("integrate: step must be positive");
  if (h > kMaxOdeStep) throw ValidationError(fmt::format("integrate: step {} exceeds {}", h, kMaxOdeStep));

  const auto steps = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
  const std::size_t dim = y0.size();

  std::vector<double> times;
  std::vector<OdeState> values;
  std::vector<std::vector<double>> slopes;
  times.reserve(steps + 1);
  values.reserve(steps + 1);
  slopes.reserve(steps + 1);

  OdeState y = y0;
  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  drift_into(y, params, k1);
  times.push_back(0.0);
  values.push_back(y);
  slopes.push_back(k1);

  std::size_t renormalizations = 0;
  for (std::size_t s = 1; s <= steps; ++s) {
    const double t_prev = times.back();
    const double t_next = s == steps ? t_end : static_cast<double>(s) * h;
    const double dt = t_next - t_prev;

    for (std::size_t k = 0; k < dim; ++k) tmp[k] = y[k] + 0.5 * dt * k1[k];
    drift_into(tmp, params, k2);
    for (std::size_t k = 0; k < dim; ++k) tmp[k] = y[k] + 0.5 * dt * k2[k];
    drift_into(tmp, params, k3);
    for (std::size_t k = 0; k < dim; ++k) tmp[k] = y[k] + dt * k3[k];
    drift_into(tmp, params, k4);
    for (std::size_t k = 0; k < dim; ++k) y[k] += dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);

    double total = 0.0;
    for (double v : y) {
      if (!std::isfinite(v)) throw std::runtime_error(fmt::format("integrate: non-finite state at t = {}", t_next));
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      for (double& v : y) v /= total;
      ++renormalizations;
    }

    drift_into(y, params, k1);
    times.push_back(t_next);
    values.push_back(y);
    slopes.push_back(k1);
  }

  if (renormalizations > std::max<std::size_t>(1, steps / 1'000'000))
    spdlog::warn("integrate: simplex renormalization triggered {} times in {} steps", renormalizations, steps);

  OdeTrajectory traj(h, std::move(times), std::move(values), std::move(slopes));
  traj.set_renormalizations(renormalizations);
  return traj;
}

double ConvergenceBound::lower_bound_y1(double t) const {
  if (t < delay) throw std::domain_error(fmt::format("bound defined for t >= {}, got {}", delay, t));
  double base_odds = 0.0;
  if (branch == BoundBranch::PositiveStart) {
    if (start_y1 >= 1.0) return 1.0;
    base_odds = start_y1 / (1.0 - start_y1);
  } else {
    const double a = (1.0 - c) * start_y0;
    base_odds = a / (static_cast<double>(num_arms) - a);
  }
  const double odds = base_odds * std::exp(rate * (t - delay));
  if (std::isinf(odds)) return 1.0;
  return 1.0 - 1.0 / (odds + 1.0);
}

double ConvergenceBound::upper_bound_y0(double t) const { return start_y0 * std::exp(-y0_decay * t); }

ConvergenceBound convergence_bound(const ModelParams& params, std::span<const double> y0, double c) {
  params.validate();
  check_simplex(y0, params.num_arms());
  if (!(c > 0.0 && c < 1.0)) throw ValidationError(fmt::format("convergence bound: c = {} outside (0, 1)", c));

  const auto num_arms = params.num_arms();
  const double lambda = params.clock_rate;
  const double mu = params.exploration;
  const double p1 = params.rewards[0];
  const double p2 = num_arms >= 2 ? params.rewards[1] : 0.0;

  ConvergenceBound b;
  b.c = c;
  b.num_arms = num_arms;
  b.start_y0 = y0[0];
  b.start_y1 = y0[1];
  b.rate = lambda * std::min((1.0 - mu + mu / static_cast<double>(num_arms)) * p1, p1 - p2);
  b.y0_decay = lambda * (mu / static_cast<double>(num_arms)) * params.reward_sum();

  if (y0[1] > 0.0) {
    b.branch = BoundBranch::PositiveStart;
    b.delay = 0.0;
  } else {
    if (!(y0[0] > 0.0)) throw ValidationError("convergence bound: needs y_1(0) > 0 or y_0(0) > 0");
    if (!(mu > 0.0)) throw ValidationError("convergence bound: y_1(0) = 0 requires mu > 0");
    if (!(b.y0_decay > 0.0)) throw ValidationError("convergence bound: sum of rewards must be positive");
    b.branch = BoundBranch::ZeroStart;
    b.delay = std::log(1.0 / c) / b.y0_decay;
  }
  return b;
}

}  // namespace sbs
