#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sbs/model.hpp"

namespace sbs {

/// A point (y_0, ..., y_K) of the probability simplex.
using OdeState = std::vector<double>;

inline constexpr double kSimplexTol = 1e-9;
inline constexpr double kDefaultOdeStep = 1e-3;
inline constexpr double kMaxOdeStep = 0.01;

/// Mean-field drift:
///   dy_0 = -y_0 lambda (mu/K) sum_j p_j - y_0 lambda (1-mu) sum_j p_j y_j
///   dy_k =  y_0 lambda (mu/K) p_k + y_k lambda [(1-mu) p_k y_0 + sum_j (p_k - p_j) y_j]
/// Throws ValidationError when y is off the simplex by more than 1e-9.
std::vector<double> drift(std::span<const double> y, const ModelParams& params);

/// Fixed-step RK4 solution on the grid 0, h, 2h, ..., t_end with cubic
/// Hermite dense output.
class OdeTrajectory {
 public:
  OdeTrajectory(double step, std::vector<double> times, std::vector<OdeState> values,
                std::vector<std::vector<double>> slopes);

  double step() const { return step_; }
  double t_end() const { return times_.back(); }
  std::size_t size() const { return times_.size(); }
  double time(std::size_t idx) const { return times_[idx]; }
  const OdeState& value(std::size_t idx) const { return values_[idx]; }
  const OdeState& back() const { return values_.back(); }

  /// Interpolated state at t in [0, t_end].
  OdeState eta_at(double t) const;
  /// Single component; avoids allocating in hot loops.
  double eta_at(double t, std::size_t k) const;

  std::size_t renormalizations() const { return renormalizations_; }
  void set_renormalizations(std::size_t n) { renormalizations_ = n; }

 private:
  std::size_t segment(double t) const;

  double step_;
  std::vector<double> times_;
  std::vector<OdeState> values_;
  std::vector<std::vector<double>> slopes_;
  std::size_t renormalizations_ = 0;
};

/// Rejects h > 0.01 and non-finite states.
OdeTrajectory integrate(const OdeState& y0, const ModelParams& params, double t_end, double h = kDefaultOdeStep);

enum class BoundBranch { PositiveStart, ZeroStart };

/// Exponential lower bound on y_1(t) and exponential upper bound on y_0(t).
struct ConvergenceBound {
  double rate = 0.0;   // R = lambda * min{(1 - mu + mu/K) p_1, p_1 - p_2}
  double delay = 0.0;  // t_bar_c; zero for PositiveStart
  double c = 0.5;
  BoundBranch branch = BoundBranch::PositiveStart;
  double start_y0 = 0.0;
  double start_y1 = 0.0;
  std::size_t num_arms = 1;
  double y0_decay = 0.0;  // lambda (mu/K) sum_k p_k

  /// Logistic lower bound; defined for t >= delay (throws std::domain_error otherwise).
  double lower_bound_y1(double t) const;
  /// y_0(0) exp(-lambda (mu/K) sum p_k t).
  double upper_bound_y0(double t) const;
};

/// PositiveStart when y_1(0) > 0, ZeroStart when y_1(0) = 0 with y_0(0) > 0
/// and mu > 0; ValidationError otherwise.
ConvergenceBound convergence_bound(const ModelParams& params, std::span<const double> y0, double c);

}  // namespace sbs
