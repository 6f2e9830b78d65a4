#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "kfrev/date.hpp"

namespace kfrev::kalman {

/// Linear-Gaussian state-space model
///
///   state:       x_k = transition * x_{k-1} + control * u_k + w,  w ~ N(0, process_noise)
///   measurement: z_k = observation * x_k + v,                    v ~ N(0, measurement_noise)
///
/// `control` is optional; when present every predict() call must supply u.
struct FilterModel {
  Eigen::MatrixXd transition;
  Eigen::MatrixXd observation;
  std::optional<Eigen::MatrixXd> control;
  Eigen::MatrixXd process_noise;
  Eigen::MatrixXd measurement_noise;

  Eigen::Index state_dim() const { return transition.rows(); }
  Eigen::Index measurement_dim() const { return observation.rows(); }

  /// Throws ModelError on inconsistent dimensions, asymmetric or indefinite
  /// process noise, or measurement noise that is not positive definite.
  void validate() const;

  /// Scalar random-walk-plus-noise model: transition = observation = 1.
  static FilterModel local_level(double process_var, double measurement_var);
};

/// Posterior mean and covariance after `step` updates.
struct FilterState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::size_t step = 0;
};

struct Prediction {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Everything one predict/update cycle produced.
struct StepRecord {
  Eigen::VectorXd prior_mean;
  Eigen::MatrixXd prior_covariance;
  Eigen::VectorXd innovation;             // z - H x_prior
  Eigen::MatrixXd innovation_covariance;  // H P_prior H' + R
  Eigen::MatrixXd gain;
  Eigen::VectorXd posterior_mean;
  Eigen::MatrixXd posterior_covariance;
  Eigen::VectorXd residual;               // z - H x_post
};

Prediction predict(const FilterState& state, const FilterModel& model,
                   const std::optional<Eigen::VectorXd>& control_input = std::nullopt);

/// Uses the simple covariance form (I - K H) P, symmetrized. Throws ModelError on a
/// non-finite measurement, a non-positive-definite innovation covariance, or a
/// posterior covariance whose smallest eigenvalue is below -1e-9.
StepRecord update(const Prediction& prior, const Eigen::VectorXd& measurement,
                  const FilterModel& model);

std::pair<FilterState, StepRecord> step(
    const FilterState& state, const Eigen::VectorXd& measurement, const FilterModel& model,
    const std::optional<Eigen::VectorXd>& control_input = std::nullopt);

/// Parameters of the scalar local-level filter run over close prices.
struct LocalLevelConfig {
  double process_var = 1.0;
  double measurement_var = 1.0;
  double initial_var = 1e4;
};

/// Scalar view of a StepRecord.
struct LocalLevelStep {
  double prior_mean;
  double prior_var;
  double innovation;
  double innovation_var;
  double gain;
  double posterior_mean;
  double posterior_var;
  double residual;
};

/// Runs the local-level filter over `prices`, one record per price. The state starts
/// at the first price with variance `initial_var`. Throws std::invalid_argument for
/// empty input, non-positive or non-finite prices, or invalid variances.
std::vector<LocalLevelStep> filter_series(std::span<const double> prices,
                                          const LocalLevelConfig& config);

/// Limit of the scalar gain recursion K = (P + q) / (P + q + r), P <- (1 - K)(P + q).
double steady_state_gain(double process_var, double measurement_var);

/// Debug dump: `date,x_prior,P_prior,y,S,K,x_post,P_post`.
void write_steps_csv(std::ostream& out, std::span<const Date> dates,
                     std::span<const LocalLevelStep> steps);

}  // namespace kfrev::kalman
