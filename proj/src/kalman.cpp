#include "kfrev/kalman.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "kfrev/errors.hpp"
#include "kfrev/util.hpp"

namespace kfrev::kalman {

namespace {

constexpr double kPsdTolerance = 1e-9;

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  if (symmetric.rows() == 1) return symmetric(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

// Absolute tolerance for unit-scale covariances, relative for large ones.
double psd_floor(const Eigen::MatrixXd& m) {
  return -kPsdTolerance * std::max(1.0, m.cwiseAbs().maxCoeff());
}

bool is_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

std::string shape(const Eigen::MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

void FilterModel::validate() const {
  const Eigen::Index n = transition.rows();
  if (n == 0 || transition.cols() != n) {
    throw ModelError("transition must be square and non-empty, got " + shape(transition));
  }
  const Eigen::Index m = observation.rows();
  if (m == 0 || observation.cols() != n) {
    throw ModelError("observation must be m x " + std::to_string(n) + ", got " +
                     shape(observation));
  }
  if (control && control->rows() != n) {
    throw ModelError("control must have " + std::to_string(n) + " rows, got " + shape(*control));
  }
  if (process_noise.rows() != n || process_noise.cols() != n) {
    throw ModelError("process noise must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (measurement_noise.rows() != m || measurement_noise.cols() != m) {
    throw ModelError("measurement noise must be " + std::to_string(m) + "x" + std::to_string(m));
  }
  if (!is_symmetric(process_noise) || min_eigenvalue(symmetrized(process_noise)) <
                                          psd_floor(process_noise)) {
    throw ModelError("process noise must be symmetric positive semidefinite");
  }
  if (!is_symmetric(measurement_noise) ||
      Eigen::LLT<Eigen::MatrixXd>(measurement_noise).info() != Eigen::Success) {
    throw ModelError("measurement noise must be symmetric positive definite");
  }
}

FilterModel FilterModel::local_level(double process_var, double measurement_var) {
  FilterModel model{
      .transition = Eigen::MatrixXd::Identity(1, 1),
      .observation = Eigen::MatrixXd::Identity(1, 1),
      .control = std::nullopt,
      .process_noise = Eigen::MatrixXd::Constant(1, 1, process_var),
      .measurement_noise = Eigen::MatrixXd::Constant(1, 1, measurement_var),
  };
  model.validate();
  return model;
}

Prediction predict(const FilterState& state, const FilterModel& model,
                   const std::optional<Eigen::VectorXd>& control_input) {
  const Eigen::Index n = model.state_dim();
  if (state.mean.size() != n || state.covariance.rows() != n || state.covariance.cols() != n) {
    throw ModelError("state dimension does not match model");
  }
  if (model.control.has_value() != control_input.has_value()) {
    throw ModelError("control input must be given exactly when the model has a control matrix");
  }

  Prediction prior;
  prior.mean = model.transition * state.mean;
  if (model.control) {
    if (control_input->size() != model.control->cols()) {
      throw ModelError("control input has wrong dimension");
    }
    prior.mean += *model.control * *control_input;
  }
  prior.covariance = symmetrized(model.transition * state.covariance *
                                     model.transition.transpose() +
                                 model.process_noise);
  return prior;
}

StepRecord update(const Prediction& prior, const Eigen::VectorXd& measurement,
                  const FilterModel& model) {
  const Eigen::Index n = model.state_dim();
  if (prior.mean.size() != n || prior.covariance.rows() != n) {
    throw ModelError("prior dimension does not match model");
  }
  if (measurement.size() != model.measurement_dim()) {
    throw ModelError("measurement has wrong dimension");
  }
  if (!measurement.allFinite()) throw ModelError("non-finite measurement");

  const Eigen::MatrixXd& obs = model.observation;
  StepRecord rec;
  rec.prior_mean = prior.mean;
  rec.prior_covariance = prior.covariance;
  rec.innovation = measurement - obs * prior.mean;
  rec.innovation_covariance =
      symmetrized(obs * prior.covariance * obs.transpose() + model.measurement_noise);

  const Eigen::LLT<Eigen::MatrixXd> llt(rec.innovation_covariance);
  if (llt.info() != Eigen::Success) {
    throw ModelError("innovation covariance is not positive definite");
  }
  // K = P H' S^-1, computed as (S^-1 H P)' since S and P are symmetric.
  rec.gain = llt.solve(obs * prior.covariance).transpose();
  if (!rec.gain.allFinite()) throw ModelError("innovation covariance is numerically singular");

  rec.posterior_mean = prior.mean + rec.gain * rec.innovation;
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  rec.posterior_covariance = symmetrized((identity - rec.gain * obs) * prior.covariance);
  if (min_eigenvalue(rec.posterior_covariance) < psd_floor(rec.posterior_covariance)) {
    throw ModelError("posterior covariance lost positive semidefiniteness");
  }
  rec.residual = measurement - obs * rec.posterior_mean;
  return rec;
}

std::pair<FilterState, StepRecord> step(const FilterState& state,
                                        const Eigen::VectorXd& measurement,
                                        const FilterModel& model,
                                        const std::optional<Eigen::VectorXd>& control_input) {
  StepRecord rec = update(predict(state, model, control_input), measurement, model);
  FilterState next{rec.posterior_mean, rec.posterior_covariance, state.step + 1};
  return {std::move(next), std::move(rec)};
}

std::vector<LocalLevelStep> filter_series(std::span<const double> prices,
                                          const LocalLevelConfig& config) {
  if (prices.empty()) throw std::invalid_argument("filter_series: empty price sequence");
  if (!(config.process_var >= 0.0) || !(config.measurement_var > 0.0) ||
      !(config.initial_var >= 0.0) || !std::isfinite(config.process_var) ||
      !std::isfinite(config.measurement_var) || !std::isfinite(config.initial_var)) {
    throw std::invalid_argument("filter_series: need q >= 0, r > 0, P0 >= 0");
  }
  for (double p : prices) {
    if (!std::isfinite(p) || p <= 0.0) {
      throw std::invalid_argument("filter_series: prices must be finite and positive");
    }
  }

  const FilterModel model = FilterModel::local_level(config.process_var, config.measurement_var);
  FilterState state{Eigen::VectorXd::Constant(1, prices.front()),
                    Eigen::MatrixXd::Constant(1, 1, config.initial_var), 0};
  Eigen::VectorXd z(1);

  std::vector<LocalLevelStep> out;
  out.reserve(prices.size());
  for (double price : prices) {
    z(0) = price;
    auto [next, rec] = step(state, z, model);
    out.push_back(LocalLevelStep{
        .prior_mean = rec.prior_mean(0),
        .prior_var = rec.prior_covariance(0, 0),
        .innovation = rec.innovation(0),
        .innovation_var = rec.innovation_covariance(0, 0),
        .gain = rec.gain(0, 0),
        .posterior_mean = rec.posterior_mean(0),
        .posterior_var = rec.posterior_covariance(0, 0),
        .residual = rec.residual(0),
    });
    state = std::move(next);
  }
  return out;
}

double steady_state_gain(double process_var, double measurement_var) {
  if (!(process_var >= 0.0) || !(measurement_var > 0.0)) {
    throw std::invalid_argument("steady_state_gain: need q >= 0 and r > 0");
  }
  // Prior variance p at the fixed point solves p^2 - q p - q r = 0.
  const double q = process_var;
  const double r = measurement_var;
  const double prior_var = 0.5 * (q + std::sqrt(q * q + 4.0 * q * r));
  return prior_var / (prior_var + r);
}

void write_steps_csv(std::ostream& out, std::span<const Date> dates,
                     std::span<const LocalLevelStep> steps) {
  if (dates.size() != steps.size()) {
    throw std::invalid_argument("write_steps_csv: dates and steps differ in length");
  }
  using util::format_double;
  out << "date,x_prior,P_prior,y,S,K,x_post,P_post\n";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    out << format_date(dates[i]) << ',' << format_double(s.prior_mean) << ','
        << format_double(s.prior_var) << ',' << format_double(s.innovation) << ','
        << format_double(s.innovation_var) << ',' << format_double(s.gain) << ','
        << format_double(s.posterior_mean) << ',' << format_double(s.posterior_var) << '\n';
  }
}

}  // namespace kfrev::kalman
