#include "kfrev/signal.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "kfrev/util.hpp"

namespace kfrev {

std::string_view sign_mode_name(SignMode mode) {
  return mode == SignMode::Reversal ? "reversal" : "literal";
}

std::optional<SignMode> parse_sign_mode(std::string_view text) {
  if (text == "reversal") return SignMode::Reversal;
  if (text == "literal") return SignMode::Literal;
  return std::nullopt;
}

std::string_view fair_value_name(FairValueSource source) {
  return source == FairValueSource::Posterior ? "posterior" : "prior";
}

std::optional<FairValueSource> parse_fair_value(std::string_view text) {
  if (text == "posterior") return FairValueSource::Posterior;
  if (text == "prior") return FairValueSource::Prior;
  return std::nullopt;
}

double reversal_forecast(double close, double fair_value, SignMode mode) {
  if (!std::isfinite(close) || !std::isfinite(fair_value) || close <= 0.0 || fair_value <= 0.0) {
    throw std::invalid_argument("reversal_forecast: prices must be finite and positive");
  }
  const double gap = (close - fair_value) / ((close + fair_value) * 0.5);
  return mode == SignMode::Reversal ? -gap : gap;
}

FilteredSeries filter_aligned(const AlignedSeries& series, const kalman::LocalLevelConfig& config) {
  FilteredSeries out;
  std::vector<double> closes;
  closes.reserve(series.observed_count());
  out.sessions.reserve(series.observed_count());
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (const auto& bar = series.at(i)) {
      out.sessions.push_back(i);
      closes.push_back(bar->close);
    }
  }
  if (!closes.empty()) out.steps = kalman::filter_series(closes, config);
  return out;
}

ForecastPanel forecast_panel(std::span<const AlignedSeries> series,
                             std::span<const FilteredSeries> filtered,
                             const SignalConfig& config) {
  if (series.size() != filtered.size()) {
    throw std::invalid_argument("forecast_panel: one filter output per series required");
  }
  if (config.warmup < 1) throw std::invalid_argument("forecast_panel: warmup must be >= 1");

  ForecastPanel panel;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const auto& f = filtered[i];
    if (f.sessions.size() != f.steps.size() || f.sessions.size() != s.observed_count()) {
      throw std::invalid_argument("forecast_panel: filter output of " + s.instrument_id() +
                                  " does not match its observed sessions");
    }
    for (std::size_t k = config.warmup - 1; k < f.steps.size(); ++k) {
      const Bar& bar = *s.at(f.sessions[k]);
      const double fair = config.fair_value == FairValueSource::Posterior
                              ? f.steps[k].posterior_mean
                              : f.steps[k].prior_mean;
      // A fair value driven non-positive by an extreme move has no defined forecast.
      if (!(fair > 0.0)) continue;
      panel[bar.date].emplace(s.instrument_id(),
                              ForecastPoint{s.instrument_id(), bar.date, bar.close, fair,
                                            reversal_forecast(bar.close, fair, config.sign)});
    }
  }
  return panel;
}

void write_panel_csv(std::ostream& out, const ForecastPanel& panel) {
  using util::format_double;
  out << "date,instrument,close,c_kalman,raw_forecast\n";
  for (const auto& [date, points] : panel) {
    for (const auto& [id, p] : points) {
      out << format_date(date) << ',' << id << ',' << format_double(p.close) << ','
          << format_double(p.fair_value) << ',' << format_double(p.raw_forecast) << '\n';
    }
  }
}

}  // namespace kfrev
