#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kfrev/date.hpp"
#include "kfrev/kalman.hpp"
#include "kfrev/market_data.hpp"

namespace kfrev {

/// Reversal shorts names trading above their filtered value. Literal keeps the raw
/// normalized gap (close - fair) / mid, which positions for momentum instead.
enum class SignMode { Reversal, Literal };

/// Which filter estimate stands in for the fair value of today's close.
enum class FairValueSource { Posterior, Prior };

std::string_view sign_mode_name(SignMode mode);
std::optional<SignMode> parse_sign_mode(std::string_view text);
std::string_view fair_value_name(FairValueSource source);
std::optional<FairValueSource> parse_fair_value(std::string_view text);

/// Expected next-day return from the gap between price and fair value:
///   reversal: -(close - fair) / (0.5 * (close + fair))
/// Throws std::invalid_argument unless both inputs are finite and positive.
double reversal_forecast(double close, double fair_value, SignMode mode = SignMode::Reversal);

struct ForecastPoint {
  std::string instrument_id;
  Date date;
  double close;
  double fair_value;
  double raw_forecast;
};

/// date -> instrument -> forecast for one market.
using ForecastPanel = std::map<Date, std::map<std::string, ForecastPoint>>;

/// Filter output for one instrument, one step per observed session.
struct FilteredSeries {
  std::vector<std::size_t> sessions;
  std::vector<kalman::LocalLevelStep> steps;
};

/// Filters the observed closes of `series`; missing sessions are skipped, not imputed.
FilteredSeries filter_aligned(const AlignedSeries& series, const kalman::LocalLevelConfig& config);

struct SignalConfig {
  /// An observation contributes once the filter has consumed at least this many
  /// observations of that instrument, counting the current one.
  std::size_t warmup = 20;
  SignMode sign = SignMode::Reversal;
  FairValueSource fair_value = FairValueSource::Posterior;
};

ForecastPanel forecast_panel(std::span<const AlignedSeries> series,
                             std::span<const FilteredSeries> filtered, const SignalConfig& config);

/// `date,instrument,close,c_kalman,raw_forecast`.
void write_panel_csv(std::ostream& out, const ForecastPanel& panel);

}  // namespace kfrev
