#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kfrev/date.hpp"

namespace kfrev {

/// PnL of one execution leg, dated on the session its exit price prints.
struct DailyPnL {
  Date date;
  Date signal_date;
  double pnl = 0.0;
  double gross = 0.0;
  double rog_bps = 0.0;
  std::size_t n_names = 0;
};

struct SummaryStats {
  double mean_rog_bps = 0.0;
  double stdev_rog_bps = 0.0;
  double sharpe_annualized = 0.0;
  double t_stat = 0.0;
  std::size_t n_days = 0;
  double max_drawdown_bps = 0.0;
  double cum_rog_bps = 0.0;
};

/// Sample sigma (n - 1). With zero dispersion, Sharpe and t are +/-infinity for a
/// nonzero mean and 0 otherwise. Drawdown is measured on the arithmetic running sum,
/// which starts from 0. Throws std::invalid_argument on empty input.
SummaryStats summarize(std::span<const double> rog_bps, double periods_per_year = 252.0);
SummaryStats summarize(std::span<const DailyPnL> daily, double periods_per_year = 252.0);

struct CurvePoint {
  Date date;
  double cum_rog_bps;
};

std::vector<CurvePoint> cumulative_curve(std::span<const DailyPnL> daily);

/// Most negative distance below the running peak (peak starts at 0). Always <= 0.
double max_drawdown(std::span<const double> cumulative);

}  // namespace kfrev
