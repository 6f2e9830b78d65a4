#include "kfrev/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kfrev {

SummaryStats summarize(std::span<const double> rog_bps, double periods_per_year) {
  if (rog_bps.empty()) throw std::invalid_argument("summarize: empty series");
  if (!(periods_per_year > 0.0)) throw std::invalid_argument("summarize: periods_per_year <= 0");

  SummaryStats s;
  s.n_days = rog_bps.size();
  const double n = static_cast<double>(s.n_days);

  double sum = 0.0;
  for (double x : rog_bps) sum += x;
  s.mean_rog_bps = sum / n;

  double sum_sq = 0.0;
  for (double x : rog_bps) sum_sq += (x - s.mean_rog_bps) * (x - s.mean_rog_bps);
  s.stdev_rog_bps = s.n_days > 1 ? std::sqrt(sum_sq / (n - 1.0)) : 0.0;

  // Dispersion at rounding level of the mean counts as none.
  const bool flat = !(s.stdev_rog_bps > 1e-14 * std::abs(s.mean_rog_bps));
  if (flat) {
    s.stdev_rog_bps = 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    const double sentinel = s.mean_rog_bps > 0.0 ? inf : (s.mean_rog_bps < 0.0 ? -inf : 0.0);
    s.sharpe_annualized = sentinel;
    s.t_stat = sentinel;
  } else {
    s.sharpe_annualized = std::sqrt(periods_per_year) * s.mean_rog_bps / s.stdev_rog_bps;
    s.t_stat = std::sqrt(n) * s.mean_rog_bps / s.stdev_rog_bps;
  }

  std::vector<double> curve(rog_bps.size());
  double running = 0.0;
  for (std::size_t i = 0; i < rog_bps.size(); ++i) curve[i] = running += rog_bps[i];
  s.cum_rog_bps = running;
  s.max_drawdown_bps = max_drawdown(curve);
  return s;
}

SummaryStats summarize(std::span<const DailyPnL> daily, double periods_per_year) {
  std::vector<double> rog(daily.size());
  std::transform(daily.begin(), daily.end(), rog.begin(),
                 [](const DailyPnL& d) { return d.rog_bps; });
  return summarize(std::span<const double>(rog), periods_per_year);
}

std::vector<CurvePoint> cumulative_curve(std::span<const DailyPnL> daily) {
  std::vector<CurvePoint> curve;
  curve.reserve(daily.size());
  double running = 0.0;
  for (const auto& d : daily) curve.push_back({d.date, running += d.rog_bps});
  return curve;
}

double max_drawdown(std::span<const double> cumulative) {
  double peak = 0.0;
  double worst = 0.0;
  for (double c : cumulative) {
    peak = std::max(peak, c);
    worst = std::min(worst, c - peak);
  }
  return worst;
}

}  // namespace kfrev
