#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "kfrev/date.hpp"
#include "kfrev/signal.hpp"

namespace kfrev {

/// instrument -> value for a single date.
using CrossSection = std::map<std::string, double>;

struct NormalizeOptions {
  /// Clip z-scores to +/- this many sigmas, then re-center. Off by default.
  std::optional<double> clip_sigma;
};

/// Mean-zero, unit population-sigma z-scores. Non-finite inputs are ignored. Returns an
/// empty map when fewer than two names remain or the cross-section has no dispersion.
CrossSection normalize_cross_section(const CrossSection& forecasts,
                                     const NormalizeOptions& options = {});

/// Signed dollar positions for one date. gross and net are always recomputed from
/// `positions`.
struct PositionBook {
  Date date;
  std::map<std::string, double> positions;
  std::map<std::string, double> zscores;
  double gross = 0.0;
  double net = 0.0;

  static PositionBook from_positions(Date date, std::map<std::string, double> positions);
};

/// position_i = gross_target * z_i / sum_j |z_j|.
PositionBook build_positions(Date date, const CrossSection& zscores, double gross_target);

struct PortfolioConfig {
  double gross_target = 1'000'000.0;
  std::optional<double> clip_sigma;
};

using BookSchedule = std::map<Date, PositionBook>;

/// One book per panel date with a usable cross-section. Each book depends only on that
/// date's panel entries.
BookSchedule rebalance_schedule(const ForecastPanel& panel, const PortfolioConfig& config);

/// `date,instrument,zscore,position`.
void write_books_csv(std::ostream& out, const BookSchedule& books);

}  // namespace kfrev
