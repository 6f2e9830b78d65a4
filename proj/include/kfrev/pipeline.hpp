#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "kfrev/backtest.hpp"
#include "kfrev/config.hpp"
#include "kfrev/market_data.hpp"
#include "kfrev/portfolio.hpp"
#include "kfrev/signal.hpp"

namespace kfrev {

/// Instruments loaded for a run, restricted to the run's date range.
struct LoadedMarket {
  Universe universe;
  std::vector<PriceSeries> series;
  /// Per-instrument fingerprint and price basis, for run metadata.
  nlohmann::json provenance;
};

/// In-memory products of one run, stage by stage.
struct MarketRun {
  LoadedMarket loaded;
  AlignedMarket market;
  std::vector<FilteredSeries> filtered;
  ForecastPanel panel;
  BookSchedule books;
  std::vector<BacktestResult> results;
  std::vector<LagStat> lags;
};

LoadedMarket load_market(const RunConfig& config);

/// Runs every stage in memory without writing anything.
MarketRun simulate(const RunConfig& config);

/// Validates, simulates and writes the artifacts: daily_pnl_<scheme>.csv,
/// cumulative_<scheme>.csv, lag_profile.csv, summary.json and run_metadata.json (plus
/// optional dumps). Files are staged and moved into place only after every stage
/// succeeded, so a failed run leaves no partial outputs.
MarketRun run(const RunConfig& config);

/// Like run() but writes only lag_profile.csv.
std::vector<LagStat> run_lag_profile(const RunConfig& config);

/// Downloads every universe instrument into the cache. Returns the number of instruments.
std::size_t fetch_universe(const RunConfig& config);

nlohmann::json run_metadata(const RunConfig& config, const MarketRun& run);

}  // namespace kfrev
