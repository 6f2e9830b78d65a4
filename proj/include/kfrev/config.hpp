#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "kfrev/backtest.hpp"
#include "kfrev/date.hpp"
#include "kfrev/kalman.hpp"
#include "kfrev/portfolio.hpp"
#include "kfrev/signal.hpp"

namespace kfrev {

struct DataSourceConfig {
  enum class Kind { Local, Remote };
  Kind kind = Kind::Local;
  /// Local source: `<dir>/<instrument>.csv`.
  std::filesystem::path dir;
  /// Remote source: downloads land in `<cache_dir>/<market>/<instrument>.csv`.
  std::filesystem::path cache_dir;
  std::string url_template =
      "https://query1.finance.yahoo.com/v7/finance/download/{symbol}"
      "?period1={start_epoch}&period2={end_epoch}&interval=1d&events=history"
      "&includeAdjustedClose=true";
  int max_attempts = 3;
  int backoff_ms = 500;
};

struct DumpOptions {
  bool panel = false;
  bool books = false;
  bool filter = false;
};

/// Everything that determines a run. Serialized verbatim into run_metadata.json.
struct RunConfig {
  std::string market_code;
  std::filesystem::path universe_path;
  DataSourceConfig data;
  std::optional<Date> start;
  std::optional<Date> end;
  kalman::LocalLevelConfig filter;
  SignalConfig signal;
  PortfolioConfig portfolio;
  std::vector<ExecutionScheme> schemes{std::begin(kAllSchemes), std::end(kAllSchemes)};
  CloseEntry close_entry = CloseEntry::SignalClose;
  std::size_t max_lag = 10;
  double periods_per_year = 252.0;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  DumpOptions dumps;
};

/// Throws ConfigError. Checks only the configuration itself, never the data.
void validate(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);

/// Relative paths are resolved against `base_dir`. Unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Reads a config file. A run_metadata.json is also accepted; its "config" member is used.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace kfrev
