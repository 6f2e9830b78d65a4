#include "kfrev/pipeline.hpp"

#include <sstream>

#include "kfrev/errors.hpp"
#include "kfrev/fetch.hpp"
#include "kfrev/log.hpp"
#include "kfrev/parallel.hpp"
#include "kfrev/report.hpp"
#include "kfrev/util.hpp"

namespace kfrev {

namespace {

constexpr const char* kEngineVersion = "kfrev 0.1.0";

FetchOptions fetch_options(const RunConfig& config, const std::string& market) {
  FetchOptions options;
  options.url_template = config.data.url_template;
  options.cache_dir = config.data.cache_dir;
  options.market_code = market;
  options.max_attempts = config.data.max_attempts;
  options.base_delay = std::chrono::milliseconds(config.data.backoff_ms);
  options.http = default_http_get();
  return options;
}

Universe load_checked_universe(const RunConfig& config) {
  Universe universe = load_universe(config.universe_path);
  if (!config.market_code.empty() && config.market_code != universe.market_code) {
    throw ConfigError("config market '" + config.market_code + "' does not match universe market '" +
                      universe.market_code + "'");
  }
  return universe;
}

MarketRun simulate_stages(const RunConfig& config, bool with_schemes) {
  validate(config);
  MarketRun run;
  run.loaded = load_market(config);
  const std::string& market = run.loaded.universe.market_code;
  run.market = AlignedMarket::from_series(run.loaded.series, market, config.threads);

  const auto series = run.market.series();
  run.filtered.resize(series.size());
  parallel_for(series.size(), config.threads, [&](std::size_t i) {
    run.filtered[i] = filter_aligned(series[i], config.filter);
  });

  run.panel = forecast_panel(series, run.filtered, config.signal);
  if (run.panel.empty()) {
    throw DataError(market + ": no forecasts; every instrument has fewer than " +
                    std::to_string(config.signal.warmup) + " observations");
  }
  run.books = rebalance_schedule(run.panel, config.portfolio);
  if (run.books.empty()) throw DataError(market + ": no date has a usable cross-section");

  if (with_schemes) {
    const BacktestOptions options{config.close_entry, config.periods_per_year, config.threads};
    for (auto scheme : config.schemes) {
      run.results.push_back(run_backtest(run.books, run.market, scheme, options));
    }
  }
  run.lags = lag_profile(run.books, run.market, config.max_lag, config.threads);
  return run;
}

template <class Writer>
std::string render(Writer&& writer) {
  std::ostringstream out;
  writer(out);
  return out.str();
}

/// Writes into a hidden sibling directory, then moves every entry into `target`.
/// Nothing reaches `target` if `write` throws.
template <class Writer>
void publish(const std::filesystem::path& target, Writer&& write) {
  namespace fs = std::filesystem;
  const fs::path absolute = fs::absolute(target).lexically_normal();
  const fs::path staging =
      absolute.parent_path() / ("." + absolute.filename().string() + ".staging");
  fs::remove_all(staging);
  fs::create_directories(staging);
  try {
    write(staging);
    fs::create_directories(absolute);
    for (const auto& entry : fs::directory_iterator(staging)) {
      const fs::path dest = absolute / entry.path().filename();
      if (fs::is_directory(dest)) fs::remove_all(dest);
      fs::rename(entry.path(), dest);
    }
    fs::remove_all(staging);
  } catch (...) {
    std::error_code ignored;
    fs::remove_all(staging, ignored);
    throw;
  }
}

}  // namespace

LoadedMarket load_market(const RunConfig& config) {
  LoadedMarket loaded;
  loaded.universe = load_checked_universe(config);
  const Universe& u = loaded.universe;
  const Date start = config.start.value_or(u.start);
  const Date end = config.end.value_or(u.end);
  const bool remote = config.data.kind == DataSourceConfig::Kind::Remote;
  const FetchOptions options = remote ? fetch_options(config, u.market_code) : FetchOptions{};

  struct Slot {
    std::optional<PriceSeries> series;
    std::filesystem::path file;
  };
  std::vector<Slot> slots(u.instruments.size());
  parallel_for(slots.size(), config.threads, [&](std::size_t i) {
    const std::string& id = u.instruments[i];
    if (remote) {
      slots[i].series = fetch_remote(id, start, end, options);
      slots[i].file = cache_path(config.data.cache_dir, u.market_code, id);
    } else {
      slots[i].file = config.data.dir / (id + ".csv");
      slots[i].series = load_csv(slots[i].file, id).slice(start, end);
    }
  });

  loaded.provenance = nlohmann::json::object();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    PriceSeries& s = *slots[i].series;
    if (s.empty()) {
      log::warn(s.instrument_id() + ": no bars between " + format_date(start) + " and " +
                format_date(end) + ", excluded");
      continue;
    }
    loaded.provenance[s.instrument_id()] = {
        {"file", slots[i].file.filename().generic_string()},
        {"fingerprint", util::fingerprint_file(slots[i].file)},
        {"price_basis", price_basis_name(s.basis())},
        {"bars", s.size()},
        {"first", format_date(s.bars().front().date)},
        {"last", format_date(s.bars().back().date)}};
    loaded.series.push_back(std::move(s));
  }
  if (loaded.series.empty()) throw DataError(u.market_code + ": no instrument has data in range");
  return loaded;
}

MarketRun simulate(const RunConfig& config) { return simulate_stages(config, true); }

nlohmann::json run_metadata(const RunConfig& config, const MarketRun& run) {
  const auto& sessions = run.market.calendar().sessions;
  return nlohmann::json{
      {"engine", kEngineVersion},
      {"config", to_json(config)},
      {"data_provenance", run.loaded.provenance},
      {"calendar",
       {{"market", run.market.calendar().market_code},
        {"sessions", sessions.size()},
        {"first", sessions.empty() ? "" : format_date(sessions.front())},
        {"last", sessions.empty() ? "" : format_date(sessions.back())}}},
      {"instruments_used", run.loaded.series.size()},
      {"books", run.books.size()},
  };
}

MarketRun run(const RunConfig& config) {
  MarketRun result = simulate_stages(config, true);
  const std::string& market = result.loaded.universe.market_code;

  publish(config.output_dir, [&](const std::filesystem::path& dir) {
    for (const auto& r : result.results) {
      const std::string scheme(scheme_name(r.scheme));
      util::write_file_atomic(dir / ("daily_pnl_" + scheme + ".csv"),
                              render([&](std::ostream& o) { write_daily_csv(o, r.daily); }));
      const auto curve = cumulative_curve(r.daily);
      util::write_file_atomic(dir / ("cumulative_" + scheme + ".csv"),
                              render([&](std::ostream& o) { write_curve_csv(o, curve); }));
    }
    util::write_file_atomic(dir / "lag_profile.csv",
                            render([&](std::ostream& o) { write_lag_csv(o, result.lags); }));
    util::write_file_atomic(dir / "summary.json",
                            dump_json(summary_document(market, result.results)));
    util::write_file_atomic(dir / "run_metadata.json", dump_json(run_metadata(config, result)));

    if (config.dumps.panel) {
      util::write_file_atomic(dir / "panel.csv",
                              render([&](std::ostream& o) { write_panel_csv(o, result.panel); }));
    }
    if (config.dumps.books) {
      util::write_file_atomic(dir / "books.csv",
                              render([&](std::ostream& o) { write_books_csv(o, result.books); }));
    }
    if (config.dumps.filter) {
      const auto& sessions = result.market.calendar().sessions;
      const auto series = result.market.series();
      for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& f = result.filtered[i];
        std::vector<Date> dates;
        dates.reserve(f.sessions.size());
        for (auto s : f.sessions) dates.push_back(sessions[s]);
        util::write_file_atomic(
            dir / "filter" / (series[i].instrument_id() + ".csv"),
            render([&](std::ostream& o) { kalman::write_steps_csv(o, dates, f.steps); }));
      }
    }
  });
  return result;
}

std::vector<LagStat> run_lag_profile(const RunConfig& config) {
  MarketRun result = simulate_stages(config, false);
  publish(config.output_dir, [&](const std::filesystem::path& dir) {
    util::write_file_atomic(dir / "lag_profile.csv",
                            render([&](std::ostream& o) { write_lag_csv(o, result.lags); }));
  });
  return result.lags;
}

std::size_t fetch_universe(const RunConfig& config) {
  validate(config);
  if (config.data.kind != DataSourceConfig::Kind::Remote) {
    throw ConfigError("fetch needs data.source = remote");
  }
  const Universe u = load_checked_universe(config);
  const FetchOptions options = fetch_options(config, u.market_code);
  const Date start = config.start.value_or(u.start);
  const Date end = config.end.value_or(u.end);
  for (const auto& id : u.instruments) {
    const auto series = fetch_remote(id, start, end, options);
    log::info(id + ": " + std::to_string(series.size()) + " bars cached");
  }
  return u.instruments.size();
}

}  // namespace kfrev
