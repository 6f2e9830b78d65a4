// kfrev: Kalman-filter reversal backtester.
//
//   kfrev synth       --generator ou_mean_revert --half-life 3 --seed 7 --out data/syn
//   kfrev backtest    --config run.json [overrides]
//   kfrev lag-profile --config run.json [overrides]
//   kfrev fetch       --config run.json
//   kfrev compare     out/us/summary.json out/kr/summary.json [--out merged.json]

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "kfrev/config.hpp"
#include "kfrev/errors.hpp"
#include "kfrev/log.hpp"
#include "kfrev/market_data.hpp"
#include "kfrev/pipeline.hpp"
#include "kfrev/report.hpp"
#include "kfrev/synthetic.hpp"
#include "kfrev/util.hpp"

namespace {

using namespace kfrev;

/// Flag values that, when given, replace the matching config-file field.
struct Overrides {
  std::string config_path;
  std::optional<std::string> market, universe, source, data_dir, cache_dir, url_template;
  std::optional<std::string> start, end, c_kalman, sign, schemes, exec2_entry, out;
  std::optional<double> q, r, p0, gross, clip_sigma, periods_per_year;
  std::optional<std::size_t> warmup, max_lag;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool dump_panel = false, dump_books = false, dump_filter = false;
};

void add_run_options(CLI::App& cmd, Overrides& o) {
  cmd.add_option("-c,--config", o.config_path, "Run configuration (JSON); run_metadata.json works too");
  cmd.add_option("--market", o.market, "Market code, must match the universe");
  cmd.add_option("--universe", o.universe, "Universe file (JSON)");
  cmd.add_option("--source", o.source, "Data source: local | remote");
  cmd.add_option("--data-dir", o.data_dir, "Directory of <instrument>.csv files");
  cmd.add_option("--cache-dir", o.cache_dir, "Download cache root");
  cmd.add_option("--url-template", o.url_template, "Remote URL template");
  cmd.add_option("--start", o.start, "First date (YYYY-MM-DD)");
  cmd.add_option("--end", o.end, "Last date (YYYY-MM-DD)");
  cmd.add_option("--q", o.q, "Process noise variance");
  cmd.add_option("--r", o.r, "Measurement noise variance");
  cmd.add_option("--p0", o.p0, "Initial state variance");
  cmd.add_option("--warmup", o.warmup, "Observations before an instrument is traded");
  cmd.add_option("--c-kalman", o.c_kalman, "Fair value estimate: posterior | prior");
  cmd.add_option("--sign", o.sign, "Forecast sign: reversal | literal");
  cmd.add_option("--gross", o.gross, "Gross dollar target per book");
  cmd.add_option("--clip-sigma", o.clip_sigma, "Clip z-scores at +/- this many sigmas");
  cmd.add_option("--schemes", o.schemes, "Comma list of exec1,exec2,exec3");
  cmd.add_option("--exec2-entry", o.exec2_entry, "signal_close | next_close");
  cmd.add_option("--max-lag", o.max_lag, "Largest lag of the lag profile");
  cmd.add_option("--periods-per-year", o.periods_per_year, "Annualization factor");
  cmd.add_option("-o,--out", o.out, "Output directory");
  cmd.add_option("--seed", o.seed, "Random seed recorded with the run");
  cmd.add_option("--threads", o.threads, "Worker threads (0 = hardware)");
  cmd.add_flag("--dump-panel", o.dump_panel, "Write panel.csv");
  cmd.add_flag("--dump-books", o.dump_books, "Write books.csv");
  cmd.add_flag("--dump-filter", o.dump_filter, "Write filter/<instrument>.csv");
}

RunConfig resolve_config(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : load_run_config(o.config_path);
  if (o.market) c.market_code = *o.market;
  if (o.universe) c.universe_path = *o.universe;
  if (o.source) {
    if (*o.source == "local") {
      c.data.kind = DataSourceConfig::Kind::Local;
    } else if (*o.source == "remote") {
      c.data.kind = DataSourceConfig::Kind::Remote;
    } else {
      throw ConfigError("--source must be local or remote");
    }
  }
  if (o.data_dir) c.data.dir = *o.data_dir;
  if (o.cache_dir) c.data.cache_dir = *o.cache_dir;
  if (o.url_template) c.data.url_template = *o.url_template;
  try {
    if (o.start) c.start = parse_date_or_throw(*o.start);
    if (o.end) c.end = parse_date_or_throw(*o.end);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (o.q) c.filter.process_var = *o.q;
  if (o.r) c.filter.measurement_var = *o.r;
  if (o.p0) c.filter.initial_var = *o.p0;
  if (o.warmup) c.signal.warmup = *o.warmup;
  if (o.c_kalman) {
    const auto v = parse_fair_value(*o.c_kalman);
    if (!v) throw ConfigError("--c-kalman must be posterior or prior");
    c.signal.fair_value = *v;
  }
  if (o.sign) {
    const auto v = parse_sign_mode(*o.sign);
    if (!v) throw ConfigError("--sign must be reversal or literal");
    c.signal.sign = *v;
  }
  if (o.gross) c.portfolio.gross_target = *o.gross;
  if (o.clip_sigma) c.portfolio.clip_sigma = *o.clip_sigma;
  if (o.schemes) {
    c.schemes.clear();
    for (auto name : util::split(*o.schemes, ',')) {
      const auto s = parse_scheme(util::trim(name));
      if (!s) throw ConfigError("unknown scheme '" + std::string(name) + "'");
      c.schemes.push_back(*s);
    }
  }
  if (o.exec2_entry) {
    const auto v = parse_close_entry(*o.exec2_entry);
    if (!v) throw ConfigError("--exec2-entry must be signal_close or next_close");
    c.close_entry = *v;
  }
  if (o.max_lag) c.max_lag = *o.max_lag;
  if (o.periods_per_year) c.periods_per_year = *o.periods_per_year;
  if (o.out) c.output_dir = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  c.dumps.panel = c.dumps.panel || o.dump_panel;
  c.dumps.books = c.dumps.books || o.dump_books;
  c.dumps.filter = c.dumps.filter || o.dump_filter;
  return c;
}

void print_summary(const MarketRun& run) {
  const std::string& market = run.loaded.universe.market_code;
  std::cout << "market " << market << ": " << run.loaded.series.size() << " instruments, "
            << run.books.size() << " books\n";
  write_comparison_table(std::cout, summary_document(market, run.results));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kalman-filter reversal backtester"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress info and warning messages");

  Overrides backtest_opts;
  auto* backtest = app.add_subcommand("backtest", "Run the full pipeline and write all artifacts");
  add_run_options(*backtest, backtest_opts);

  Overrides lag_opts;
  auto* lag = app.add_subcommand("lag-profile", "Write only lag_profile.csv");
  add_run_options(*lag, lag_opts);

  Overrides fetch_opts;
  auto* fetch = app.add_subcommand("fetch", "Download the universe into the cache");
  add_run_options(*fetch, fetch_opts);

  SyntheticSpec synth_spec;
  std::string generator = "random_walk";
  std::optional<double> half_life;
  std::string synth_out;
  std::string synth_start;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic universe of daily bars");
  synth->add_option("--generator", generator, "random_walk | ou_mean_revert");
  synth->add_option("--instruments", synth_spec.n_instruments, "Number of instruments");
  synth->add_option("--days", synth_spec.n_days, "Number of sessions");
  synth->add_option("--volatility", synth_spec.volatility, "Daily log-return sigma");
  synth->add_option("--rate", synth_spec.reversion_rate, "OU reversion rate per session");
  synth->add_option("--half-life", half_life, "OU half-life in sessions (sets --rate)");
  synth->add_option("--overnight-fraction", synth_spec.overnight_fraction,
                    "Share of each move realized overnight");
  synth->add_option("--overnight-noise", synth_spec.overnight_noise, "Overnight gap noise sigma");
  synth->add_option("--seed", synth_spec.seed, "Random seed");
  synth->add_option("--market", synth_spec.market_code, "Market code and instrument prefix");
  synth->add_option("--start", synth_start, "First calendar date (YYYY-MM-DD)");
  synth->add_option("-o,--out", synth_out, "Output directory")->required();

  std::vector<std::string> compare_inputs;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Merge summary.json files into one table");
  compare->add_option("summaries", compare_inputs, "summary.json files")->required();
  compare->add_option("-o,--out", compare_out, "Write the merged JSON here");

  auto* markets = app.add_subcommand("markets", "List the reference market universes");

  CLI11_PARSE(app, argc, argv);
  log::set_quiet(quiet);

  try {
    if (*backtest) {
      const RunConfig config = resolve_config(backtest_opts);
      const MarketRun result = run(config);
      print_summary(result);
      std::cout << "artifacts written to " << config.output_dir.string() << "\n";
    } else if (*lag) {
      const RunConfig config = resolve_config(lag_opts);
      const auto lags = run_lag_profile(config);
      write_lag_csv(std::cout, lags);
    } else if (*fetch) {
      const RunConfig config = resolve_config(fetch_opts);
      std::cout << fetch_universe(config) << " instruments cached\n";
    } else if (*synth) {
      const auto g = parse_generator(generator);
      if (!g) throw ConfigError("--generator must be random_walk or ou_mean_revert");
      synth_spec.generator = *g;
      if (half_life) synth_spec.reversion_rate = reversion_rate_for_half_life(*half_life);
      if (!synth_start.empty()) synth_spec.start = parse_date_or_throw(synth_start);
      const RunConfig defaults;
      validate(synth_spec, defaults.signal.warmup + defaults.max_lag + 2);
      const Universe u = write_synthetic(synth_spec, synth_out);
      std::cout << u.instruments.size() << " instruments, " << format_date(u.start) << " to "
                << format_date(u.end) << ", written to " << synth_out << "\n";
    } else if (*compare) {
      std::vector<nlohmann::json> docs;
      for (const auto& path : compare_inputs) {
        docs.push_back(nlohmann::json::parse(util::read_file(path)));
      }
      const auto merged = merge_summaries(docs);
      if (!compare_out.empty()) util::write_file_atomic(compare_out, dump_json(merged));
      write_comparison_table(std::cout, merged);
    } else if (*markets) {
      std::cout << "code,type,index,constituents,history\n";
      for (const auto& m : reference_markets()) {
        std::cout << m.code << ',' << m.exchange_type << ',' << m.index_name << ','
                  << m.constituents << ',' << m.history << '\n';
      }
    }
  } catch (const ConfigError& e) {
    log::error(std::string("configuration: ") + e.what());
    return 2;
  } catch (const std::exception& e) {
    log::error(e.what());
    return 1;
  }
  return 0;
}
