#include "kfrev/backtest.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>

#include "kfrev/errors.hpp"
#include "kfrev/log.hpp"
#include "kfrev/parallel.hpp"
#include "kfrev/util.hpp"

namespace kfrev {

std::string_view scheme_name(ExecutionScheme scheme) {
  switch (scheme) {
    case ExecutionScheme::OpenToOpen: return "exec1";
    case ExecutionScheme::CloseToClose: return "exec2";
    case ExecutionScheme::OpenToClose: return "exec3";
  }
  throw std::logic_error("unknown execution scheme");
}

std::optional<ExecutionScheme> parse_scheme(std::string_view text) {
  for (auto s : kAllSchemes) {
    if (scheme_name(s) == text) return s;
  }
  return std::nullopt;
}

std::string_view close_entry_name(CloseEntry entry) {
  return entry == CloseEntry::SignalClose ? "signal_close" : "next_close";
}

std::optional<CloseEntry> parse_close_entry(std::string_view text) {
  if (text == "signal_close") return CloseEntry::SignalClose;
  if (text == "next_close") return CloseEntry::NextClose;
  return std::nullopt;
}

std::size_t accrual_offset(ExecutionScheme scheme, CloseEntry entry) {
  switch (scheme) {
    case ExecutionScheme::OpenToOpen: return 2;
    case ExecutionScheme::CloseToClose: return entry == CloseEntry::SignalClose ? 1 : 2;
    case ExecutionScheme::OpenToClose: return 1;
  }
  throw std::logic_error("unknown execution scheme");
}

namespace {

const Bar* bar_at(const AlignedSeries& series, std::size_t session) {
  if (session >= series.size()) return nullptr;
  const auto& slot = series.at(session);
  return slot ? &*slot : nullptr;
}

}  // namespace

std::optional<double> lagged_close_return(const AlignedSeries& series, std::size_t signal,
                                          std::size_t lag) {
  if (lag < 1) throw std::invalid_argument("lagged_close_return: lag must be >= 1");
  const Bar* entry = bar_at(series, signal + lag - 1);
  const Bar* exit = bar_at(series, signal + lag);
  if (!entry || !exit) return std::nullopt;
  return exit->close / entry->close - 1.0;
}

std::optional<double> instrument_return(const AlignedSeries& series, std::size_t signal,
                                        ExecutionScheme scheme, CloseEntry entry) {
  switch (scheme) {
    case ExecutionScheme::CloseToClose:
      return lagged_close_return(series, signal, entry == CloseEntry::SignalClose ? 1 : 2);
    case ExecutionScheme::OpenToOpen: {
      const Bar* next = bar_at(series, signal + 1);
      const Bar* after = bar_at(series, signal + 2);
      if (!next || !after) return std::nullopt;
      return after->open / next->open - 1.0;
    }
    case ExecutionScheme::OpenToClose: {
      const Bar* next = bar_at(series, signal + 1);
      if (!next) return std::nullopt;
      return next->close / next->open - 1.0;
    }
  }
  throw std::logic_error("unknown execution scheme");
}

std::optional<double> overnight_return(const AlignedSeries& series, std::size_t signal) {
  const Bar* next = bar_at(series, signal + 1);
  const Bar* after = bar_at(series, signal + 2);
  if (!next || !after) return std::nullopt;
  return after->open / next->close - 1.0;
}

namespace {

using LegReturn = std::function<std::optional<double>(const AlignedSeries&, std::size_t)>;

std::vector<DailyPnL> simulate_leg(const BookSchedule& books, const AlignedMarket& market,
                                   const LegReturn& leg_return, std::size_t offset,
                                   unsigned threads) {
  std::vector<const PositionBook*> ordered;
  ordered.reserve(books.size());
  for (const auto& [date, book] : books) ordered.push_back(&book);

  const auto& sessions = market.calendar().sessions;
  std::vector<std::optional<DailyPnL>> slots(ordered.size());
  parallel_for(ordered.size(), threads, [&](std::size_t i) {
    const PositionBook& book = *ordered[i];
    const auto signal = market.calendar().index_of(book.date);
    if (!signal) {
      throw DataError("book dated " + format_date(book.date) + " is not a market session");
    }
    if (*signal + offset >= sessions.size()) return;

    DailyPnL day{.date = sessions[*signal + offset], .signal_date = book.date};
    for (const auto& [id, position] : book.positions) {
      const AlignedSeries* series = market.find(id);
      if (!series) throw DataError("book references unknown instrument " + id);
      const auto ret = leg_return(*series, *signal);
      if (!ret) continue;
      day.pnl += position * *ret;
      day.gross += std::abs(position);
      ++day.n_names;
    }
    if (day.n_names == 0) return;
    day.rog_bps = day.gross > 0.0 ? 1e4 * day.pnl / day.gross : 0.0;
    slots[i] = day;
  });

  std::vector<DailyPnL> daily;
  daily.reserve(slots.size());
  for (auto& s : slots) {
    if (s) daily.push_back(*s);
  }
  return daily;
}

}  // namespace

BacktestResult run_backtest(const BookSchedule& books, const AlignedMarket& market,
                            ExecutionScheme scheme, const BacktestOptions& options) {
  if (books.empty()) throw std::invalid_argument("run_backtest: no position books");
  const auto leg = [&](const AlignedSeries& s, std::size_t signal) {
    return instrument_return(s, signal, scheme, options.close_entry);
  };
  BacktestResult result{scheme,
                        simulate_leg(books, market, leg, accrual_offset(scheme, options.close_entry),
                                     options.threads),
                        {}};
  if (result.daily.empty()) {
    throw DataError("run_backtest: no tradable days for " + std::string(scheme_name(scheme)));
  }
  result.summary = summarize(result.daily, options.periods_per_year);
  return result;
}

std::vector<LagStat> lag_profile(const BookSchedule& books, const AlignedMarket& market,
                                 std::size_t max_lag, unsigned threads) {
  if (max_lag < 1) throw std::invalid_argument("lag_profile: max_lag must be >= 1");
  std::vector<LagStat> profile;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    const auto leg = [lag](const AlignedSeries& s, std::size_t signal) {
      return lagged_close_return(s, signal, lag);
    };
    const auto daily = simulate_leg(books, market, leg, lag, threads);
    if (daily.size() < 2) {
      log::warn("lag " + std::to_string(lag) + ": only " + std::to_string(daily.size()) +
                " tradable days, lag omitted");
      continue;
    }
    const SummaryStats stats = summarize(daily);
    profile.push_back(LagStat{lag, stats.mean_rog_bps, stats.t_stat, stats.n_days});
  }
  return profile;
}

void write_daily_csv(std::ostream& out, std::span<const DailyPnL> daily) {
  using util::format_double;
  out << "date,pnl,gross,rog_bps,n_names\n";
  for (const auto& d : daily) {
    out << format_date(d.date) << ',' << format_double(d.pnl) << ',' << format_double(d.gross)
        << ',' << format_double(d.rog_bps) << ',' << d.n_names << '\n';
  }
}

void write_lag_csv(std::ostream& out, std::span<const LagStat> lags) {
  using util::format_double;
  out << "lag,mean_rog_bps,t_stat\n";
  for (const auto& l : lags) {
    out << l.lag << ',' << format_double(l.mean_rog_bps) << ',' << format_double(l.t_stat) << '\n';
  }
}

}  // namespace kfrev
