#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "kfrev/market_data.hpp"
#include "kfrev/metrics.hpp"
#include "kfrev/portfolio.hpp"

namespace kfrev {

/// Timing of the trade that realizes a signal formed at the close of session T.
enum class ExecutionScheme {
  OpenToOpen,    // exec1: O(T+1) -> O(T+2)
  CloseToClose,  // exec2: C(T)   -> C(T+1)
  OpenToClose,   // exec3: O(T+1) -> C(T+1)
};

inline constexpr ExecutionScheme kAllSchemes[] = {
    ExecutionScheme::OpenToOpen, ExecutionScheme::CloseToClose, ExecutionScheme::OpenToClose};

std::string_view scheme_name(ExecutionScheme scheme);  // "exec1" / "exec2" / "exec3"
std::optional<ExecutionScheme> parse_scheme(std::string_view text);

/// Entry print of the close-to-close leg. NextClose trades C(T+1) -> C(T+2), for when
/// the signal-day close is not considered tradable.
enum class CloseEntry { SignalClose, NextClose };

std::string_view close_entry_name(CloseEntry entry);
std::optional<CloseEntry> parse_close_entry(std::string_view text);

/// Sessions between the signal session and the session the leg's PnL is dated on.
std::size_t accrual_offset(ExecutionScheme scheme, CloseEntry entry = CloseEntry::SignalClose);

/// Return of holding one instrument under `scheme` for a signal at session `signal`.
/// T+1 and T+2 are the next calendar sessions; nullopt if any required bar is missing.
std::optional<double> instrument_return(const AlignedSeries& series, std::size_t signal,
                                        ExecutionScheme scheme,
                                        CloseEntry entry = CloseEntry::SignalClose);

/// C(T+lag-1) -> C(T+lag). Lag 1 is the exec2 leg.
std::optional<double> lagged_close_return(const AlignedSeries& series, std::size_t signal,
                                          std::size_t lag);

/// O(T+2) / C(T+1) - 1, the gap that turns the exec3 leg into the exec1 leg.
std::optional<double> overnight_return(const AlignedSeries& series, std::size_t signal);

struct BacktestOptions {
  CloseEntry close_entry = CloseEntry::SignalClose;
  double periods_per_year = 252.0;
  unsigned threads = 1;
};

struct BacktestResult {
  ExecutionScheme scheme;
  std::vector<DailyPnL> daily;
  SummaryStats summary;
};

/// pnl(T) = sum_i position_i * return_i. Names lacking a required bar are dropped and
/// gross is recomputed over the names that traded. Sessions where nothing traded are
/// omitted. Throws std::invalid_argument for an empty schedule and DataError when the
/// schedule references dates or instruments the market does not know, or no day trades.
BacktestResult run_backtest(const BookSchedule& books, const AlignedMarket& market,
                            ExecutionScheme scheme, const BacktestOptions& options = {});

struct LagStat {
  std::size_t lag;
  double mean_rog_bps;
  double t_stat;
  std::size_t n_days;
};

/// Mean ROG of each book held over the single close-to-close session T+j-1 -> T+j,
/// for j = 1..max_lag. Lags with fewer than two tradable days are omitted with a warning.
std::vector<LagStat> lag_profile(const BookSchedule& books, const AlignedMarket& market,
                                 std::size_t max_lag, unsigned threads = 1);

/// `date,pnl,gross,rog_bps,n_names`.
void write_daily_csv(std::ostream& out, std::span<const DailyPnL> daily);
/// `lag,mean_rog_bps,t_stat`.
void write_lag_csv(std::ostream& out, std::span<const LagStat> lags);

}  // namespace kfrev
