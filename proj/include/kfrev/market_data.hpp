#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kfrev/date.hpp"

namespace kfrev {

/// One trading day for one instrument.
struct Bar {
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double volume = 0.0;

  friend bool operator==(const Bar&, const Bar&) = default;
};

/// Positive finite prices, non-negative volume and low <= open/close <= high.
bool is_valid(const Bar& bar);

/// Which vendor column the close (and the proportionally scaled open/high/low) came from.
enum class PriceBasis { Close, AdjustedClose };

std::string_view price_basis_name(PriceBasis basis);

/// Date-ordered daily history of one instrument. Immutable once built.
class PriceSeries {
 public:
  /// Throws DataError if any bar is invalid or dates are not strictly increasing.
  PriceSeries(std::string instrument_id, std::vector<Bar> bars,
              PriceBasis basis = PriceBasis::Close);

  const std::string& instrument_id() const { return instrument_id_; }
  std::span<const Bar> bars() const { return bars_; }
  std::size_t size() const { return bars_.size(); }
  bool empty() const { return bars_.empty(); }
  PriceBasis basis() const { return basis_; }

  /// Bars with first <= date <= last.
  PriceSeries slice(Date first, Date last) const;

  friend bool operator==(const PriceSeries&, const PriceSeries&) = default;

 private:
  std::string instrument_id_;
  std::vector<Bar> bars_;
  PriceBasis basis_;
};

/// Result of parsing one CSV source, with the row accounting the loader keeps.
struct CsvLoad {
  PriceSeries series;
  std::size_t rows = 0;
  std::size_t skipped = 0;
  bool resorted = false;
  std::vector<std::string> warnings;
};

/// Parses `Date,Open,High,Low,Close[,Adj Close],Volume` (header required, any column
/// order). Malformed or invariant-violating rows are skipped and counted; more than 5%
/// skipped, no data rows, or a duplicate date throws DataError. Out-of-order input is
/// sorted and a warning recorded. When `Adj Close` is present every price field is
/// scaled by adj_close / close.
CsvLoad read_csv(std::istream& in, const std::string& instrument_id,
                 std::string_view source_name = "<stream>");
CsvLoad read_csv_file(const std::filesystem::path& path, const std::string& instrument_id);

/// read_csv_file, logging any warnings. Missing file throws DataError.
PriceSeries load_csv(const std::filesystem::path& path, const std::string& instrument_id);

void write_csv(std::ostream& out, const PriceSeries& series);

/// Sessions on which at least one instrument of a market traded.
struct TradingCalendar {
  std::string market_code;
  std::vector<Date> sessions;

  std::optional<std::size_t> index_of(Date date) const;
  std::size_t size() const { return sessions.size(); }
};

/// Sorted union of all dates in `series_set`. Empty input throws DataError.
TradingCalendar build_calendar(std::span<const PriceSeries> series_set,
                               std::string market_code = {});

/// A series laid onto a calendar: slot i holds the bar for session i, or nothing when
/// the instrument did not trade. Prices are never forward-filled.
class AlignedSeries {
 public:
  AlignedSeries(std::string instrument_id, std::vector<std::optional<Bar>> slots,
                PriceBasis basis);

  const std::string& instrument_id() const { return instrument_id_; }
  std::size_t size() const { return slots_.size(); }
  const std::optional<Bar>& at(std::size_t session) const { return slots_.at(session); }
  bool observed(std::size_t session) const {
    return session < slots_.size() && slots_[session].has_value();
  }
  std::size_t observed_count() const { return observed_count_; }
  std::size_t missing_count() const { return slots_.size() - observed_count_; }
  PriceBasis basis() const { return basis_; }

  /// The observed bars as a plain series.
  PriceSeries to_series() const;

  friend bool operator==(const AlignedSeries&, const AlignedSeries&) = default;

 private:
  std::string instrument_id_;
  std::vector<std::optional<Bar>> slots_;
  std::size_t observed_count_ = 0;
  PriceBasis basis_;
};

/// Throws DataError if the series has a date that is not a calendar session.
AlignedSeries align(const PriceSeries& series, const TradingCalendar& calendar);
AlignedSeries align(const AlignedSeries& series, const TradingCalendar& calendar);

/// Calendar plus every instrument aligned to it, addressable by instrument id.
class AlignedMarket {
 public:
  AlignedMarket() = default;
  AlignedMarket(TradingCalendar calendar, std::vector<AlignedSeries> series);

  static AlignedMarket from_series(std::span<const PriceSeries> series_set,
                                   std::string market_code, unsigned threads = 1);

  const TradingCalendar& calendar() const { return calendar_; }
  std::span<const AlignedSeries> series() const { return series_; }
  const AlignedSeries* find(std::string_view instrument_id) const;

 private:
  TradingCalendar calendar_;
  std::vector<AlignedSeries> series_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
};

/// Static constituent snapshot of one market index for a run.
struct Universe {
  std::string market_code;
  std::string index_name;
  std::vector<std::string> instruments;
  Date start;
  Date end;
};

/// Throws DataError on empty instruments, duplicates, or start >= end.
void validate(const Universe& universe);

/// JSON: {"market", "index", "instruments": [...], "start", "end"}.
Universe load_universe(const std::filesystem::path& path);
void save_universe(const std::filesystem::path& path, const Universe& universe);

/// Reference facts about the index universes this engine was designed around.
struct MarketInfo {
  std::string_view code;
  std::string_view exchange_type;
  std::string_view index_name;
  int constituents;
  std::string_view history;
};

std::span<const MarketInfo> reference_markets();
const MarketInfo* find_reference_market(std::string_view code);

}  // namespace kfrev
