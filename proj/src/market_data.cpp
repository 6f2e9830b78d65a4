#include "kfrev/market_data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "kfrev/errors.hpp"
#include "kfrev/log.hpp"
#include "kfrev/parallel.hpp"
#include "kfrev/util.hpp"

namespace kfrev {

bool is_valid(const Bar& bar) {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(bar.open) || !positive(bar.high) || !positive(bar.low) || !positive(bar.close)) {
    return false;
  }
  if (!std::isfinite(bar.volume) || bar.volume < 0.0) return false;
  return bar.low <= std::min(bar.open, bar.close) && bar.high >= std::max(bar.open, bar.close) &&
         bar.low <= bar.high;
}

std::string_view price_basis_name(PriceBasis basis) {
  return basis == PriceBasis::AdjustedClose ? "adj_close" : "close";
}

PriceSeries::PriceSeries(std::string instrument_id, std::vector<Bar> bars, PriceBasis basis)
    : instrument_id_(std::move(instrument_id)), bars_(std::move(bars)), basis_(basis) {
  if (instrument_id_.empty()) throw DataError("price series needs an instrument id");
  for (std::size_t i = 0; i < bars_.size(); ++i) {
    if (!is_valid(bars_[i])) {
      throw DataError(instrument_id_ + ": invalid bar on " + format_date(bars_[i].date));
    }
    if (i > 0 && bars_[i].date <= bars_[i - 1].date) {
      throw DataError(instrument_id_ + ": dates not strictly increasing at " +
                      format_date(bars_[i].date));
    }
  }
}

PriceSeries PriceSeries::slice(Date first, Date last) const {
  const auto lo = std::lower_bound(bars_.begin(), bars_.end(), first,
                                   [](const Bar& b, Date d) { return b.date < d; });
  const auto hi = std::upper_bound(bars_.begin(), bars_.end(), last,
                                   [](Date d, const Bar& b) { return d < b.date; });
  return PriceSeries(instrument_id_, std::vector<Bar>(lo, std::max(lo, hi)), basis_);
}

namespace {

struct Columns {
  std::size_t count = 0;
  std::size_t date, open, high, low, close, volume;
  std::optional<std::size_t> adj_close;
};

Columns locate_columns(std::string_view header, std::string_view source) {
  if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
  const auto names = util::split(util::trim(header), ',');
  const auto find = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (util::trim(names[i]) == name) return i;
    }
    return std::nullopt;
  };
  const auto require = [&](std::string_view name) {
    if (auto i = find(name)) return *i;
    throw DataError(std::string(source) + ": header lacks required column '" +
                    std::string(name) + "'");
  };
  Columns c;
  c.count = names.size();
  c.date = require("Date");
  c.open = require("Open");
  c.high = require("High");
  c.low = require("Low");
  c.close = require("Close");
  c.volume = require("Volume");
  c.adj_close = find("Adj Close");
  return c;
}

std::optional<Bar> parse_row(std::string_view line, const Columns& cols) {
  const auto fields = util::split(line, ',');
  if (fields.size() != cols.count) return std::nullopt;
  const auto date = parse_date(util::trim(fields[cols.date]));
  if (!date) return std::nullopt;
  Bar bar{.date = *date};
  if (!util::parse_double(fields[cols.open], bar.open) ||
      !util::parse_double(fields[cols.high], bar.high) ||
      !util::parse_double(fields[cols.low], bar.low) ||
      !util::parse_double(fields[cols.close], bar.close) ||
      !util::parse_double(fields[cols.volume], bar.volume)) {
    return std::nullopt;
  }
  if (!is_valid(bar)) return std::nullopt;
  if (cols.adj_close) {
    double adj = 0.0;
    if (!util::parse_double(fields[*cols.adj_close], adj) || adj <= 0.0) return std::nullopt;
    const double factor = adj / bar.close;
    bar.open *= factor;
    bar.high *= factor;
    bar.low *= factor;
    bar.close *= factor;
    if (!is_valid(bar)) return std::nullopt;
  }
  return bar;
}

}  // namespace

CsvLoad read_csv(std::istream& in, const std::string& instrument_id, std::string_view source) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(std::string(source) + ": missing header");
  const Columns cols = locate_columns(line, source);

  std::vector<Bar> bars;
  std::size_t rows = 0;
  std::size_t skipped = 0;
  while (std::getline(in, line)) {
    const auto text = util::trim(line);
    if (text.empty()) continue;
    ++rows;
    if (auto bar = parse_row(text, cols)) {
      bars.push_back(*bar);
    } else {
      ++skipped;
    }
  }
  if (rows == 0) throw DataError(std::string(source) + ": no data rows");
  if (skipped * 20 > rows) {
    throw DataError(std::string(source) + ": " + std::to_string(skipped) + " of " +
                    std::to_string(rows) + " rows malformed (limit 5%)");
  }

  std::vector<std::string> warnings;
  if (skipped > 0) {
    warnings.push_back(std::string(source) + ": skipped " + std::to_string(skipped) +
                       " malformed rows");
  }
  bool resorted = false;
  const auto by_date = [](const Bar& a, const Bar& b) { return a.date < b.date; };
  if (!std::is_sorted(bars.begin(), bars.end(), by_date)) {
    std::stable_sort(bars.begin(), bars.end(), by_date);
    resorted = true;
    warnings.push_back(std::string(source) + ": rows out of date order, re-sorted");
  }
  const auto dup = std::adjacent_find(bars.begin(), bars.end(), [](const Bar& a, const Bar& b) {
    return a.date == b.date;
  });
  if (dup != bars.end()) {
    throw DataError(std::string(source) + ": duplicate date " + format_date(dup->date));
  }

  const auto basis = cols.adj_close ? PriceBasis::AdjustedClose : PriceBasis::Close;
  return CsvLoad{PriceSeries(instrument_id, std::move(bars), basis), rows, skipped, resorted,
                 std::move(warnings)};
}

CsvLoad read_csv_file(const std::filesystem::path& path, const std::string& instrument_id) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open price file " + path.string());
  return read_csv(in, instrument_id, path.string());
}

PriceSeries load_csv(const std::filesystem::path& path, const std::string& instrument_id) {
  auto load = read_csv_file(path, instrument_id);
  for (const auto& w : load.warnings) log::warn(w);
  return std::move(load.series);
}

void write_csv(std::ostream& out, const PriceSeries& series) {
  out << "Date,Open,High,Low,Close,Volume\n";
  for (const Bar& b : series.bars()) {
    out << format_date(b.date) << ',' << util::format_double(b.open) << ','
        << util::format_double(b.high) << ',' << util::format_double(b.low) << ','
        << util::format_double(b.close) << ',' << util::format_double(b.volume) << '\n';
  }
}

std::optional<std::size_t> TradingCalendar::index_of(Date date) const {
  const auto it = std::lower_bound(sessions.begin(), sessions.end(), date);
  if (it == sessions.end() || *it != date) return std::nullopt;
  return static_cast<std::size_t>(it - sessions.begin());
}

TradingCalendar build_calendar(std::span<const PriceSeries> series_set, std::string market_code) {
  if (series_set.empty()) throw DataError("build_calendar: no series given");
  std::vector<Date> dates;
  for (const auto& s : series_set) {
    for (const Bar& b : s.bars()) dates.push_back(b.date);
  }
  std::sort(dates.begin(), dates.end());
  dates.erase(std::unique(dates.begin(), dates.end()), dates.end());
  return TradingCalendar{std::move(market_code), std::move(dates)};
}

AlignedSeries::AlignedSeries(std::string instrument_id, std::vector<std::optional<Bar>> slots,
                             PriceBasis basis)
    : instrument_id_(std::move(instrument_id)), slots_(std::move(slots)), basis_(basis) {
  observed_count_ = static_cast<std::size_t>(
      std::count_if(slots_.begin(), slots_.end(), [](const auto& s) { return s.has_value(); }));
}

PriceSeries AlignedSeries::to_series() const {
  std::vector<Bar> bars;
  bars.reserve(observed_count_);
  for (const auto& s : slots_) {
    if (s) bars.push_back(*s);
  }
  return PriceSeries(instrument_id_, std::move(bars), basis_);
}

AlignedSeries align(const PriceSeries& series, const TradingCalendar& calendar) {
  std::vector<std::optional<Bar>> slots(calendar.size());
  for (const Bar& b : series.bars()) {
    const auto index = calendar.index_of(b.date);
    if (!index) {
      throw DataError(series.instrument_id() + ": date " + format_date(b.date) +
                      " is not a session of calendar " + calendar.market_code);
    }
    slots[*index] = b;
  }
  return AlignedSeries(series.instrument_id(), std::move(slots), series.basis());
}

AlignedSeries align(const AlignedSeries& series, const TradingCalendar& calendar) {
  return align(series.to_series(), calendar);
}

AlignedMarket::AlignedMarket(TradingCalendar calendar, std::vector<AlignedSeries> series)
    : calendar_(std::move(calendar)), series_(std::move(series)) {
  for (std::size_t i = 0; i < series_.size(); ++i) {
    if (series_[i].size() != calendar_.size()) {
      throw DataError(series_[i].instrument_id() + ": not aligned to the market calendar");
    }
    if (!by_id_.emplace(series_[i].instrument_id(), i).second) {
      throw DataError("duplicate instrument " + series_[i].instrument_id());
    }
  }
}

AlignedMarket AlignedMarket::from_series(std::span<const PriceSeries> series_set,
                                         std::string market_code, unsigned threads) {
  TradingCalendar calendar = build_calendar(series_set, std::move(market_code));
  std::vector<std::optional<AlignedSeries>> slots(series_set.size());
  parallel_for(series_set.size(), threads,
               [&](std::size_t i) { slots[i].emplace(align(series_set[i], calendar)); });
  std::vector<AlignedSeries> aligned;
  aligned.reserve(slots.size());
  for (auto& s : slots) aligned.push_back(std::move(*s));
  return AlignedMarket(std::move(calendar), std::move(aligned));
}

const AlignedSeries* AlignedMarket::find(std::string_view instrument_id) const {
  const auto it = by_id_.find(instrument_id);
  return it == by_id_.end() ? nullptr : &series_[it->second];
}

void validate(const Universe& universe) {
  if (universe.instruments.empty()) {
    throw DataError("universe " + universe.market_code + " has no instruments");
  }
  if (!(universe.start < universe.end)) {
    throw DataError("universe " + universe.market_code + ": start must precede end");
  }
  std::set<std::string_view> seen;
  for (const auto& id : universe.instruments) {
    if (id.empty()) throw DataError("universe " + universe.market_code + ": empty instrument id");
    if (!seen.insert(id).second) {
      throw DataError("universe " + universe.market_code + ": duplicate instrument " + id);
    }
  }
}

Universe load_universe(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(util::read_file(path));
    Universe u;
    u.market_code = doc.at("market").get<std::string>();
    u.index_name = doc.value("index", std::string{});
    u.instruments = doc.at("instruments").get<std::vector<std::string>>();
    u.start = parse_date_or_throw(doc.at("start").get<std::string>());
    u.end = parse_date_or_throw(doc.at("end").get<std::string>());
    validate(u);
    return u;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("universe file " + path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError("universe file " + path.string() + ": " + e.what());
  }
}

void save_universe(const std::filesystem::path& path, const Universe& universe) {
  validate(universe);
  const nlohmann::json doc = {{"market", universe.market_code},
                              {"index", universe.index_name},
                              {"instruments", universe.instruments},
                              {"start", format_date(universe.start)},
                              {"end", format_date(universe.end)}};
  util::write_file_atomic(path, doc.dump(2) + "\n");
}

namespace {

constexpr std::array<MarketInfo, 9> kReferenceMarkets{{
    {"US", "DM", "SPY", 504, "2017.01 - 2024.03"},
    {"UK", "DM", "FTSE100", 100, "2017.01 - 2024.03"},
    {"EU", "DM", "STOXX500", 500, "2017.01 - 2024.03"},
    {"JP", "DM", "TOPIX2000", 2159, "2017.01 - 2024.03"},
    {"HK", "DM", "HSCI+HSI", 523, "2017.01 - 2024.03"},
    {"KR", "EM", "KOSPI1000", 1000, "2017.01 - 2024.03"},
    {"VN", "EM", "VNX", 415, "2023.01 - 2024.03"},
    {"MY", "EM", "MYX", 95, "2017.01 - 2024.03"},
    {"ESG", "EM", "CB", 168, "2017.01 - 2024.03"},
}};

}  // namespace

std::span<const MarketInfo> reference_markets() { return kReferenceMarkets; }

const MarketInfo* find_reference_market(std::string_view code) {
  for (const auto& m : kReferenceMarkets) {
    if (m.code == code) return &m;
  }
  return nullptr;
}

}  // namespace kfrev
