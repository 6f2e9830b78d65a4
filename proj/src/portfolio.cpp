#include "kfrev/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "kfrev/util.hpp"

namespace kfrev {

namespace {

double mean_of(const CrossSection& xs) {
  double sum = 0.0;
  for (const auto& [id, v] : xs) sum += v;
  return sum / static_cast<double>(xs.size());
}

}  // namespace

CrossSection normalize_cross_section(const CrossSection& forecasts,
                                     const NormalizeOptions& options) {
  CrossSection values;
  for (const auto& [id, v] : forecasts) {
    if (std::isfinite(v)) values.emplace(id, v);
  }
  if (values.size() < 2) return {};

  const double mean = mean_of(values);
  double sum_sq = 0.0;
  double max_abs = 0.0;
  for (auto& [id, v] : values) {
    max_abs = std::max(max_abs, std::abs(v));
    v -= mean;
    sum_sq += v * v;
  }
  const double sigma = std::sqrt(sum_sq / static_cast<double>(values.size()));
  if (!(sigma > std::numeric_limits<double>::epsilon() * max_abs)) return {};

  for (auto& [id, v] : values) v /= sigma;

  if (options.clip_sigma) {
    const double limit = *options.clip_sigma;
    for (auto& [id, v] : values) v = std::clamp(v, -limit, limit);
    const double shift = mean_of(values);
    for (auto& [id, v] : values) v -= shift;
  }
  return values;
}

PositionBook PositionBook::from_positions(Date date, std::map<std::string, double> positions) {
  PositionBook book;
  book.date = date;
  book.positions = std::move(positions);
  for (const auto& [id, p] : book.positions) {
    book.gross += std::abs(p);
    book.net += p;
  }
  return book;
}

PositionBook build_positions(Date date, const CrossSection& zscores, double gross_target) {
  if (zscores.empty()) throw std::invalid_argument("build_positions: empty cross-section");
  if (!std::isfinite(gross_target) || gross_target <= 0.0) {
    throw std::invalid_argument("build_positions: gross target must be positive");
  }
  double sum_abs = 0.0;
  for (const auto& [id, z] : zscores) sum_abs += std::abs(z);
  // Mean-zero scores over two or more names always have some nonzero entry.
  if (!(sum_abs > 0.0)) throw std::logic_error("build_positions: all z-scores are zero");

  std::map<std::string, double> positions;
  for (const auto& [id, z] : zscores) positions.emplace(id, gross_target * z / sum_abs);
  PositionBook book = PositionBook::from_positions(date, std::move(positions));
  book.zscores = zscores;
  return book;
}

BookSchedule rebalance_schedule(const ForecastPanel& panel, const PortfolioConfig& config) {
  const NormalizeOptions options{config.clip_sigma};
  BookSchedule schedule;
  for (const auto& [date, points] : panel) {
    CrossSection raw;
    for (const auto& [id, p] : points) raw.emplace(id, p.raw_forecast);
    const CrossSection z = normalize_cross_section(raw, options);
    if (z.empty()) continue;
    schedule.emplace(date, build_positions(date, z, config.gross_target));
  }
  return schedule;
}

void write_books_csv(std::ostream& out, const BookSchedule& books) {
  out << "date,instrument,zscore,position\n";
  for (const auto& [date, book] : books) {
    for (const auto& [id, position] : book.positions) {
      const auto z = book.zscores.find(id);
      out << format_date(date) << ',' << id << ','
          << (z == book.zscores.end() ? std::string{} : util::format_double(z->second)) << ','
          << util::format_double(position) << '\n';
    }
  }
}

}  // namespace kfrev
