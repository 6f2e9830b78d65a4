#include "kfrev/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "kfrev/errors.hpp"
#include "kfrev/util.hpp"

namespace kfrev {

namespace {

using nlohmann::json;

json number(double value) {
  if (std::isfinite(value)) return value;
  if (std::isnan(value)) return "nan";
  return value > 0 ? "inf" : "-inf";
}

double from_number(const json& value) {
  if (value.is_number()) return value.get<double>();
  const auto text = value.get<std::string>();
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  if (text == "nan") return NAN;
  throw DataError("not a summary number: " + text);
}

std::string cell(const json& value) {
  if (!value.is_number()) return value.get<std::string>();
  if (value.is_number_integer() || value.is_number_unsigned()) return value.dump();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", value.get<double>());
  return buf;
}

}  // namespace

nlohmann::json to_json(const SummaryStats& s) {
  return json{{"mean_rog_bps", number(s.mean_rog_bps)},
              {"stdev_rog_bps", number(s.stdev_rog_bps)},
              {"sharpe_annualized", number(s.sharpe_annualized)},
              {"t_stat", number(s.t_stat)},
              {"n_days", s.n_days},
              {"max_drawdown_bps", number(s.max_drawdown_bps)},
              {"cum_rog_bps", number(s.cum_rog_bps)}};
}

SummaryStats summary_from_json(const nlohmann::json& doc) {
  SummaryStats s;
  s.mean_rog_bps = from_number(doc.at("mean_rog_bps"));
  s.stdev_rog_bps = from_number(doc.at("stdev_rog_bps"));
  s.sharpe_annualized = from_number(doc.at("sharpe_annualized"));
  s.t_stat = from_number(doc.at("t_stat"));
  s.n_days = doc.at("n_days").get<std::size_t>();
  s.max_drawdown_bps = from_number(doc.at("max_drawdown_bps"));
  s.cum_rog_bps = from_number(doc.at("cum_rog_bps"));
  return s;
}

nlohmann::json summary_document(std::string_view market_code,
                                std::span<const BacktestResult> results) {
  json schemes = json::object();
  for (const auto& r : results) schemes[std::string(scheme_name(r.scheme))] = to_json(r.summary);
  return json{{std::string(market_code), schemes}};
}

nlohmann::json merge_summaries(std::span<const nlohmann::json> documents) {
  json merged = json::object();
  for (const auto& doc : documents) {
    if (!doc.is_object()) throw DataError("summary document must be an object");
    for (const auto& [market, schemes] : doc.items()) {
      for (const auto& [scheme, stats] : schemes.items()) {
        json& slot = merged[market][scheme];
        if (!slot.is_null() && slot != stats) {
          throw DataError("conflicting summaries for " + market + "/" + scheme);
        }
        slot = stats;
      }
    }
  }
  return merged;
}

void write_comparison_table(std::ostream& out, const nlohmann::json& merged) {
  out << "market,scheme,mean_rog_bps,sharpe_annualized,t_stat,n_days,max_drawdown_bps\n";
  for (const auto& [market, schemes] : merged.items()) {
    for (const auto& [scheme, s] : schemes.items()) {
      out << market << ',' << scheme << ',' << cell(s.at("mean_rog_bps")) << ','
          << cell(s.at("sharpe_annualized")) << ',' << cell(s.at("t_stat")) << ','
          << cell(s.at("n_days")) << ',' << cell(s.at("max_drawdown_bps")) << '\n';
    }
  }
}

std::string dump_json(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

void write_curve_csv(std::ostream& out, std::span<const CurvePoint> curve) {
  out << "date,cum_rog_bps\n";
  for (const auto& p : curve) {
    out << format_date(p.date) << ',' << util::format_double(p.cum_rog_bps) << '\n';
  }
}

}  // namespace kfrev
