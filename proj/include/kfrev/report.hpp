#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "json.hpp"

#include "kfrev/backtest.hpp"
#include "kfrev/metrics.hpp"

namespace kfrev {

/// Non-finite values are written as the strings "inf", "-inf" or "nan".
nlohmann::json to_json(const SummaryStats& stats);
SummaryStats summary_from_json(const nlohmann::json& doc);

/// {market: {scheme: stats}}.
nlohmann::json summary_document(std::string_view market_code,
                                std::span<const BacktestResult> results);

/// Merges summary documents. The same (market, scheme) appearing twice with different
/// numbers throws DataError.
nlohmann::json merge_summaries(std::span<const nlohmann::json> documents);

/// Cross-market table, one row per (market, scheme), columns separated by commas.
void write_comparison_table(std::ostream& out, const nlohmann::json& merged);

/// Stable text form: 2-space indent, sorted keys, trailing newline.
std::string dump_json(const nlohmann::json& doc);

/// `date,cum_rog_bps`.
void write_curve_csv(std::ostream& out, std::span<const CurvePoint> curve);

}  // namespace kfrev
