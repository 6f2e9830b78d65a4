#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include "kfrev/date.hpp"
#include "kfrev/market_data.hpp"

namespace kfrev {

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Performs one GET. Transport failures (no response at all) throw.
using HttpGet = std::function<HttpResponse(const std::string& url)>;

/// cpp-httplib backed transport supporting http:// and https:// URLs.
HttpGet default_http_get();

struct FetchOptions {
  /// Placeholders: {symbol}, {start}, {end} (YYYY-MM-DD), {start_epoch}, {end_epoch}.
  /// {end_epoch} is the first second after `end`, so the range is inclusive.
  std::string url_template;
  std::filesystem::path cache_dir;
  std::string market_code;
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{500};
  HttpGet http;
};

std::string expand_url_template(std::string_view url_template, std::string_view instrument_id,
                                Date start, Date end);

/// `<cache_dir>/<market>/<instrument>.csv`; path separators in the id become '_'.
std::filesystem::path cache_path(const std::filesystem::path& cache_dir,
                                 std::string_view market_code, std::string_view instrument_id);

/// Serves from cache when present. Otherwise downloads with exponential backoff,
/// validates the payload with the CSV loader, writes it to the cache and returns the
/// re-parsed cache file restricted to [start, end].
PriceSeries fetch_remote(const std::string& instrument_id, Date start, Date end,
                         const FetchOptions& options);

}  // namespace kfrev
