#include "kfrev/fetch.hpp"

#include <sstream>
#include <thread>

#include "kfrev/errors.hpp"
#include "kfrev/log.hpp"
#include "kfrev/util.hpp"

namespace kfrev {

namespace {

void replace_all(std::string& text, std::string_view key, std::string_view value) {
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos)) {
    text.replace(pos, key.size(), value);
    pos += value.size();
  }
}

bool has_data_rows(std::string_view payload) {
  const auto lines = util::split(payload, '\n');
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (!util::trim(lines[i]).empty()) return true;
  }
  return false;
}

}  // namespace

std::string expand_url_template(std::string_view url_template, std::string_view instrument_id,
                                Date start, Date end) {
  std::string url(url_template);
  replace_all(url, "{symbol}", instrument_id);
  replace_all(url, "{start}", format_date(start));
  replace_all(url, "{end}", format_date(end));
  replace_all(url, "{start_epoch}", std::to_string(to_unix_seconds(start)));
  replace_all(url, "{end_epoch}", std::to_string(to_unix_seconds(end + std::chrono::days{1})));
  return url;
}

std::filesystem::path cache_path(const std::filesystem::path& cache_dir,
                                 std::string_view market_code, std::string_view instrument_id) {
  std::string file(instrument_id);
  for (char& c : file) {
    if (c == '/' || c == '\\') c = '_';
  }
  return cache_dir / std::string(market_code) / (file + ".csv");
}

PriceSeries fetch_remote(const std::string& instrument_id, Date start, Date end,
                         const FetchOptions& options) {
  const auto path = cache_path(options.cache_dir, options.market_code, instrument_id);
  if (std::filesystem::exists(path)) {
    return load_csv(path, instrument_id).slice(start, end);
  }
  if (!options.http) throw FetchError("no HTTP transport configured for " + instrument_id);
  if (options.max_attempts < 1) throw FetchError("max_attempts must be at least 1");

  const std::string url = expand_url_template(options.url_template, instrument_id, start, end);
  std::string last_error;
  std::optional<std::string> payload;
  for (int attempt = 0; attempt < options.max_attempts && !payload; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(options.base_delay * (1 << (attempt - 1)));
    try {
      HttpResponse response = options.http(url);
      if (response.status >= 200 && response.status < 300) {
        payload = std::move(response.body);
      } else {
        last_error = "HTTP status " + std::to_string(response.status);
      }
    } catch (const std::exception& e) {
      last_error = e.what();
    }
    if (!payload) {
      log::warn(instrument_id + ": attempt " + std::to_string(attempt + 1) + " failed: " +
                last_error);
    }
  }
  if (!payload) {
    throw FetchError(instrument_id + ": download failed after " +
                     std::to_string(options.max_attempts) + " attempts: " + last_error);
  }
  if (!has_data_rows(*payload)) throw FetchError(instrument_id + ": empty payload from " + url);

  // Reject corrupt payloads before they reach the cache.
  std::istringstream probe(*payload);
  read_csv(probe, instrument_id, url);

  util::write_file_atomic(path, *payload);
  return load_csv(path, instrument_id).slice(start, end);
}

}  // namespace kfrev
