#include "kfrev/config.hpp"

#include <cmath>
#include <initializer_list>
#include <set>
#include <string_view>

#include "kfrev/errors.hpp"
#include "kfrev/util.hpp"

namespace kfrev {

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view context) {
  if (!obj.is_object()) throw ConfigError(std::string(context) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ConfigError("unknown key '" + key + "' in " + std::string(context));
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& text) {
  std::filesystem::path p(text);
  if (p.empty() || p.is_absolute() || base.empty()) return p.lexically_normal();
  return (base / p).lexically_normal();
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

void validate(const RunConfig& c) {
  const auto require = [](bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
  };
  const auto& f = c.filter;
  require(std::isfinite(f.process_var) && f.process_var >= 0.0, "filter.q must be >= 0");
  require(std::isfinite(f.measurement_var) && f.measurement_var > 0.0, "filter.r must be > 0");
  require(std::isfinite(f.initial_var) && f.initial_var >= 0.0, "filter.p0 must be >= 0");
  require(c.signal.warmup >= 1, "filter.warmup must be >= 1");
  require(c.max_lag >= 1, "backtest.max_lag must be >= 1");
  require(std::isfinite(c.portfolio.gross_target) && c.portfolio.gross_target > 0.0,
          "portfolio.gross_target must be > 0");
  require(!c.portfolio.clip_sigma || *c.portfolio.clip_sigma > 0.0,
          "portfolio.clip_sigma must be > 0 when set");
  require(!c.schemes.empty(), "backtest.schemes must name at least one scheme");
  require(std::set<ExecutionScheme>(c.schemes.begin(), c.schemes.end()).size() == c.schemes.size(),
          "backtest.schemes has duplicates");
  require(std::isfinite(c.periods_per_year) && c.periods_per_year > 0.0,
          "backtest.periods_per_year must be > 0");
  require(!c.universe_path.empty(), "universe path is required");
  require(!(c.start && c.end) || *c.start < *c.end, "start must precede end");
  require(!c.output_dir.empty(), "output_dir is required");
  if (c.data.kind == DataSourceConfig::Kind::Local) {
    require(!c.data.dir.empty(), "data.dir is required for a local source");
  } else {
    require(!c.data.cache_dir.empty(), "data.cache_dir is required for a remote source");
    require(!c.data.url_template.empty(), "data.url_template is required for a remote source");
    require(c.data.max_attempts >= 1, "data.max_attempts must be >= 1");
    require(c.data.backoff_ms >= 0, "data.backoff_ms must be >= 0");
  }
}

nlohmann::json to_json(const RunConfig& c) {
  json schemes = json::array();
  for (auto s : c.schemes) schemes.push_back(scheme_name(s));
  return json{
      {"market", c.market_code},
      {"universe", c.universe_path.generic_string()},
      {"data",
       {{"source", c.data.kind == DataSourceConfig::Kind::Local ? "local" : "remote"},
        {"dir", c.data.dir.generic_string()},
        {"cache_dir", c.data.cache_dir.generic_string()},
        {"url_template", c.data.url_template},
        {"max_attempts", c.data.max_attempts},
        {"backoff_ms", c.data.backoff_ms}}},
      {"start", c.start ? json(format_date(*c.start)) : json(nullptr)},
      {"end", c.end ? json(format_date(*c.end)) : json(nullptr)},
      {"filter",
       {{"q", c.filter.process_var},
        {"r", c.filter.measurement_var},
        {"p0", c.filter.initial_var},
        {"warmup", c.signal.warmup},
        {"c_kalman", fair_value_name(c.signal.fair_value)}}},
      {"signal", {{"sign", sign_mode_name(c.signal.sign)}}},
      {"portfolio",
       {{"gross_target", c.portfolio.gross_target},
        {"clip_sigma", c.portfolio.clip_sigma ? json(*c.portfolio.clip_sigma) : json(nullptr)}}},
      {"backtest",
       {{"schemes", schemes},
        {"exec2_entry", close_entry_name(c.close_entry)},
        {"max_lag", c.max_lag},
        {"periods_per_year", c.periods_per_year}}},
      {"output_dir", c.output_dir.generic_string()},
      {"seed", c.seed},
      {"threads", c.threads},
      {"dumps", {{"panel", c.dumps.panel}, {"books", c.dumps.books}, {"filter", c.dumps.filter}}},
  };
}

RunConfig run_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  RunConfig c;
  try {
    check_keys(doc,
               {"market", "universe", "data", "start", "end", "filter", "signal", "portfolio",
                "backtest", "output_dir", "seed", "threads", "dumps"},
               "config");
    read(doc, "market", c.market_code);
    if (doc.contains("universe")) {
      c.universe_path = resolve(base_dir, doc.at("universe").get<std::string>());
    }
    if (doc.contains("output_dir")) {
      c.output_dir = resolve(base_dir, doc.at("output_dir").get<std::string>());
    }
    for (const char* key : {"start", "end"}) {
      if (doc.contains(key) && !doc.at(key).is_null()) {
        (std::string_view(key) == "start" ? c.start : c.end) =
            parse_date_or_throw(doc.at(key).get<std::string>());
      }
    }
    read(doc, "seed", c.seed);
    read(doc, "threads", c.threads);

    if (doc.contains("data")) {
      const json& d = doc.at("data");
      check_keys(d, {"source", "dir", "cache_dir", "url_template", "max_attempts", "backoff_ms"},
                 "data");
      const auto source = d.value("source", std::string("local"));
      if (source == "local") {
        c.data.kind = DataSourceConfig::Kind::Local;
      } else if (source == "remote") {
        c.data.kind = DataSourceConfig::Kind::Remote;
      } else {
        throw ConfigError("data.source must be 'local' or 'remote', got '" + source + "'");
      }
      if (d.contains("dir")) c.data.dir = resolve(base_dir, d.at("dir").get<std::string>());
      if (d.contains("cache_dir")) {
        c.data.cache_dir = resolve(base_dir, d.at("cache_dir").get<std::string>());
      }
      read(d, "url_template", c.data.url_template);
      read(d, "max_attempts", c.data.max_attempts);
      read(d, "backoff_ms", c.data.backoff_ms);
    }
    if (doc.contains("filter")) {
      const json& f = doc.at("filter");
      check_keys(f, {"q", "r", "p0", "warmup", "c_kalman"}, "filter");
      read(f, "q", c.filter.process_var);
      read(f, "r", c.filter.measurement_var);
      read(f, "p0", c.filter.initial_var);
      if (f.contains("warmup")) {
        const auto warmup = f.at("warmup").get<long long>();
        if (warmup < 1) throw ConfigError("filter.warmup must be >= 1");
        c.signal.warmup = static_cast<std::size_t>(warmup);
      }
      if (f.contains("c_kalman")) {
        const auto text = f.at("c_kalman").get<std::string>();
        const auto mode = parse_fair_value(text);
        if (!mode) throw ConfigError("filter.c_kalman must be 'posterior' or 'prior'");
        c.signal.fair_value = *mode;
      }
    }
    if (doc.contains("signal")) {
      const json& s = doc.at("signal");
      check_keys(s, {"sign"}, "signal");
      if (s.contains("sign")) {
        const auto mode = parse_sign_mode(s.at("sign").get<std::string>());
        if (!mode) throw ConfigError("signal.sign must be 'reversal' or 'literal'");
        c.signal.sign = *mode;
      }
    }
    if (doc.contains("portfolio")) {
      const json& p = doc.at("portfolio");
      check_keys(p, {"gross_target", "clip_sigma"}, "portfolio");
      read(p, "gross_target", c.portfolio.gross_target);
      if (p.contains("clip_sigma") && !p.at("clip_sigma").is_null()) {
        c.portfolio.clip_sigma = p.at("clip_sigma").get<double>();
      }
    }
    if (doc.contains("backtest")) {
      const json& b = doc.at("backtest");
      check_keys(b, {"schemes", "exec2_entry", "max_lag", "periods_per_year"}, "backtest");
      if (b.contains("schemes")) {
        c.schemes.clear();
        for (const auto& name : b.at("schemes")) {
          const auto scheme = parse_scheme(name.get<std::string>());
          if (!scheme) throw ConfigError("unknown scheme '" + name.get<std::string>() + "'");
          c.schemes.push_back(*scheme);
        }
      }
      if (b.contains("exec2_entry")) {
        const auto entry = parse_close_entry(b.at("exec2_entry").get<std::string>());
        if (!entry) throw ConfigError("backtest.exec2_entry must be 'signal_close' or 'next_close'");
        c.close_entry = *entry;
      }
      if (b.contains("max_lag")) {
        const auto lag = b.at("max_lag").get<long long>();
        if (lag < 1) throw ConfigError("backtest.max_lag must be >= 1");
        c.max_lag = static_cast<std::size_t>(lag);
      }
      read(b, "periods_per_year", c.periods_per_year);
    }
    if (doc.contains("dumps")) {
      const json& d = doc.at("dumps");
      check_keys(d, {"panel", "books", "filter"}, "dumps");
      read(d, "panel", c.dumps.panel);
      read(d, "books", c.dumps.books);
      read(d, "filter", c.dumps.filter);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(util::read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  if (doc.is_object() && doc.contains("config") && doc.contains("data_provenance")) {
    doc = doc.at("config");
  }
  return run_config_from_json(doc, path.parent_path());
}

}  // namespace kfrev
