#include "kfrev/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "kfrev/errors.hpp"
#include "kfrev/util.hpp"

namespace kfrev {

std::string_view generator_name(Generator generator) {
  return generator == Generator::RandomWalk ? "random_walk" : "ou_mean_revert";
}

std::optional<Generator> parse_generator(std::string_view text) {
  if (text == "random_walk") return Generator::RandomWalk;
  if (text == "ou_mean_revert") return Generator::OrnsteinUhlenbeck;
  return std::nullopt;
}

double reversion_rate_for_half_life(double half_life) {
  if (!(half_life > 0.0)) throw std::invalid_argument("half-life must be positive");
  return 1.0 - std::pow(0.5, 1.0 / half_life);
}

void validate(const SyntheticSpec& spec, std::size_t min_days) {
  const auto require = [](bool ok, const std::string& message) {
    if (!ok) throw ConfigError("synthetic spec: " + message);
  };
  require(spec.n_instruments >= 2, "n_instruments must be >= 2");
  require(spec.n_days >= std::max<std::size_t>(min_days, 2),
          "n_days must be >= " + std::to_string(std::max<std::size_t>(min_days, 2)));
  require(std::isfinite(spec.volatility) && spec.volatility > 0.0, "volatility must be > 0");
  require(spec.reversion_rate >= 0.0 && spec.reversion_rate < 2.0,
          "reversion rate must lie in [0, 2)");
  require(spec.generator == Generator::OrnsteinUhlenbeck || spec.reversion_rate == 0.0,
          "reversion rate applies only to ou_mean_revert");
  require(spec.overnight_fraction >= 0.0 && spec.overnight_fraction <= 1.0,
          "overnight fraction must lie in [0, 1]");
  require(std::isfinite(spec.overnight_noise) && spec.overnight_noise >= 0.0,
          "overnight noise must be >= 0");
  require(std::isfinite(spec.initial_price) && spec.initial_price > 0.0,
          "initial price must be > 0");
  require(!spec.market_code.empty(), "market code is required");
}

std::vector<Date> business_days(Date start, std::size_t count) {
  std::vector<Date> days;
  days.reserve(count);
  for (Date d = start; days.size() < count; d += std::chrono::days{1}) {
    const std::chrono::weekday wd{d};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) days.push_back(d);
  }
  return days;
}

namespace {

std::string instrument_name(const std::string& market, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return market + buf;
}

PriceSeries generate_one(const SyntheticSpec& spec, const std::vector<Date>& dates,
                         std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed),
                    static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(index), 0x6b667276u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double rate = spec.generator == Generator::OrnsteinUhlenbeck ? spec.reversion_rate : 0.0;
  const double level = std::log(spec.initial_price) + 0.2 * normal(rng);
  double log_close = level;
  if (rate > 0.0) {
    const double persistence = 1.0 - rate;
    log_close += spec.volatility / std::sqrt(1.0 - persistence * persistence) * normal(rng);
  }
  const double wick = 0.25 * spec.volatility;

  std::vector<Bar> bars;
  bars.reserve(dates.size());
  for (std::size_t t = 0; t < dates.size(); ++t) {
    double log_open = 0.0;
    if (t == 0) {
      log_open = log_close + spec.overnight_noise * normal(rng);
    } else {
      const double move = -rate * (log_close - level) + spec.volatility * normal(rng);
      log_open = log_close + spec.overnight_fraction * move + spec.overnight_noise * normal(rng);
      log_close += move;
    }
    Bar bar{.date = dates[t]};
    bar.open = std::exp(log_open);
    bar.close = std::exp(log_close);
    bar.high = std::max(bar.open, bar.close) * std::exp(wick * std::abs(normal(rng)));
    bar.low = std::min(bar.open, bar.close) * std::exp(-wick * std::abs(normal(rng)));
    bar.volume = std::round(1e6 * std::exp(0.3 * normal(rng)));
    bars.push_back(bar);
  }
  return PriceSeries(instrument_name(spec.market_code, index), std::move(bars));
}

}  // namespace

std::vector<PriceSeries> generate_synthetic(const SyntheticSpec& spec) {
  validate(spec, 2);
  const auto dates = business_days(spec.start, spec.n_days);
  std::vector<PriceSeries> out;
  out.reserve(spec.n_instruments);
  for (std::size_t i = 0; i < spec.n_instruments; ++i) out.push_back(generate_one(spec, dates, i));
  return out;
}

Universe write_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir) {
  const auto series = generate_synthetic(spec);
  Universe universe{spec.market_code, "synthetic-" + std::string(generator_name(spec.generator)),
                    {}, series.front().bars().front().date, series.front().bars().back().date};
  for (const auto& s : series) {
    std::ostringstream text;
    write_csv(text, s);
    util::write_file_atomic(dir / (s.instrument_id() + ".csv"), text.str());
    universe.instruments.push_back(s.instrument_id());
  }
  save_universe(dir / "universe.json", universe);
  return universe;
}

}  // namespace kfrev
