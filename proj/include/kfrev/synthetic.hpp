#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kfrev/date.hpp"
#include "kfrev/market_data.hpp"

namespace kfrev {

enum class Generator { RandomWalk, OrnsteinUhlenbeck };

std::string_view generator_name(Generator generator);
std::optional<Generator> parse_generator(std::string_view text);

/// Synthetic daily-bar universe. Log closes follow either an i.i.d. Gaussian random walk
/// or a discrete OU process x' = x - rate * (x - mean) + volatility * eps. Each session's
/// open sits `overnight_fraction` of the way along the close-to-close log move, plus
/// independent noise of sigma `overnight_noise`; high/low bracket open and close.
struct SyntheticSpec {
  Generator generator = Generator::RandomWalk;
  std::size_t n_instruments = 50;
  std::size_t n_days = 2000;
  double volatility = 0.02;
  double reversion_rate = 0.0;
  double overnight_fraction = 0.3;
  double overnight_noise = 0.005;
  std::uint64_t seed = 0;
  std::string market_code = "SYN";
  Date start = Date{std::chrono::year{2018} / std::chrono::January / 2};
  double initial_price = 100.0;
};

/// Per-session OU rate giving the requested half-life in sessions.
double reversion_rate_for_half_life(double half_life);

/// Throws ConfigError unless n_instruments >= 2, n_days >= min_days and the remaining
/// parameters are in range.
void validate(const SyntheticSpec& spec, std::size_t min_days);

/// Mon-Fri sessions starting at the first weekday on or after `start`.
std::vector<Date> business_days(Date start, std::size_t count);

/// Instrument i is named SYN0000.. and draws from its own stream seeded by (seed, i),
/// so a given instrument's path does not depend on n_instruments.
std::vector<PriceSeries> generate_synthetic(const SyntheticSpec& spec);

/// Writes `<dir>/<instrument>.csv` for every instrument plus `<dir>/universe.json`.
Universe write_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir);

}  // namespace kfrev
