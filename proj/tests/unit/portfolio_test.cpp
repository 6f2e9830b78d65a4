#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "kfrev/portfolio.hpp"
#include "test_support.hpp"

namespace kfrev {
namespace {

using testing::nth_day;

CrossSection random_section(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0, 0.01);
  CrossSection xs;
  for (int i = 0; i < n; ++i) xs["N" + std::to_string(i)] = g(rng);
  return xs;
}

ForecastPanel random_panel(std::mt19937_64& rng, int dates, int names) {
  ForecastPanel panel;
  for (int d = 0; d < dates; ++d) {
    for (const auto& [id, v] : random_section(rng, names)) {
      panel[nth_day(d)].emplace(id, ForecastPoint{id, nth_day(d), 10, 10, v});
    }
  }
  return panel;
}

TEST(Normalize, WorkedExample) {
  const auto z = normalize_cross_section({{"a", 1}, {"b", 2}, {"c", 3}});
  EXPECT_NEAR(z.at("a"), -std::sqrt(1.5), 1e-12);
  EXPECT_NEAR(z.at("b"), 0.0, 1e-15);
  EXPECT_NEAR(z.at("c"), std::sqrt(1.5), 1e-12);
}

TEST(Normalize, DegenerateCrossSectionsAreEmpty) {
  EXPECT_TRUE(normalize_cross_section({{"a", 5}, {"b", 5}}).empty());
  EXPECT_TRUE(normalize_cross_section({{"a", 5}}).empty());
  EXPECT_TRUE(normalize_cross_section({}).empty());
  EXPECT_TRUE(normalize_cross_section({{"a", 1}, {"b", NAN}}).empty());
}

TEST(Normalize, NonFiniteNamesAreDropped) {
  const auto z = normalize_cross_section({{"a", 1}, {"b", INFINITY}, {"c", 3}});
  EXPECT_EQ(z.size(), 2u);
  EXPECT_EQ(z.count("b"), 0u);
}

TEST(Normalize, MeanZeroUnitSigma) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    const auto z = normalize_cross_section(random_section(rng, 2 + trial % 40));
    double mean = 0, sq = 0;
    for (const auto& [id, v] : z) mean += v;
    mean /= z.size();
    for (const auto& [id, v] : z) sq += (v - mean) * (v - mean);
    EXPECT_LT(std::abs(mean), 1e-12);
    EXPECT_NEAR(std::sqrt(sq / z.size()), 1.0, 1e-12);
  }
}

TEST(Normalize, LocationAndScaleInvariant) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto xs = random_section(rng, 30);
    CrossSection moved;
    for (const auto& [id, v] : xs) moved[id] = 3.0 * v + 0.05;
    const auto a = normalize_cross_section(xs);
    const auto b = normalize_cross_section(moved);
    for (const auto& [id, v] : a) EXPECT_NEAR(v, b.at(id), 1e-9);
  }
}

TEST(Normalize, ClipClampsThenRecenters) {
  CrossSection xs{{"out", 100}};
  for (int i = 0; i < 20; ++i) xs["n" + std::to_string(i)] = i % 2 ? 1.0 : -1.0;
  // Oracle: plain z-scores, clamped to +/-2, then shifted back to mean zero.
  CrossSection expected = normalize_cross_section(xs);
  double shift = 0;
  for (auto& [id, v] : expected) {
    v = std::clamp(v, -2.0, 2.0);
    shift += v / expected.size();
  }
  for (auto& [id, v] : expected) v -= shift;

  const auto z = normalize_cross_section(xs, {.clip_sigma = 2.0});
  ASSERT_EQ(z.size(), expected.size());
  double mean = 0;
  for (const auto& [id, v] : z) {
    EXPECT_NEAR(v, expected.at(id), 1e-12) << id;
    mean += v;
  }
  EXPECT_LT(std::abs(mean / z.size()), 1e-12);
}

TEST(Positions, WorkedExample) {
  const auto book = build_positions(nth_day(0), {{"a", -1.224745}, {"b", 0}, {"c", 1.224745}},
                                    1e6);
  EXPECT_NEAR(book.positions.at("a"), -5e5, 1e-6);
  EXPECT_EQ(book.positions.at("b"), 0.0);
  EXPECT_NEAR(book.positions.at("c"), 5e5, 1e-6);
  EXPECT_NEAR(book.gross, 1e6, 1e-6);
  EXPECT_NEAR(book.net, 0, 1e-6);
}

TEST(Positions, HomogeneousInGrossTarget) {
  const CrossSection z{{"a", -1.5}, {"b", 0.25}, {"c", 1.25}};
  const auto one = build_positions(nth_day(0), z, 1e6);
  const auto two = build_positions(nth_day(0), z, 2e6);
  for (const auto& [id, p] : one.positions) EXPECT_EQ(two.positions.at(id), 2 * p);
}

TEST(Positions, AllZeroScoresAreAnInvariantViolation) {
  EXPECT_THROW(build_positions(nth_day(0), {{"a", 0}, {"b", 0}}, 1e6), std::logic_error);
}

TEST(Schedule, BooksAreDollarNeutralAtTarget) {
  std::mt19937_64 rng(3);
  const auto panel = random_panel(rng, 200, 25);
  const auto books = rebalance_schedule(panel, {.gross_target = 2.5e6});
  ASSERT_EQ(books.size(), panel.size());
  for (const auto& [date, book] : books) {
    EXPECT_LT(std::abs(book.net) / book.gross, 1e-8);
    EXPECT_NEAR(book.gross, 2.5e6, 1e-9 * 2.5e6);
    for (const auto& [id, p] : book.positions) {
      EXPECT_EQ(p > 0, book.zscores.at(id) > 0);
    }
  }
}

TEST(Schedule, DegenerateDatesAreSkipped) {
  ForecastPanel panel;
  panel[nth_day(0)].emplace("a", ForecastPoint{"a", nth_day(0), 1, 1, 0.01});
  panel[nth_day(0)].emplace("b", ForecastPoint{"b", nth_day(0), 1, 1, 0.01});
  panel[nth_day(1)].emplace("a", ForecastPoint{"a", nth_day(1), 1, 1, 0.01});
  panel[nth_day(1)].emplace("b", ForecastPoint{"b", nth_day(1), 1, 1, -0.01});
  const auto books = rebalance_schedule(panel, {});
  EXPECT_EQ(books.count(nth_day(0)), 0u);
  EXPECT_EQ(books.count(nth_day(1)), 1u);
}

TEST(Schedule, NoLookAheadUnderTruncation) {
  std::mt19937_64 rng(4);
  const auto panel = random_panel(rng, 60, 12);
  const auto full = rebalance_schedule(panel, {});
  for (int cut = 5; cut < 60; cut += 6) {
    ForecastPanel truncated(panel.begin(), panel.upper_bound(nth_day(cut)));
    const auto partial = rebalance_schedule(truncated, {});
    for (const auto& [date, book] : partial) {
      EXPECT_EQ(book.positions, full.at(date).positions);
    }
  }
}

TEST(Schedule, IndependentOfInsertionOrder) {
  std::mt19937_64 rng(5);
  const auto panel = random_panel(rng, 10, 15);
  ForecastPanel reversed;
  for (auto it = panel.rbegin(); it != panel.rend(); ++it) {
    for (auto p = it->second.rbegin(); p != it->second.rend(); ++p)
      reversed[it->first].emplace(p->first, p->second);
  }
  const auto a = rebalance_schedule(panel, {});
  const auto b = rebalance_schedule(reversed, {});
  for (const auto& [date, book] : a) EXPECT_EQ(book.positions, b.at(date).positions);
}

}  // namespace
}  // namespace kfrev
