#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "httplib.h"
#include "kfrev/errors.hpp"
#include "kfrev/fetch.hpp"
#include "test_support.hpp"

namespace kfrev {
namespace {

using testing::day;

const std::string kPayload =
    "Date,Open,High,Low,Close,Adj Close,Volume\n"
    "2024-01-02,10,11,9,10.5,10.5,100\n"
    "2024-01-03,10.5,12,10,11.5,11.5,200\n"
    "2024-01-04,11.5,11.6,11,11.2,11.2,300\n";

struct FakeTransport {
  std::vector<HttpResponse> script;  // replayed in order, last one repeats
  std::atomic<int> calls{0};
  std::string last_url;

  HttpGet get() {
    return [this](const std::string& url) {
      last_url = url;
      const int i = calls++;
      return script.at(std::min<std::size_t>(i, script.size() - 1));
    };
  }
};

FetchOptions options(const testing::TempDir& dir, FakeTransport& fake) {
  return FetchOptions{.url_template = "fake://{symbol}?a={start}&b={end}",
                      .cache_dir = dir.path(),
                      .market_code = "US",
                      .max_attempts = 3,
                      .base_delay = std::chrono::milliseconds{1},
                      .http = fake.get()};
}

TEST(Fetch, CacheHitMakesNoHttpCalls) {
  testing::TempDir dir("fetch-cache");
  testing::write_text(cache_path(dir.path(), "US", "AAA"), kPayload);
  FakeTransport fake{{{500, ""}}};
  const auto s = fetch_remote("AAA", day(2024, 1, 1), day(2024, 12, 31), options(dir, fake));
  EXPECT_EQ(fake.calls, 0);
  EXPECT_EQ(s.size(), 3u);
}

TEST(Fetch, DownloadedSeriesEqualsCachedFileLoad) {
  testing::TempDir dir("fetch-roundtrip");
  FakeTransport fake{{{200, kPayload}}};
  const auto s = fetch_remote("AAA", day(2024, 1, 1), day(2024, 12, 31), options(dir, fake));
  EXPECT_EQ(fake.calls, 1);
  EXPECT_EQ(fake.last_url, "fake://AAA?a=2024-01-01&b=2024-12-31");
  const auto file = cache_path(dir.path(), "US", "AAA");
  EXPECT_EQ(testing::read_text(file), kPayload);
  EXPECT_EQ(s, load_csv(file, "AAA"));
  EXPECT_EQ(s.basis(), PriceBasis::AdjustedClose);
}

TEST(Fetch, ResultIsRestrictedToRequestedRange) {
  testing::TempDir dir("fetch-range");
  FakeTransport fake{{{200, kPayload}}};
  const auto s = fetch_remote("AAA", day(2024, 1, 3), day(2024, 1, 3), options(dir, fake));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.bars()[0].date, day(2024, 1, 3));
}

TEST(Fetch, EmptyPayloadFailsAndCachesNothing) {
  testing::TempDir dir("fetch-empty");
  FakeTransport fake{{{200, "Date,Open,High,Low,Close,Adj Close,Volume\n"}}};
  EXPECT_THROW(fetch_remote("NOPE", day(2024, 1, 1), day(2024, 2, 1), options(dir, fake)),
               FetchError);
  EXPECT_FALSE(std::filesystem::exists(cache_path(dir.path(), "US", "NOPE")));
}

TEST(Fetch, RetriesThenSucceeds) {
  testing::TempDir dir("fetch-retry");
  FakeTransport fake{{{503, ""}, {429, ""}, {200, kPayload}}};
  const auto s = fetch_remote("AAA", day(2024, 1, 1), day(2024, 2, 1), options(dir, fake));
  EXPECT_EQ(fake.calls, 3);
  EXPECT_EQ(s.size(), 3u);
}

TEST(Fetch, GivesUpAfterMaxAttempts) {
  testing::TempDir dir("fetch-fail");
  FakeTransport fake{{{500, ""}}};
  EXPECT_THROW(fetch_remote("AAA", day(2024, 1, 1), day(2024, 2, 1), options(dir, fake)),
               FetchError);
  EXPECT_EQ(fake.calls, 3);
  EXPECT_FALSE(std::filesystem::exists(cache_path(dir.path(), "US", "AAA")));
}

TEST(Fetch, TransportExceptionsCountAsFailures) {
  testing::TempDir dir("fetch-throw");
  int calls = 0;
  auto opts = FetchOptions{.url_template = "x",
                           .cache_dir = dir.path(),
                           .market_code = "US",
                           .max_attempts = 2,
                           .base_delay = std::chrono::milliseconds{1},
                           .http = [&](const std::string&) -> HttpResponse {
                             ++calls;
                             throw std::runtime_error("connection refused");
                           }};
  EXPECT_THROW(fetch_remote("AAA", day(2024, 1, 1), day(2024, 2, 1), opts), FetchError);
  EXPECT_EQ(calls, 2);
}

TEST(Fetch, CorruptPayloadIsNotCached) {
  testing::TempDir dir("fetch-corrupt");
  FakeTransport fake{{{200, "<html>\n<body>rate limited</body>\n"}}};
  EXPECT_THROW(fetch_remote("AAA", day(2024, 1, 1), day(2024, 2, 1), options(dir, fake)),
               DataError);
  EXPECT_FALSE(std::filesystem::exists(cache_path(dir.path(), "US", "AAA")));
}

TEST(Fetch, UrlTemplateExpansion) {
  EXPECT_EQ(expand_url_template("u/{symbol}?p1={start_epoch}&p2={end_epoch}&s={start}", "BRK-B",
                                day(1970, 1, 1), day(1970, 1, 1)),
            "u/BRK-B?p1=0&p2=86400&s=1970-01-01");
  EXPECT_EQ(cache_path("c", "KR", "a/b"), std::filesystem::path("c") / "KR" / "a_b.csv");
}

TEST(Fetch, DefaultTransportAgainstLocalServer) {
  httplib::Server server;
  server.Get("/data/AAA.csv", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(kPayload, "text/csv");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  testing::TempDir dir("fetch-http");
  FetchOptions opts{.url_template = "http://127.0.0.1:" + std::to_string(port) + "/data/{symbol}.csv",
                    .cache_dir = dir.path(),
                    .market_code = "US",
                    .max_attempts = 2,
                    .base_delay = std::chrono::milliseconds{1},
                    .http = default_http_get()};
  const auto s = fetch_remote("AAA", day(2024, 1, 1), day(2024, 2, 1), opts);
  EXPECT_EQ(s.size(), 3u);
  EXPECT_THROW(fetch_remote("ZZZ", day(2024, 1, 1), day(2024, 2, 1), opts), FetchError);

  server.stop();
  worker.join();
}

}  // namespace
}  // namespace kfrev
