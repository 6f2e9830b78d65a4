#include "httplib.h"

#include "kfrev/errors.hpp"
#include "kfrev/fetch.hpp"

namespace kfrev {

HttpGet default_http_get() {
  return [](const std::string& url) -> HttpResponse {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw FetchError("not an absolute URL: " + url);
    const auto path_begin = url.find('/', scheme_end + 3);
    const std::string origin = url.substr(0, path_begin);
    const std::string target = path_begin == std::string::npos ? "/" : url.substr(path_begin);

    httplib::Client client(origin);
    client.set_follow_location(true);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    auto result = client.Get(target, httplib::Headers{{"User-Agent", "kfrev/0.1"}});
    if (!result) {
      throw FetchError("GET " + url + ": " + httplib::to_string(result.error()));
    }
    return HttpResponse{result->status, result->body};
  };
}

}  // namespace kfrev
