#include "adp/gateway.hpp"

#include "httplib.h"

#include <fmt/format.h>

namespace adp {

namespace {

class HttplibTransport final : public HttpTransport {
 public:
  HttplibTransport(std::string base_url, std::string api_key)
      : base_url_(std::move(base_url)), api_key_(std::move(api_key)) {}

  Reply post_json(const std::string& path, const std::string& body) override {
    httplib::Client client(base_url_);
    client.set_connection_timeout(30, 0);
    client.set_read_timeout(300, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto result = client.Post(path, headers, body, "application/json");
    if (!result) {
      throw Error(Errc::transport,
                  fmt::format("POST {}{} failed: {}", base_url_, path,
                              httplib::to_string(result.error())));
    }
    return Reply{result->status, result->body};
  }

 private:
  std::string base_url_;
  std::string api_key_;
};

}  // namespace

std::unique_ptr<HttpTransport> make_http_transport(const std::string& base_url,
                                                   const std::string& api_key) {
  return std::make_unique<HttplibTransport>(base_url, api_key);
}

}  // namespace adp
