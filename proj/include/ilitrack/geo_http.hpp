#pragma once

// HTTP transport for the external geocoder contract: GET
// {path}?q={query}, 200 with the country code as the body, anything
// else meaning unknown. Kept out of geo.hpp so only translation units
// that really talk HTTP pay for the header.

#include <httplib.h>

#include <memory>
#include <optional>
#include <string>

#include "ilitrack/geo.hpp"
#include "ilitrack/util.hpp"

namespace ilitrack {

class HttpGeocoder : public ExternalGeocoder {
 public:
  HttpGeocoder(std::string host, int port, std::string path = "/resolve",
               int timeout_seconds = 5)
      : host_(std::move(host)), port_(port), path_(std::move(path)),
        timeout_seconds_(timeout_seconds) {}

  std::optional<std::string> lookup(const std::string& query) override {
    httplib::Client client(host_, port_);
    client.set_connection_timeout(timeout_seconds_, 0);
    client.set_read_timeout(timeout_seconds_, 0);
    httplib::Params params{{"q", query}};
    auto res = client.Get(path_, params, httplib::Headers{});
    if (!res || res->status != 200) return std::nullopt;
    std::string body(trim(res->body));
    if (body.empty()) return std::nullopt;
    return body;
  }

 private:
  std::string host_;
  int port_;
  std::string path_;
  int timeout_seconds_;
};

}  // namespace ilitrack
