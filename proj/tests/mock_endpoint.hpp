#pragma once

#include <chrono>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"

#include "gecforge/io.hpp"

namespace gecforge::testing {

/// Local chat-completion endpoint. The responder sees the 1-based call
/// number and the parsed request body and returns (status, body).
class MockEndpoint {
 public:
  struct Reply {
    int status = 200;
    std::string body;
  };
  using Responder = std::function<Reply(int call, const Json& request)>;

  static std::string completion(const std::string& content) {
    return Json{{"choices", Json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}}
        .dump();
  }

  explicit MockEndpoint(Responder responder) : responder_(std::move(responder)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      int call;
      {
        std::lock_guard lock(mutex_);
        call = static_cast<int>(requests_.size()) + 1;
        requests_.push_back(Json::parse(req.body));
        authorizations_.push_back(req.get_header_value("Authorization"));
      }
      auto r = responder_(call, requests_.back());
      res.status = r.status;
      res.set_content(r.body, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    for (int i = 0; i < 400 && !server_.is_running(); ++i)
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }

  ~MockEndpoint() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  int port() const { return port_; }

  std::size_t calls() const {
    std::lock_guard lock(mutex_);
    return requests_.size();
  }
  std::vector<Json> requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
  }
  std::vector<std::string> authorizations() const {
    std::lock_guard lock(mutex_);
    return authorizations_;
  }

 private:
  Responder responder_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mutex_;
  std::vector<Json> requests_;
  std::vector<std::string> authorizations_;
};

}  // namespace gecforge::testing
