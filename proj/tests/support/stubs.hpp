#pragma once

#include <atomic>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "speechalign/common/error.hpp"
#include "speechalign/judge/endpoint.hpp"

namespace stub {

// Reply "!transport" makes the call throw TransportError.
inline constexpr const char* kTransportFailure = "!transport";

// Replies are routed by the first key that occurs in the final user message;
// each key has a queue whose last entry repeats once the rest is consumed.
// Calls without a matching key use the default queue.
class ScriptedEndpoint : public speechalign::judge::ChatEndpoint {
 public:
  explicit ScriptedEndpoint(std::vector<std::string> default_replies = {"<score>3</score>"})
      : default_(default_replies.begin(), default_replies.end()) {}

  void script(const std::string& key, std::vector<std::string> replies) {
    std::lock_guard lock(mu_);
    routes_.push_back({key, {replies.begin(), replies.end()}});
  }

  std::string complete(const std::vector<speechalign::judge::ChatMessage>& messages) override {
    std::string reply;
    {
      std::lock_guard lock(mu_);
      ++calls_;
      prompts_.push_back(messages.back().content);
      std::deque<std::string>* q = &default_;
      for (auto& r : routes_) {
        if (messages.back().content.find(r.key) != std::string::npos) {
          q = &r.replies;
          ++per_key_[r.key];
          break;
        }
      }
      reply = q->front();
      if (q->size() > 1) q->pop_front();
    }
    if (reply == kTransportFailure) throw speechalign::TransportError("scripted transport failure");
    return reply;
  }

  int calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }
  int calls_for(const std::string& key) const {
    std::lock_guard lock(mu_);
    auto it = per_key_.find(key);
    return it == per_key_.end() ? 0 : it->second;
  }
  std::vector<std::string> prompts() const {
    std::lock_guard lock(mu_);
    return prompts_;
  }

 private:
  struct Route {
    std::string key;
    std::deque<std::string> replies;
  };
  mutable std::mutex mu_;
  std::deque<std::string> default_;
  std::vector<Route> routes_;
  std::map<std::string, int> per_key_;
  std::vector<std::string> prompts_;
  int calls_ = 0;
};

// OpenAI-style chat-completions server on 127.0.0.1 with an ephemeral port.
// The handler receives the parsed request and returns the reply content.
class LocalChatServer {
 public:
  using Handler = std::function<std::string(const nlohmann::json& request)>;

  explicit LocalChatServer(Handler handler, int status = 200) : handler_(std::move(handler)) {
    server_.Post("/v1/chat/completions", [this, status](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      {
        std::lock_guard lock(mu_);
        last_auth_ = req.get_header_value("Authorization");
        last_request_ = req.body;
      }
      if (status != 200) {
        res.status = status;
        res.set_content("{\"error\":\"stub\"}", "application/json");
        return;
      }
      auto j = nlohmann::json::parse(req.body);
      nlohmann::json body{{"choices", {{{"message", {{"role", "assistant"}, {"content", handler_(j)}}}}}}};
      res.set_content(body.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~LocalChatServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  int requests() const { return requests_; }
  std::string last_auth() const {
    std::lock_guard lock(mu_);
    return last_auth_;
  }
  std::string last_request() const {
    std::lock_guard lock(mu_);
    return last_request_;
  }

 private:
  Handler handler_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  mutable std::mutex mu_;
  std::string last_auth_;
  std::string last_request_;
};

// A port on 127.0.0.1 with nothing listening.
inline int closed_port() {
  httplib::Server s;
  int port = s.bind_to_any_port("127.0.0.1");
  return port;  // the socket closes when `s` goes out of scope
}

}  // namespace stub
