#include "speechalign/judge/endpoint.hpp"

#include "httplib.h"
#include "speechalign/common/error.hpp"

namespace speechalign::judge {

nlohmann::json make_chat_request(const std::string& model, const std::vector<ChatMessage>& messages,
                                 double temperature) {
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  return {{"model", model}, {"messages", msgs}, {"temperature", temperature}};
}

std::string parse_chat_response(const std::string& body) {
  try {
    const auto j = nlohmann::json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed chat-completions response: ") + e.what());
  }
}

HttpChatEndpoint::HttpChatEndpoint(EndpointConfig config) : config_(std::move(config)) {
  const auto& url = config_.url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ValidationError("endpoint URL needs a scheme (http:// or https://): " + url);
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ValidationError("unsupported endpoint scheme: " + scheme);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  host_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? std::string() : url.substr(path_start);
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  constexpr std::string_view kSuffix = "/chat/completions";
  if (path_.size() < kSuffix.size() ||
      path_.compare(path_.size() - kSuffix.size(), kSuffix.size(), kSuffix) != 0) {
    path_ += kSuffix;
  }
  if (config_.model.empty()) throw ValidationError("endpoint model id is empty");
}

std::string HttpChatEndpoint::complete(const std::vector<ChatMessage>& messages) {
  httplib::Client client(host_);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  const auto body = make_chat_request(config_.model, messages, config_.temperature).dump();
  auto res = client.Post(path_, headers, body, "application/json");
  if (!res) {
    throw TransportError("request to " + host_ + path_ + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError("endpoint returned HTTP " + std::to_string(res->status));
  }
  return parse_chat_response(res->body);
}

}  // namespace speechalign::judge
