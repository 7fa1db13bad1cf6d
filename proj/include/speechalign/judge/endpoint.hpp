#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace speechalign::judge {

struct ChatMessage {
  std::string role;
  std::string content;
};

// A chat-completions style model. Implementations must allow concurrent
// complete() calls. Transport problems throw TransportError.
class ChatEndpoint {
 public:
  virtual ~ChatEndpoint() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

struct EndpointConfig {
  // Base URL such as http://localhost:8000/v1; "/chat/completions" is appended
  // unless already present.
  std::string url;
  std::string model;
  std::string api_key;
  double temperature = 0.0;
  int timeout_seconds = 120;
};

nlohmann::json make_chat_request(const std::string& model, const std::vector<ChatMessage>& messages,
                                 double temperature);
// choices[0].message.content; throws TransportError on a malformed body.
std::string parse_chat_response(const std::string& body);

// OpenAI-compatible HTTP client. A fresh connection per call keeps it safe
// for concurrent use.
class HttpChatEndpoint : public ChatEndpoint {
 public:
  explicit HttpChatEndpoint(EndpointConfig config);
  std::string complete(const std::vector<ChatMessage>& messages) override;

  const std::string& host_url() const { return host_; }
  const std::string& path() const { return path_; }

 private:
  EndpointConfig config_;
  std::string host_;  // scheme://host[:port]
  std::string path_;
};

}  // namespace speechalign::judge
