#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace adsorb {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;
};

struct LlmConfig {
  std::string base_url;
  std::string model = "gpt-4o";
  std::string api_key;  // falls back to ADSORB_AGENT_API_KEY
  double temperature = 1.0;
  double top_p = 1.0;
  int max_retries = 3;  // per module: transport attempts, parse retries, critic cycles
  double timeout_s = 60.0;
  double backoff_s = 0.5;     // base of the exponential retry backoff
  std::string mock_dir;       // when set, replaces the live transport
  bool use_llm_critic = false;
  bool use_llm_indexer = false;
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual std::string chat(const std::vector<ChatMessage>& messages) = 0;
};

// OpenAI-style chat completion client. 401 fails immediately with the env
// var to set; timeouts and 5xx are retried with exponential backoff up to
// max_retries attempts.
class HttpChatClient : public ChatTransport {
 public:
  explicit HttpChatClient(LlmConfig config);
  std::string chat(const std::vector<ChatMessage>& messages) override;

 private:
  std::string chat_once(const std::string& payload);

  LlmConfig config_;
};

// Scripted replies for tests. A fixture directory holds JSON files
//   {"match": {"system": "<substring>"}, "responses": ["...", ...]}
// scanned in filename order; the first file whose match string occurs in the
// concatenated conversation answers, consuming its responses in order and
// repeating the last one when exhausted.
class MockChat : public ChatTransport {
 public:
  explicit MockChat(const std::string& fixture_dir);
  std::string chat(const std::vector<ChatMessage>& messages) override;

  int total_calls() const { return total_calls_; }

 private:
  struct Fixture {
    std::string name;
    std::string match;
    std::vector<std::string> responses;
    std::size_t cursor = 0;
  };
  std::vector<Fixture> fixtures_;
  int total_calls_ = 0;
};

std::unique_ptr<ChatTransport> make_chat_transport(const LlmConfig& config);

}  // namespace adsorb
