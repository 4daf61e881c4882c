#include "adsorb/chat.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "adsorb/assets.hpp"
#include "adsorb/errors.hpp"

namespace adsorb {

HttpChatClient::HttpChatClient(LlmConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    const char* env = std::getenv("ADSORB_AGENT_BASE_URL");
    if (env) config_.base_url = env;
  }
  if (config_.base_url.empty())
    throw Error(ErrorKind::config,
                "no chat endpoint: set llm.base_url or ADSORB_AGENT_BASE_URL");
  while (!config_.base_url.empty() && config_.base_url.back() == '/')
    config_.base_url.pop_back();
  if (config_.api_key.empty()) {
    const char* env = std::getenv("ADSORB_AGENT_API_KEY");
    if (env) config_.api_key = env;
  }
  if (config_.api_key.empty())
    throw Error(ErrorKind::auth, "no API key: set ADSORB_AGENT_API_KEY");
}

std::string HttpChatClient::chat_once(const std::string& payload) {
  std::string host = config_.base_url;
  std::string prefix;
  std::size_t scheme = host.find("://");
  if (scheme == std::string::npos)
    throw Error(ErrorKind::config, "chat base URL must start with http:// or https://");
  std::size_t slash = host.find('/', scheme + 3);
  if (slash != std::string::npos) {
    prefix = host.substr(slash);
    host = host.substr(0, slash);
  }
  httplib::Client client(host);
  auto seconds = static_cast<time_t>(config_.timeout_s);
  auto micros =
      static_cast<time_t>((config_.timeout_s - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);
  httplib::Headers headers{{"Authorization", "Bearer " + config_.api_key}};

  auto res = client.Post(prefix + "/chat/completions", headers, payload,
                         "application/json");
  if (!res) {
    bool timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                     res.error() == httplib::Error::Read;
    throw Error(timed_out ? ErrorKind::timeout : ErrorKind::transport,
                "chat POST failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 401)
    throw Error(ErrorKind::auth,
                "chat endpoint rejected the API key (HTTP 401); check ADSORB_AGENT_API_KEY");
  if (res->status >= 400)
    throw Error(ErrorKind::transport,
                "chat endpoint returned HTTP " + std::to_string(res->status) +
                    "; body starts '" + res->body.substr(0, 120) + "'");

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(res->body);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::schema,
                std::string("chat reply is not JSON: ") + e.what() +
                    "; body starts '" + res->body.substr(0, 120) + "'");
  }
  if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty() ||
      !doc["choices"][0].contains("message") ||
      !doc["choices"][0]["message"].contains("content"))
    throw Error(ErrorKind::schema,
                "chat reply missing choices[0].message.content; body starts '" +
                    res->body.substr(0, 120) + "'");
  return doc["choices"][0]["message"]["content"].get<std::string>();
}

std::string HttpChatClient::chat(const std::vector<ChatMessage>& messages) {
  if (messages.empty())
    throw Error(ErrorKind::precondition, "chat requires at least one message");
  for (const auto& m : messages)
    if (m.role != "system" && m.role != "user" && m.role != "assistant")
      throw Error(ErrorKind::precondition, "unknown chat role '" + m.role + "'");

  nlohmann::json payload;
  payload["model"] = config_.model;
  payload["temperature"] = config_.temperature;
  payload["top_p"] = config_.top_p;
  auto& list = payload["messages"] = nlohmann::json::array();
  for (const auto& m : messages)
    list.push_back({{"role", m.role}, {"content", m.content}});
  std::string body = payload.dump();

  int attempts = std::max(1, config_.max_retries);
  for (int attempt = 0;; ++attempt) {
    try {
      return chat_once(body);
    } catch (const Error& e) {
      bool retryable = e.kind() == ErrorKind::timeout || e.kind() == ErrorKind::transport;
      if (!retryable || attempt + 1 >= attempts) throw;
      double delay = config_.backoff_s * static_cast<double>(1 << attempt);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
  }
}

MockChat::MockChat(const std::string& fixture_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(fixture_dir))
    throw Error(ErrorKind::config, "mock fixture directory not found: " + fixture_dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(fixture_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_text_file(path));
    } catch (const std::exception& e) {
      throw Error(ErrorKind::parse,
                  "bad mock fixture " + path.string() + ": " + e.what());
    }
    Fixture f;
    f.name = path.filename().string();
    f.match = doc.at("match").at("system").get<std::string>();
    for (const auto& r : doc.at("responses"))
      f.responses.push_back(r.get<std::string>());
    if (f.responses.empty())
      throw Error(ErrorKind::parse, "mock fixture " + f.name + " has no responses");
    fixtures_.push_back(std::move(f));
  }
  if (fixtures_.empty())
    throw Error(ErrorKind::config, "no .json fixtures in " + fixture_dir);
}

std::string MockChat::chat(const std::vector<ChatMessage>& messages) {
  if (messages.empty())
    throw Error(ErrorKind::precondition, "chat requires at least one message");
  std::string conversation;
  for (const auto& m : messages) {
    conversation += m.role;
    conversation += ": ";
    conversation += m.content;
    conversation += "\n";
  }
  for (auto& f : fixtures_) {
    if (conversation.find(f.match) == std::string::npos) continue;
    ++total_calls_;
    std::size_t idx = std::min(f.cursor, f.responses.size() - 1);
    ++f.cursor;
    return f.responses[idx];
  }
  throw Error(ErrorKind::transport,
              "no mock fixture matches the conversation; first line '" +
                  conversation.substr(0, conversation.find('\n')) + "'");
}

std::unique_ptr<ChatTransport> make_chat_transport(const LlmConfig& config) {
  if (!config.mock_dir.empty()) return std::make_unique<MockChat>(config.mock_dir);
  return std::make_unique<HttpChatClient>(config);
}

}  // namespace adsorb
