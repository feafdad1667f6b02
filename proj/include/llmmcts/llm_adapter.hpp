#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>

#include "json.hpp"
#include "llmmcts/prompts.hpp"
#include "llmmcts/provider.hpp"

namespace llmmcts {

struct LLMAdapterConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.6;
  double top_p = 0.9;
  int timeout_ms = 30000;
  std::string cache_dir = "fixtures";
  bool replay_only = false;
  std::string api_key_env = "OPENAI_API_KEY";  // name of the variable, never its value
  int max_in_flight = 4;
  int max_consecutive_failures = 5;

  static LLMAdapterConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct FixtureRecord {
  std::string key;
  std::string op;
  int sample = 0;
  std::string prompt;
  std::string response;
  std::string timestamp;

  nlohmann::json to_json() const;
  static FixtureRecord from_json(const nlohmann::json& j);
};

std::string sha256_hex(std::string_view data);
// Key of one sampled completion: hash of the op, the sample number and the
// full rendered prompt.
std::string fixture_key(std::string_view op, int sample, std::string_view prompt);

// One JSON file per record, named <key>.json.
class FixtureStore {
 public:
  explicit FixtureStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::optional<FixtureRecord> load(const std::string& key) const;
  void save(const FixtureRecord& record);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::mutex write_mu_;
};

// Chat-completion client with a read-through fixture cache.
class LLMClient {
 public:
  explicit LLMClient(LLMAdapterConfig config);

  // Cached response if present; otherwise (unless replay_only) one HTTP
  // request whose response is persisted. Throws ReplayMiss, ProviderTimeout,
  // HttpError; ProviderOutage after too many consecutive failures.
  std::string complete(std::span<const ChatMessage> messages, std::string_view op, int sample);

  const LLMAdapterConfig& config() const { return config_; }
  int network_requests() const { return requests_.load(); }
  FixtureStore& store() { return store_; }

 private:
  std::string request(std::span<const ChatMessage> messages, const std::string& key);
  void note_failure();

  LLMAdapterConfig config_;
  FixtureStore store_;
  std::counting_semaphore<1024> in_flight_;
  std::atomic<int> consecutive_failures_{0};
  std::atomic<int> requests_{0};
};

// CommonsenseProvider backed by the chat client and the shipped templates.
class LLMProvider : public CommonsenseProvider {
 public:
  explicit LLMProvider(std::shared_ptr<LLMClient> client);

  std::string name() const override { return "llm:" + client_->config().model; }
  std::vector<std::string> sample_object_placements(std::string_view object_class,
                                                    const Scene& scene, Rng& rng,
                                                    int sample) override;
  std::vector<std::string> sample_next_actions(const PolicyQuery& query, Rng& rng,
                                               int sample) override;
  std::string translate_goal_text(std::string_view instruction) override;

  LLMClient& client() { return *client_; }

 private:
  std::shared_ptr<LLMClient> client_;
};

// Rendered conversations, exposed for fixture recording and tests.
std::vector<ChatMessage> world_model_messages(std::string_view object_class, const Scene& scene);
std::vector<ChatMessage> policy_messages(const PolicyQuery& query);
std::vector<ChatMessage> goal_messages(std::string_view instruction);

inline constexpr std::string_view kOpPlacement = "placement";
inline constexpr std::string_view kOpPolicy = "policy";
inline constexpr std::string_view kOpGoal = "goal";

}  // namespace llmmcts
