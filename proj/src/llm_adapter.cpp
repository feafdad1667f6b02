#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "llmmcts/llm_adapter.hpp"

#include <openssl/sha.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <regex>
#include <sstream>

#include "httplib.h"
#include "llmmcts/catalog.hpp"
#include "llmmcts/errors.hpp"

namespace llmmcts {

using nlohmann::json;

LLMAdapterConfig LLMAdapterConfig::from_json(const json& j) {
  LLMAdapterConfig c;
  c.endpoint = j.value("endpoint", c.endpoint);
  c.model = j.value("model", c.model);
  c.temperature = j.value("temperature", c.temperature);
  c.top_p = j.value("top_p", c.top_p);
  c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
  c.cache_dir = j.value("cache_dir", c.cache_dir);
  c.replay_only = j.value("replay_only", c.replay_only);
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
  c.max_consecutive_failures = j.value("max_consecutive_failures", c.max_consecutive_failures);
  if (c.max_in_flight < 1 || c.max_in_flight > 1024) {
    throw std::invalid_argument("max_in_flight must be in [1, 1024]");
  }
  if (c.max_consecutive_failures < 1) {
    throw std::invalid_argument("max_consecutive_failures must be >= 1");
  }
  return c;
}

json LLMAdapterConfig::to_json() const {
  return {{"endpoint", endpoint},       {"model", model},
          {"temperature", temperature}, {"top_p", top_p},
          {"timeout_ms", timeout_ms},   {"cache_dir", cache_dir},
          {"replay_only", replay_only}, {"api_key_env", api_key_env},
          {"max_in_flight", max_in_flight},
          {"max_consecutive_failures", max_consecutive_failures}};
}

json FixtureRecord::to_json() const {
  return {{"key", key},           {"op", op},
          {"sample", sample},     {"prompt", prompt},
          {"response", response}, {"timestamp", timestamp}};
}

FixtureRecord FixtureRecord::from_json(const json& j) {
  FixtureRecord r;
  r.key = j.at("key").get<std::string>();
  r.op = j.value("op", "");
  r.sample = j.value("sample", 0);
  r.prompt = j.value("prompt", "");
  r.response = j.at("response").get<std::string>();
  r.timestamp = j.value("timestamp", "");
  return r;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
  std::ostringstream out;
  for (unsigned char b : digest) out << std::hex << std::setw(2) << std::setfill('0') << int(b);
  return out.str();
}

std::string fixture_key(std::string_view op, int sample, std::string_view prompt) {
  std::string material;
  material.reserve(op.size() + prompt.size() + 16);
  material.append(op).push_back('\n');
  material.append(std::to_string(sample)).push_back('\n');
  material.append(prompt);
  return sha256_hex(material);
}

std::optional<FixtureRecord> FixtureStore::load(const std::string& key) const {
  const auto path = dir_ / (key + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    return FixtureRecord::from_json(json::parse(in));
  } catch (const json::exception&) {
    return std::nullopt;  // a torn write counts as a miss
  }
}

void FixtureStore::save(const FixtureRecord& record) {
  std::lock_guard lock(write_mu_);
  std::filesystem::create_directories(dir_);
  const auto path = dir_ / (record.key + ".json");
  const auto tmp = dir_ / (record.key + ".json.tmp");
  {
    std::ofstream out(tmp);
    out << record.to_json().dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw std::invalid_argument("bad endpoint URL: " + url);
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

// Releases one in-flight slot on scope exit.
template <class Sem>
struct SlotGuard {
  Sem& sem;
  explicit SlotGuard(Sem& s) : sem(s) { sem.acquire(); }
  ~SlotGuard() { sem.release(); }
};

}  // namespace

LLMClient::LLMClient(LLMAdapterConfig config)
    : config_(std::move(config)), store_(config_.cache_dir), in_flight_(config_.max_in_flight) {}

void LLMClient::note_failure() {
  if (++consecutive_failures_ >= config_.max_consecutive_failures) {
    throw ProviderOutage("provider failed " + std::to_string(consecutive_failures_.load()) +
                         " times in a row");
  }
}

std::string LLMClient::complete(std::span<const ChatMessage> messages, std::string_view op,
                                int sample) {
  const std::string prompt = flatten(messages);
  const std::string key = fixture_key(op, sample, prompt);
  if (auto hit = store_.load(key)) return hit->response;
  if (config_.replay_only) throw ReplayMiss(key);

  std::string response;
  try {
    response = request(messages, key);
  } catch (const ProviderError&) {
    note_failure();
    throw;
  }
  consecutive_failures_ = 0;
  store_.save({key, std::string(op), sample, prompt, response, utc_timestamp()});
  return response;
}

std::string LLMClient::request(std::span<const ChatMessage> messages, const std::string& key) {
  json body = {{"model", config_.model},
               {"temperature", config_.temperature},
               {"top_p", config_.top_p},
               {"messages", json::array()}};
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});

  const Endpoint ep = split_endpoint(config_.endpoint);
  httplib::Client cli(ep.origin);
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);
  httplib::Headers headers;
  if (const char* token = std::getenv(config_.api_key_env.c_str()); token && *token) {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  SlotGuard guard(in_flight_);
  ++requests_;
  auto res = cli.Post(ep.path, headers, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write ||
        err == httplib::Error::ConnectionTimeout) {
      throw ProviderTimeout("request timed out (" + httplib::to_string(err) + ")", key);
    }
    throw HttpError(0, "transport failure: " + httplib::to_string(err), key);
  }
  if (res->status < 200 || res->status >= 300) {
    throw HttpError(res->status, "unexpected status", key);
  }
  try {
    const json reply = json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw HttpError(res->status, std::string("malformed response body: ") + e.what(), key);
  }
}

std::vector<ChatMessage> world_model_messages(std::string_view object_class, const Scene& scene) {
  return world_model_template().render(
      {{"rooms", list_rooms(scene)},
       {"containers", list_fixture_classes(scene, ObjectKind::Container)},
       {"surfaces", list_fixture_classes(scene, ObjectKind::Surface)},
       {"question_object", Catalog::household().display(object_class)}});
}

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ", ";
    out += parts[i];
  }
  return out;
}

}  // namespace

std::vector<ChatMessage> policy_messages(const PolicyQuery& query) {
  std::vector<std::map<std::string, std::string>> shots;
  for (const auto& ex : query.examples) {
    shots.push_back({{"goal", ex.instruction},
                     {"completed_actions", join(ex.completed_actions)},
                     {"observation", ex.observation},
                     {"next_actions", join(ex.next_actions)}});
  }
  return policy_template().render({{"rooms", list_rooms(*query.scene)},
                                   {"goal", query.goal_text()},
                                   {"completed_actions", query.history_text()},
                                   {"observation", query.observation_text()}},
                                  shots);
}

std::vector<ChatMessage> goal_messages(std::string_view instruction) {
  const auto& cat = Catalog::household();
  std::vector<std::string> names;
  for (auto kind : {ObjectKind::Movable, ObjectKind::Container, ObjectKind::Surface}) {
    for (auto& n : cat.names(kind)) names.push_back(std::move(n));
  }
  return goal_template().render({{"objects", join(names)}, {"instruction", std::string(instruction)}});
}

LLMProvider::LLMProvider(std::shared_ptr<LLMClient> client) : client_(std::move(client)) {}

std::vector<std::string> LLMProvider::sample_object_placements(std::string_view object_class,
                                                               const Scene& scene, Rng&,
                                                               int sample) {
  const auto messages = world_model_messages(object_class, scene);
  return parse_placement_answer(client_->complete(messages, kOpPlacement, sample));
}

std::vector<std::string> LLMProvider::sample_next_actions(const PolicyQuery& query, Rng&,
                                                          int sample) {
  const auto messages = policy_messages(query);
  return parse_action_list(client_->complete(messages, kOpPolicy, sample));
}

std::string LLMProvider::translate_goal_text(std::string_view instruction) {
  const auto messages = goal_messages(instruction);
  return client_->complete(messages, kOpGoal, 0);
}

}  // namespace llmmcts
