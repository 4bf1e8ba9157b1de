#include "fictdet/rewriter.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "fictdet/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace fictdet {

const std::string_view kRewritePrompt =
    "You will take the role of an author of crime novels. A text excerpt will be provided, you have to review it "
    "for the number of space characters and key details. Create a new text excerpt which contains the same key "
    "details but appears structurally different to the original. The new text must have approximately the same "
    "number of spaces as the original. Only return the new text passage. Do not include place holders, line "
    "breaks or any other text except the new passage. Text excerpt:''";

std::string build_prompt(std::string_view excerpt) {
  if (excerpt.empty()) fail(ErrorCode::InvalidArgument, "build_prompt: empty excerpt");
  std::string prompt(kRewritePrompt);
  prompt.push_back(' ');
  prompt.append(excerpt);
  return prompt;
}

void RewriteConfig::validate() const {
  if (!(temperature >= 0.0 && temperature <= 2.0)) fail(ErrorCode::InvalidArgument, "temperature must be in [0, 2]");
  if (concurrency_limit < 1) fail(ErrorCode::InvalidArgument, "concurrency_limit must be >= 1");
  if (max_retries < 0) fail(ErrorCode::InvalidArgument, "max_retries must be >= 0");
  if (backoff_initial_ms < 0 || backoff_max_ms < 0) fail(ErrorCode::InvalidArgument, "backoff must be >= 0");
  if (endpoint_url.empty()) fail(ErrorCode::InvalidArgument, "endpoint_url is required");
}

RewriteConfig parse_rewrite_config(std::string_view json_text, const std::string& origin) {
  RewriteConfig c;
  try {
    const auto j = nlohmann::json::parse(json_text);
    c.endpoint_url = j.value("endpoint_url", c.endpoint_url);
    c.model_name = j.value("model", c.model_name);
    c.temperature = j.value("temperature", c.temperature);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.concurrency_limit = j.value("concurrency_limit", c.concurrency_limit);
    c.seed = j.value("seed", c.seed);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.backoff_initial_ms = j.value("backoff_initial_ms", c.backoff_initial_ms);
    c.backoff_max_ms = j.value("backoff_max_ms", c.backoff_max_ms);
    c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, origin + ": " + e.what());
  }
  c.validate();
  return c;
}

HttpChatTransport::HttpChatTransport(const RewriteConfig& config, std::string api_key)
    : config_(config), api_key_(std::move(api_key)) {
  const auto scheme_end = config.endpoint_url.find("://");
  if (scheme_end == std::string::npos) fail(ErrorCode::InvalidArgument, "endpoint_url must start with http:// or https://");
  const auto path_start = config.endpoint_url.find('/', scheme_end + 3);
  base_ = config.endpoint_url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/v1/chat/completions" : config.endpoint_url.substr(path_start);
}

std::string HttpChatTransport::request_body(const RewriteConfig& config, const std::string& prompt) {
  nlohmann::ordered_json body;
  body["model"] = config.model_name;
  body["temperature"] = config.temperature;
  body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", prompt}}});
  return body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

bool HttpChatTransport::parse_response(const std::string& body, std::string& content, std::string& error) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& message = j.at("choices").at(0).at("message");
    const auto& c = message.at("content");
    if (!c.is_string()) {
      error = "completion content is not a string";
      return false;
    }
    content = c.get<std::string>();
    return true;
  } catch (const nlohmann::json::exception& e) {
    error = std::string("malformed completion response: ") + e.what();
    return false;
  }
}

CompletionResult HttpChatTransport::complete(const std::string& prompt) {
  CompletionResult result;
  httplib::Client client(base_);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  auto response = client.Post(path_, headers, request_body(config_, prompt), "application/json");
  if (!response) {
    result.error = "transport error: " + httplib::to_string(response.error());
    return result;
  }
  result.http_status = response->status;
  if (response->status != 200) {
    result.error = "HTTP " + std::to_string(response->status);
    return result;
  }
  result.ok = parse_response(response->body, result.text, result.error);
  return result;
}

std::string serialize_record(const RewriteRecord& r) {
  nlohmann::ordered_json j;
  j["source_id"] = r.source_id;
  j["ok"] = r.ok;
  j["attempt"] = r.attempt;
  j["latency_ms"] = r.latency_ms;
  j["request_prompt"] = r.request_prompt;
  j["response_text"] = r.response_text;
  j["error"] = r.error;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

RewriteRecord parse_record(std::string_view line, const std::string& where) {
  try {
    const auto j = nlohmann::json::parse(line);
    RewriteRecord r;
    r.source_id = j.at("source_id").get<std::string>();
    r.ok = j.at("ok").get<bool>();
    r.attempt = j.value("attempt", 0);
    r.latency_ms = j.value("latency_ms", std::int64_t{0});
    r.request_prompt = j.value("request_prompt", std::string());
    r.response_text = j.value("response_text", std::string());
    r.error = j.value("error", std::string());
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, where + ": " + e.what());
  }
}

std::string rewritten_id(const std::string& source_id) { return source_id + "-gen"; }

RewriteOutcome rewrite_corpus(const std::vector<Sample>& class0, const RewriteConfig& config, ChatTransport& transport,
                              const RewriteOptions& options) {
  config.validate();
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < class0.size(); ++i) {
    if (class0[i].label != Label::Human) fail(ErrorCode::InvalidArgument, "rewrite input '" + class0[i].id + "' is not Class 0");
    if (class0[i].text.empty()) fail(ErrorCode::InvalidArgument, "rewrite input '" + class0[i].id + "' has empty text");
    if (!position.emplace(class0[i].id, i).second) fail(ErrorCode::InvalidArgument, "duplicate sample id '" + class0[i].id + "'");
  }

  std::vector<std::optional<RewriteRecord>> slots(class0.size());
  RewriteOutcome outcome;

  if (!options.checkpoint_path.empty() && options.resume && file_exists(options.checkpoint_path)) {
    std::size_t line_no = 0;
    for (const auto& line : split(read_file(options.checkpoint_path), '\n')) {
      ++line_no;
      if (trim(line).empty()) continue;
      auto record = parse_record(line, options.checkpoint_path + ":" + std::to_string(line_no));
      const auto it = position.find(record.source_id);
      if (record.ok && it != position.end()) slots[it->second] = std::move(record);
    }
  }

  std::ofstream checkpoint;
  if (!options.checkpoint_path.empty()) {
    checkpoint.open(options.checkpoint_path, options.resume ? std::ios::app : std::ios::trunc);
    if (!checkpoint) fail(ErrorCode::Io, "cannot open checkpoint '" + options.checkpoint_path + "'");
  }

  std::vector<std::size_t> order(class0.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(config.seed);
  rng.shuffle(order);
  for (std::size_t i : order) outcome.submission_order.push_back(class0[i].id);

  std::vector<std::size_t> pending;
  for (std::size_t i : order) {
    if (slots[i]) {
      ++outcome.resumed;
    } else {
      pending.push_back(i);
    }
  }

  std::function<void(std::chrono::milliseconds)> sleep = options.sleep;
  if (!sleep) sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> requests{0};
  std::mutex mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= pending.size()) return;
      const Sample& sample = class0[pending[k]];
      RewriteRecord record;
      record.source_id = sample.id;
      record.request_prompt = build_prompt(sample.text);
      for (int attempt = 1; attempt <= config.max_retries + 1; ++attempt) {
        if (attempt > 1) {
          const auto shift = std::min(attempt - 2, 30);
          const auto delay = std::min<std::int64_t>(static_cast<std::int64_t>(config.backoff_initial_ms) << shift,
                                                    config.backoff_max_ms);
          sleep(std::chrono::milliseconds(delay));
        }
        record.attempt = attempt;
        const auto start = std::chrono::steady_clock::now();
        CompletionResult result = transport.complete(record.request_prompt);
        ++requests;
        record.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
        if (result.ok && trim(result.text).empty()) {
          result.ok = false;
          result.error = "empty completion";
        }
        record.ok = result.ok;
        record.error = result.error;
        record.response_text = result.ok ? result.text : std::string();
        if (result.ok) break;
      }
      std::lock_guard<std::mutex> lock(mutex);
      if (checkpoint.is_open()) {
        checkpoint << serialize_record(record) << '\n';
        checkpoint.flush();
      }
      slots[pending[k]] = std::move(record);
    }
  };

  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(config.concurrency_limit), pending.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  outcome.requests_issued = requests.load();

  for (std::size_t i = 0; i < class0.size(); ++i) {
    if (!slots[i]) continue;
    const RewriteRecord& r = *slots[i];
    if (r.ok) {
      Sample s;
      s.id = rewritten_id(class0[i].id);
      s.text = r.response_text;
      s.label = Label::Generated;
      s.source = std::string(kRewrittenPrefix) + class0[i].id;
      s.word_count = count_words(s.text);
      outcome.rewritten.push_back(std::move(s));
    } else {
      outcome.failed_ids.push_back(class0[i].id);
    }
    outcome.records.push_back(r);
  }
  return outcome;
}

}  // namespace fictdet
