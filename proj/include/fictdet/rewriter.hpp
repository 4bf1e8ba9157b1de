#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fictdet/corpus.hpp"

namespace fictdet {

// The rewriting instruction, verbatim; build_prompt appends the excerpt after
// a single space.
extern const std::string_view kRewritePrompt;

std::string build_prompt(std::string_view excerpt);

struct RewriteConfig {
  std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
  std::string model_name = "gpt-4.1";
  double temperature = 0.7;
  int max_retries = 3;
  int concurrency_limit = 4;
  std::uint64_t seed = 0;  // submission-order shuffle
  std::string api_key_env = "OPENAI_API_KEY";
  int backoff_initial_ms = 1000;
  int backoff_max_ms = 60000;
  int timeout_seconds = 120;

  void validate() const;
};

// JSON object with any subset of the fields above (endpoint_url, model,
// temperature, max_retries, concurrency_limit, seed, api_key_env,
// backoff_initial_ms, backoff_max_ms, timeout_seconds).
RewriteConfig parse_rewrite_config(std::string_view json_text, const std::string& origin = "<memory>");

struct CompletionResult {
  bool ok = false;
  int http_status = 0;
  std::string text;
  std::string error;
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  // Must be safe to call from several threads at once.
  virtual CompletionResult complete(const std::string& prompt) = 0;
};

// OpenAI-compatible chat-completions client. The request body is
//   {"model": ..., "temperature": ..., "messages": [{"role": "user", "content": prompt}]}
// and the completion is read from choices[0].message.content.
class HttpChatTransport : public ChatTransport {
 public:
  HttpChatTransport(const RewriteConfig& config, std::string api_key);
  CompletionResult complete(const std::string& prompt) override;

  static std::string request_body(const RewriteConfig& config, const std::string& prompt);
  // Extracts choices[0].message.content; returns false on a malformed body.
  static bool parse_response(const std::string& body, std::string& content, std::string& error);

 private:
  RewriteConfig config_;
  std::string api_key_;
  std::string base_;  // scheme://host[:port]
  std::string path_;
};

struct RewriteRecord {
  std::string source_id;
  std::string request_prompt;
  std::string response_text;
  std::int64_t latency_ms = 0;
  int attempt = 0;
  bool ok = false;
  std::string error;
};

std::string serialize_record(const RewriteRecord& record);
RewriteRecord parse_record(std::string_view line, const std::string& where);

struct RewriteOptions {
  std::string checkpoint_path;  // JSON lines of RewriteRecord; empty disables
  bool resume = false;          // reuse successful records already in the checkpoint
  std::function<void(std::chrono::milliseconds)> sleep;  // default: this_thread::sleep_for
};

struct RewriteOutcome {
  std::vector<Sample> rewritten;          // input order; failed ids omitted
  std::vector<RewriteRecord> records;     // one per input that was attempted or resumed, input order
  std::vector<std::string> submission_order;
  std::vector<std::string> failed_ids;
  std::size_t requests_issued = 0;        // HTTP attempts, retries included
  std::size_t resumed = 0;
};

std::string rewritten_id(const std::string& source_id);

// Sends each excerpt (in a seed-determined shuffled order) through the
// transport with up to concurrency_limit requests in flight. Failed attempts
// (transport errors, HTTP errors, blank completions) are retried with
// exponential backoff; an input that exhausts its retries is recorded as
// failed and the run continues.
RewriteOutcome rewrite_corpus(const std::vector<Sample>& class0, const RewriteConfig& config,
                              ChatTransport& transport, const RewriteOptions& options = {});

}  // namespace fictdet
