#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "xalign/cache.hpp"
#include "xalign/types.hpp"
#include "xalign/util.hpp"

namespace xalign {

struct EndpointConfig {
  std::string base_url;
  std::string model_name;
  std::string api_key_env_var;  // name of the env var holding the key; "" = unauthenticated
  double timeout_seconds = 30.0;
  int max_in_flight = 4;
  int max_retries = 2;
  int retry_backoff_base_ms = 250;

  void validate() const;  // ConfigError
};

struct DecodeParams {
  double temperature = 1.0;
  double top_p = 0.9;
  int max_new_tokens = 512;
  int n_paths = 3;

  DecodeSnapshot snapshot() const { return {temperature, top_p, max_new_tokens}; }
  void validate() const;  // ConfigError
};

struct RequestRecord {
  std::string method;
  std::string path;
  nlohmann::json body;  // decoded request body
};

// Shared HTTP machinery: bounded in-flight requests, retry with exponential
// backoff and jitter on timeouts/5xx, optional request capture. 4xx responses
// are never retried.
class HttpSession {
 public:
  HttpSession(EndpointConfig cfg, bool capture);
  ~HttpSession();

  // Returns the response body of a 2xx reply. Throws EndpointError on
  // non-retryable status, NetworkError/TimeoutError once retries exhaust.
  std::string post_json(const std::string& path, const nlohmann::json& body);

  std::vector<RequestRecord> captured_requests() const;
  int request_count() const;
  const EndpointConfig& config() const { return cfg_; }

 private:
  EndpointConfig cfg_;
  bool capture_;
  std::string scheme_host_port_;
  std::string base_path_;
  mutable std::mutex mu_;
  Semaphore in_flight_;
  std::vector<RequestRecord> records_;
  int request_count_ = 0;
};

// Chat-completion client. All sampling network effects flow through here.
class Gateway {
 public:
  Gateway(EndpointConfig cfg, const DiskCache* cache = nullptr, bool capture = false);

  // n_paths completion texts in stable path order. With a fully warm cache
  // this performs zero network requests. Endpoints that return fewer choices
  // than requested are topped up with single-path requests.
  std::vector<std::string> complete(const std::string& prompt, const DecodeParams& decode);

  std::vector<RequestRecord> captured_requests() const { return session_.captured_requests(); }
  int request_count() const { return session_.request_count(); }
  const EndpointConfig& config() const { return session_.config(); }

 private:
  HttpSession session_;
  const DiskCache* cache_;
};

}  // namespace xalign
