#include "xalign/gateway.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <thread>

#include <httplib.h>

#include "xalign/errors.hpp"

namespace xalign {

namespace {

// Thread-local jitter source; only affects retry timing, never outputs.
double jitter_factor() {
  thread_local std::mt19937 rng{std::random_device{}()};
  std::uniform_real_distribution<double> dist(0.5, 1.0);
  return dist(rng);
}

}  // namespace

void EndpointConfig::validate() const {
  std::vector<std::string> bad;
  if (base_url.empty()) bad.push_back("endpoint.base_url");
  if (model_name.empty()) bad.push_back("endpoint.model");
  if (!(timeout_seconds > 0)) bad.push_back("endpoint.timeout_seconds");
  if (max_in_flight < 1) bad.push_back("endpoint.max_in_flight");
  if (max_retries < 0) bad.push_back("endpoint.max_retries");
  if (retry_backoff_base_ms < 0) bad.push_back("endpoint.retry_backoff_ms");
  if (!bad.empty()) {
    std::string msg = "invalid endpoint configuration:";
    for (const auto& k : bad) msg += " " + k;
    throw ConfigError(msg, bad);
  }
}

void DecodeParams::validate() const {
  std::vector<std::string> bad;
  if (temperature < 0) bad.push_back("decode.temperature");
  if (!(top_p > 0 && top_p <= 1)) bad.push_back("decode.top_p");
  if (max_new_tokens < 1) bad.push_back("decode.max_new_tokens");
  if (n_paths < 1) bad.push_back("decode.n_paths");
  if (!bad.empty()) {
    std::string msg = "invalid decode parameters:";
    for (const auto& k : bad) msg += " " + k;
    throw ConfigError(msg, bad);
  }
}

HttpSession::HttpSession(EndpointConfig cfg, bool capture)
    : cfg_(std::move(cfg)), capture_(capture), in_flight_(cfg_.max_in_flight) {
  cfg_.validate();
  auto scheme_end = cfg_.base_url.find("://");
  std::size_t path_start = std::string::npos;
  if (scheme_end != std::string::npos) {
    path_start = cfg_.base_url.find('/', scheme_end + 3);
  } else {
    path_start = cfg_.base_url.find('/');
  }
  if (path_start == std::string::npos) {
    scheme_host_port_ = cfg_.base_url;
  } else {
    scheme_host_port_ = cfg_.base_url.substr(0, path_start);
    base_path_ = cfg_.base_url.substr(path_start);
    while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  }
}

HttpSession::~HttpSession() = default;

std::string HttpSession::post_json(const std::string& path, const nlohmann::json& body) {
  const std::string body_str = body.dump();
  const std::string full_path = base_path_ + path;

  httplib::Headers headers;
  if (!cfg_.api_key_env_var.empty()) {
    const char* key = std::getenv(cfg_.api_key_env_var.c_str());
    if (key != nullptr && *key != '\0') {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  const auto timeout = std::chrono::microseconds(
      static_cast<long long>(cfg_.timeout_seconds * 1'000'000.0));

  int attempts = 0;
  bool last_was_timeout = false;
  std::string last_detail;
  for (;;) {
    ++attempts;
    {
      SemaphoreGuard guard(in_flight_);
      {
        std::lock_guard lock(mu_);
        ++request_count_;
        if (capture_) {
          records_.push_back(RequestRecord{"POST", full_path, nlohmann::json::parse(body_str)});
        }
      }
      httplib::Client client(scheme_host_port_);
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);
      auto res = client.Post(full_path, headers, body_str, "application/json");
      if (res) {
        if (res->status >= 200 && res->status < 300) return res->body;
        if (res->status < 500) throw EndpointError(res->status, res->body);
        last_was_timeout = false;
        last_detail = "status " + std::to_string(res->status);
      } else {
        last_was_timeout = res.error() == httplib::Error::ConnectionTimeout;
        last_detail = httplib::to_string(res.error());
      }
    }
    if (attempts > cfg_.max_retries) {
      const std::string msg = "POST " + full_path + " failed after " + std::to_string(attempts) +
                              " attempt(s): " + last_detail;
      if (last_was_timeout) throw TimeoutError(msg);
      throw NetworkError(msg);
    }
    const int exponent = std::min(attempts - 1, 16);
    const double backoff =
        double(cfg_.retry_backoff_base_ms) * double(1 << exponent) * jitter_factor();
    std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long long>(backoff)));
  }
}

std::vector<RequestRecord> HttpSession::captured_requests() const {
  std::lock_guard lock(mu_);
  return records_;
}

int HttpSession::request_count() const {
  std::lock_guard lock(mu_);
  return request_count_;
}

Gateway::Gateway(EndpointConfig cfg, const DiskCache* cache, bool capture)
    : session_(std::move(cfg), capture), cache_(cache) {}

namespace {

std::vector<std::string> extract_choices(const std::string& response_body) {
  nlohmann::json resp = nlohmann::json::parse(response_body, nullptr, false);
  if (resp.is_discarded() || !resp.contains("choices") || !resp["choices"].is_array()) {
    throw EndpointError(200, response_body);
  }
  std::vector<std::string> texts;
  for (const auto& choice : resp["choices"]) {
    if (!choice.contains("message") || !choice["message"].contains("content")) {
      throw EndpointError(200, response_body);
    }
    texts.push_back(choice["message"]["content"].get<std::string>());
  }
  return texts;
}

nlohmann::ordered_json completion_body(const std::string& model, const std::string& prompt,
                                       const DecodeParams& decode, int n) {
  nlohmann::ordered_json body;
  body["model"] = model;
  body["messages"] = nlohmann::ordered_json::array(
      {nlohmann::ordered_json{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = decode.temperature;
  body["top_p"] = decode.top_p;
  body["max_tokens"] = decode.max_new_tokens;
  body["n"] = n;
  return body;
}

}  // namespace

std::vector<std::string> Gateway::complete(const std::string& prompt,
                                           const DecodeParams& decode) {
  decode.validate();
  if (prompt.empty()) throw std::invalid_argument("complete: empty prompt");

  const std::string& model = config().model_name;
  const int n = decode.n_paths;
  const std::size_t count = static_cast<std::size_t>(n);
  std::vector<std::string> keys(count);
  std::vector<std::string> texts(count);
  bool all_cached = cache_ != nullptr;
  for (std::size_t i = 0; i < count; ++i) {
    keys[i] = completion_cache_key(model, prompt, decode, int(i));
    if (!all_cached) continue;
    if (auto hit = cache_->get(keys[i])) {
      texts[i] = std::move(*hit);
    } else {
      all_cached = false;
    }
  }
  if (all_cached) return texts;

  std::string body = session_.post_json("/chat/completions", completion_body(model, prompt, decode, n));
  std::vector<std::string> choices = extract_choices(body);
  if (int(choices.size()) > n) choices.resize(std::size_t(n));
  // Endpoints without native multi-completion support return a single choice;
  // top up the remaining paths one request at a time.
  while (int(choices.size()) < n) {
    std::string extra =
        session_.post_json("/chat/completions", completion_body(model, prompt, decode, 1));
    std::vector<std::string> one = extract_choices(extra);
    if (one.empty()) throw EndpointError(200, extra);
    choices.push_back(std::move(one.front()));
  }
  for (std::size_t i = 0; i < count; ++i) {
    texts[i] = choices[i];
    if (cache_ != nullptr) cache_->put(keys[i], texts[i]);
  }
  return texts;
}

}  // namespace xalign
