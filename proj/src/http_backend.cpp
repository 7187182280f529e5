#include "goalclust/http_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace goalclust {
namespace {

std::string env_or_empty(const char* name) {
  const char* value = std::getenv(name);
  return value ? std::string(value) : std::string();
}

// Splits a URL into "scheme://host[:port]" and the request path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw ValidationError("http-chat endpoint must be a full URL: " + url);
  }
  std::size_t path = url.find('/', scheme + 3);
  if (path == std::string::npos) return {url, "/v1/chat/completions"};
  return {url.substr(0, path), url.substr(path)};
}

bool transient_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

}  // namespace

void HttpChatBackend::Limiter::acquire() {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [this] { return slots_ > 0; });
  --slots_;
}

void HttpChatBackend::Limiter::release() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    ++slots_;
  }
  cv_.notify_one();
}

HttpChatBackend::HttpChatBackend(std::string model, std::string endpoint_url,
                                 HttpChatOptions options)
    : Backend(BackendId{BackendKind::kHttpChat, std::move(model), endpoint_url}),
      options_(std::move(options)),
      limiter_(options_.max_concurrency > 0 ? options_.max_concurrency : 1) {
  std::tie(base_url_, path_) = split_url(endpoint_url);
  api_key_ = env_or_empty(options_.api_key_env.c_str());
  if (api_key_.empty()) api_key_ = env_or_empty("OPENAI_API_KEY");
  if (api_key_.empty()) {
    throw AuthError("no API key in environment (set " + options_.api_key_env +
                    " or OPENAI_API_KEY)");
  }
}

std::string HttpChatBackend::request_body(const std::string& model,
                                          const CompletionRequest& request) {
  nlohmann::json body{
      {"model", model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
  };
  if (!request.stop.empty()) body["stop"] = request.stop;
  return body.dump();
}

std::string HttpChatBackend::do_complete(const CompletionRequest& request) {
  limiter_.acquire();
  struct Release {
    Limiter* limiter;
    ~Release() { limiter->release(); }
  } release{&limiter_};

  const std::string body = request_body(id().model_name, request);
  const httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
  std::string last_error;
  for (int attempt = 0; attempt < options_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(options_.backoff_ms << (attempt - 1)));
    }
    httplib::Client client(base_url_);
    client.set_connection_timeout(options_.timeout_s, 0);
    client.set_read_timeout(options_.timeout_s, 0);
    httplib::Result result = client.Post(path_, headers, body, "application/json");
    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status == 401 || result->status == 403) {
      throw AuthError("authentication failed (HTTP " + std::to_string(result->status) + ")");
    }
    if (result->status != 200) {
      last_error = "HTTP " + std::to_string(result->status);
      if (transient_status(result->status)) continue;
      throw BackendError("chat completion failed: " + last_error);
    }
    try {
      nlohmann::json parsed = nlohmann::json::parse(result->body);
      return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("malformed chat completion response: ") + e.what());
    }
  }
  throw BackendError("chat completion failed after " + std::to_string(options_.max_retries) +
                     " attempts: " + last_error);
}

}  // namespace goalclust
