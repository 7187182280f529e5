#pragma once

#include <condition_variable>
#include <mutex>
#include <string>

#include "goalclust/backend.hpp"

namespace goalclust {

struct HttpChatOptions {
  int max_retries = 3;       // attempts per request
  int backoff_ms = 1000;     // initial backoff, doubled per retry
  int max_concurrency = 8;   // in-flight request cap
  int timeout_s = 120;
  std::string api_key_env = "GOALCLUST_API_KEY";  // falls back to OPENAI_API_KEY
};

/// Chat-completion client speaking the common messages-array wire format.
/// Credentials come from the environment only; transient failures are
/// retried with exponential backoff; a shared limiter caps concurrency.
class HttpChatBackend : public Backend {
 public:
  HttpChatBackend(std::string model, std::string endpoint_url, HttpChatOptions options = {});

  /// Request body for a completion, exposed for wire-format tests.
  static std::string request_body(const std::string& model, const CompletionRequest& request);

 protected:
  std::string do_complete(const CompletionRequest& request) override;

 private:
  class Limiter {
   public:
    explicit Limiter(int slots) : slots_(slots) {}
    void acquire();
    void release();

   private:
    std::mutex mu_;
    std::condition_variable cv_;
    int slots_;
  };

  std::string base_url_;
  std::string path_;
  HttpChatOptions options_;
  std::string api_key_;
  Limiter limiter_;
};

}  // namespace goalclust
