#pragma once

#include <atomic>
#include <cstdint>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "goalclust/core.hpp"

namespace goalclust {

enum class BackendKind { kHttpChat, kOracleKeyword, kFixedScript };

std::string to_string(BackendKind kind);

/// Identity of a language-model endpoint filling one of the three roles
/// (proposer, assigner, committer). Concrete model names are configuration.
struct BackendId {
  BackendKind kind = BackendKind::kOracleKeyword;
  std::string model_name;
  std::string endpoint;  // http-chat only

  bool operator==(const BackendId&) const = default;
};

std::string to_string(const BackendId& id);

struct CompletionRequest {
  std::string prompt;
  int max_tokens = 512;
  double temperature = 0.0;
  std::vector<std::string> stop;
};

/// Thread-safe JSONL sink recording every request/response pair.
class AuditLog {
 public:
  explicit AuditLog(const std::string& path);
  void record(const std::string& backend, const std::string& prompt, const std::string& response);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

/// Shared cap on the total number of backend calls in one run.
class CallBudget {
 public:
  explicit CallBudget(std::uint64_t max_calls) : cap_(max_calls) {}

  /// Throws BudgetExceededError once the cap is reached.
  void charge(const std::string& backend);
  std::uint64_t used() const { return used_.load(); }

 private:
  std::atomic<std::uint64_t> used_{0};
  std::uint64_t cap_;
};

/// Completion transport. complete() is safe to call from many threads at
/// once; implementations add their own rate limiting where needed.
class Backend {
 public:
  virtual ~Backend() = default;

  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  /// Validates the request, charges the budget, delegates to the concrete
  /// transport and records the exchange in the audit log when one is set.
  std::string complete(const CompletionRequest& request);

  const BackendId& id() const { return id_; }
  std::string id_string() const { return to_string(id_); }
  std::uint64_t total_calls() const { return calls_.load(); }

  void attach_audit(std::shared_ptr<AuditLog> audit) { audit_ = std::move(audit); }
  void attach_budget(std::shared_ptr<CallBudget> budget) { budget_ = std::move(budget); }

 protected:
  explicit Backend(BackendId id) : id_(std::move(id)) {}
  virtual std::string do_complete(const CompletionRequest& request) = 0;

 private:
  BackendId id_;
  std::atomic<std::uint64_t> calls_{0};
  std::shared_ptr<AuditLog> audit_;
  std::shared_ptr<CallBudget> budget_;
};

/// Replays a fixed queue of responses; for tests and dry runs.
class FixedScriptBackend : public Backend {
 public:
  explicit FixedScriptBackend(std::vector<std::string> responses, std::string name = "script");

 protected:
  std::string do_complete(const CompletionRequest& request) override;

 private:
  std::vector<std::string> responses_;
  std::atomic<std::size_t> cursor_{0};
};

}  // namespace goalclust
