#include "goalclust/backend.hpp"

#include <chrono>

#include <json.hpp>

namespace goalclust {

std::string to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::kHttpChat: return "http-chat";
    case BackendKind::kOracleKeyword: return "oracle-keyword";
    case BackendKind::kFixedScript: return "fixed-script";
  }
  return "unknown";
}

std::string to_string(const BackendId& id) {
  std::string s = to_string(id.kind) + ":" + id.model_name;
  if (!id.endpoint.empty()) s += "@" + id.endpoint;
  return s;
}

AuditLog::AuditLog(const std::string& path) : out_(path, std::ios::app) {
  if (!out_) throw IoError("cannot open audit log for writing: " + path);
}

void AuditLog::record(const std::string& backend, const std::string& prompt,
                      const std::string& response) {
  nlohmann::json record{
      {"ts", std::chrono::duration_cast<std::chrono::seconds>(
                 std::chrono::system_clock::now().time_since_epoch())
                 .count()},
      {"backend", backend},
      {"prompt", prompt},
      {"response", response},
  };
  std::lock_guard<std::mutex> lock(mu_);
  out_ << record.dump() << '\n';
  out_.flush();
}

void CallBudget::charge(const std::string& backend) {
  std::uint64_t n = used_.fetch_add(1) + 1;
  if (n > cap_) {
    throw BudgetExceededError("call budget of " + std::to_string(cap_) +
                              " exceeded by backend " + backend);
  }
}

std::string Backend::complete(const CompletionRequest& request) {
  if (request.prompt.empty()) {
    throw ValidationError("completion request: prompt must be non-empty");
  }
  if (budget_) budget_->charge(id_string());
  std::string response = do_complete(request);
  calls_.fetch_add(1);
  if (audit_) audit_->record(id_string(), request.prompt, response);
  return response;
}

FixedScriptBackend::FixedScriptBackend(std::vector<std::string> responses, std::string name)
    : Backend(BackendId{BackendKind::kFixedScript, std::move(name), ""}),
      responses_(std::move(responses)) {}

std::string FixedScriptBackend::do_complete(const CompletionRequest&) {
  std::size_t idx = cursor_.fetch_add(1);
  if (idx >= responses_.size()) {
    throw BackendError("fixed-script backend exhausted after " +
                       std::to_string(responses_.size()) + " responses");
  }
  return responses_[idx];
}

}  // namespace goalclust
