#pragma once

#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "goalclust/backend.hpp"
#include "goalclust/core.hpp"

namespace goalclust {

/// Renders the per-pair assignment prompt:
///   Predicate: <explanation>
///   Text: <sample>
///   Is the Predicate true on the Text? Yes or No. When uncertain, output No.
std::string build_assign_prompt(const Explanation& explanation, const Sample& sample);

enum class AssignVerdict { kYes, kNo, kUnparseable };

/// Case-insensitive leading-token match; anything that is not a clear yes or
/// no counts as the uncertain default (No) and is tallied separately.
AssignVerdict parse_assignment(std::string_view response);

/// Append-only JSONL store of assigner verdicts keyed by
/// (explanation hash, sample id, backend id). A file-backed cache survives
/// aborted runs; the default is memory-only.
class JudgmentCache {
 public:
  JudgmentCache() = default;
  explicit JudgmentCache(const std::string& path);

  std::optional<int> lookup(const std::string& explanation_hash, const std::string& sample_id,
                            const std::string& backend_id) const;
  void insert(const std::string& explanation_hash, const std::string& sample_id,
              const std::string& backend_id, int verdict);

  std::size_t size() const;

  static std::string explanation_hash(std::string_view text) { return fnv1a64_hex(text); }

 private:
  static std::string key(const std::string& eh, const std::string& sid, const std::string& bid);

  mutable std::mutex mu_;
  std::unordered_map<std::string, int> entries_;
  std::unique_ptr<std::ofstream> out_;  // null for memory-only
};

struct AssignStats {
  std::uint64_t backend_calls = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t unparseable = 0;
};

/// Queries the assigner for every (sample, explanation) pair not already in
/// the cache and assembles the full binary assignment matrix. Adding new
/// columns to the pool re-uses all prior judgments through the cache. On any
/// backend failure the run aborts without returning a partial matrix; the
/// cache keeps every completed judgment.
AssignmentMatrix assign_matrix(const std::vector<Sample>& corpus,
                               const std::vector<Explanation>& pool, Backend& assigner,
                               JudgmentCache& cache, int parallelism = 1,
                               AssignStats* stats = nullptr);

/// The j-th candidate cluster: ids of samples supported by column j.
std::set<std::string> cluster_of(const AssignmentMatrix& matrix, int j);

}  // namespace goalclust
