#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "goalclust/backend.hpp"

namespace goalclust {

// Deterministic stand-ins for the three LM roles. Synthetic corpora embed
// marker tokens of the form U+27E6 dim=value U+27E7 directly in the sample
// text; the oracles decide predicates by exact marker containment, which
// makes end-to-end recovery tests exact and fully offline.

inline constexpr std::string_view kMarkerOpen = "⟦";   // left white square bracket
inline constexpr std::string_view kMarkerClose = "⟧";  // right white square bracket

std::string marker_token(std::string_view dim, std::string_view value);

/// All marker tokens in `text`, in order of appearance.
std::vector<std::pair<std::string, std::string>> extract_markers(std::string_view text);

/// Evaluates the restricted predicate grammar the oracles understand:
///   "has a <dim> of <v1> or <v2>"               -> either marker present
///   "has a <dim> of <v>"                        -> marker present
///   "has a <dim> of <v> and mentions '<word>'"  -> marker present and word in text
/// Anything else is false.
bool oracle_predicate_true(std::string_view predicate, std::string_view text);

enum class OracleDistractors {
  kNone,           // true per-value predicates only
  kMerged,         // plus one predicate merging the first two values
  kMergedPartial,  // plus a predicate covering one value only partially
};

/// Deterministic proposer response for a proposal prompt: one numbered
/// "Explanation i. has a <dim> of <value>" line per distinct value of the
/// goal dimension observed in the prompt's samples, ordered by first
/// appearance, with optional distractor predicates appended.
std::string oracle_propose(std::string_view prompt, OracleDistractors distractors);

class OracleProposer : public Backend {
 public:
  explicit OracleProposer(OracleDistractors distractors = OracleDistractors::kNone);

 protected:
  std::string do_complete(const CompletionRequest& request) override;

 private:
  OracleDistractors distractors_;
};

class OracleAssigner : public Backend {
 public:
  OracleAssigner();

 protected:
  std::string do_complete(const CompletionRequest& request) override;
};

class OracleCommitter : public Backend {
 public:
  OracleCommitter();

 protected:
  std::string do_complete(const CompletionRequest& request) override;
};

}  // namespace goalclust
