#pragma once

#include <string>
#include <vector>

#include "goalclust/backend.hpp"
#include "goalclust/core.hpp"

namespace goalclust {

enum class TemplateKind { kSimple, kDetailed };

/// Proposal prompt template with {samples}, {goal} and {j_prime}
/// placeholders. Templates are plain text files so users can edit them
/// without rebuilding.
struct PromptTemplate {
  std::string text;

  static PromptTemplate builtin(TemplateKind kind);
  static PromptTemplate from_file(const std::string& path);
};

/// Prompt length in budget units; the default proxy is ceil(bytes / 4).
using LengthFn = int (*)(std::string_view);
int approx_token_length(std::string_view s);

struct ProposalPrompt {
  std::vector<std::string> sample_ids;  // the samples shown, in prompt order
  std::string goal;
  int requested_count = 0;
  std::string rendered;
};

/// Renders a proposal prompt holding the maximal prefix of `samples` (in the
/// given order) whose rendered size stays within 75% of `budget`. Samples
/// are numbered "Sample 1." through "Sample T.". Throws if even the first
/// sample does not fit.
ProposalPrompt build_proposal_prompt(const std::vector<Sample>& samples, const std::string& goal,
                                     int j_prime, int budget, const PromptTemplate& tmpl,
                                     LengthFn measure = approx_token_length);

/// Extracts the numbered explanation list from a proposer response.
/// Tolerates "Explanation i.", bare "i." / "i)" numbering and markdown
/// bullets. Throws ParseError when nothing parses.
std::vector<Explanation> parse_explanations(const std::string& response);

struct ProposeOptions {
  PromptTemplate tmpl = PromptTemplate::builtin(TemplateKind::kSimple);
  int max_prompts = 16;   // cap on backend prompts per call
  int parallelism = 1;    // concurrent prompts in flight
  int quota = 0;          // 0 derives ceil(j_total / iterations) from the task
  double temperature = 0.7;
  int max_tokens = 1024;
  LengthFn measure = approx_token_length;
};

struct ProposeResult {
  std::vector<Explanation> added;  // new deduplicated candidates, stable order
  int prompts_sent = 0;
  int malformed_responses = 0;
  bool quota_reached = false;
};

/// One proposal round: shuffles `focus` with the task seed, partitions it
/// into budget-bounded prompts, queries the proposer until the deduplicated
/// pool gains `quota` new explanations or the prompt cap is hit.
/// Deduplication is case-insensitive exact match against both `existing`
/// and the newly added pool. The result is independent of `parallelism`.
ProposeResult propose_candidates(const ClusteringTask& task, const std::vector<Sample>& focus,
                                 Backend& proposer, int iteration,
                                 const std::vector<Explanation>& existing = {},
                                 const ProposeOptions& options = {});

/// Rewrites a goal for a recursive run under one parent cluster: the result
/// embeds the original goal and the parent explanation verbatim and asks for
/// finer-grained cluster descriptions. `unit` names what the corpus items
/// are called ("samples", "feedback", ...).
std::string augment_goal(const std::string& goal, const std::string& parent,
                         const std::string& unit = "samples");

}  // namespace goalclust
