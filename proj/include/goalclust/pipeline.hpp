#pragma once

#include <vector>

#include "goalclust/assign.hpp"
#include "goalclust/backend.hpp"
#include "goalclust/core.hpp"
#include "goalclust/propose.hpp"
#include "goalclust/select.hpp"

namespace goalclust {

struct PipelineBackends {
  Backend* proposer = nullptr;
  Backend* assigner = nullptr;
  Backend* committer = nullptr;  // null selects the deterministic commit rule
};

struct IterationStats {
  int iteration = 0;
  int prompts_sent = 0;
  int new_candidates = 0;
  int pool_size = 0;
  int uncovered = 0;  // samples with inclusion count 0 under the selection
  double objective = 0.0;
};

struct RunOptions {
  ProposeOptions propose;
  SolverKind solver = SolverKind::kExactIlp;
  int parallelism = 1;
  JudgmentCache* cache = nullptr;  // optional external cache for resumability
};

struct RunResult {
  ClusterSet clusters;
  SelectionSolution selection;
  AssignmentMatrix matrix;
  std::vector<Explanation> pool;
  std::vector<IterationStats> iterations;
  AssignStats assign_stats;
};

/// Runs the full propose/assign/select loop. Iteration 1 proposes from the
/// whole corpus; each later iteration proposes from the samples no selected
/// explanation supports. The candidate pool accumulates across iterations,
/// assignment reuses prior judgments through the cache, and selection
/// re-solves over the accumulated pool. Stops early once every sample is
/// covered or the pool stops growing.
RunResult run_clustering(const ClusteringTask& task, const PipelineBackends& backends,
                         const RunOptions& options = {});

struct CommitStats {
  int backend_choices = 0;
  int fallbacks = 0;  // backend answered outside the allowed set
};

/// Renders the commit prompt: the numbered predicates, the sample text, and
/// the instruction to choose the best-matching predicate.
std::string build_commit_prompt(const std::vector<Explanation>& predicates, const Sample& sample);

/// Reduces multi-membership to exactly one cluster per sample. Samples with
/// supporters commit among them (a single supporter commits directly; the
/// committer backend picks otherwise, falling back to the supporter with the
/// smallest support). Uncovered samples commit via the backend over all
/// selected explanations, falling back to cluster 0.
ClusterSet commit(const ClusterSet& clusters, const AssignmentMatrix& matrix,
                  const SelectionSolution& selection, const std::vector<Sample>& corpus,
                  Backend* committer, CommitStats* stats = nullptr);

/// Recursive clustering: one run over the full task, then a fresh run inside
/// every cluster with more than `split_threshold` members (down to
/// `max_depth` levels), with the goal rewritten around the parent's
/// explanation. Below the root, samples may appear in several clusters.
TaxonomyNode build_taxonomy(const ClusteringTask& task, const PipelineBackends& backends,
                            int max_depth, int split_threshold, const RunOptions& options = {});

}  // namespace goalclust
