#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "goalclust/core.hpp"

namespace goalclust {

/// Maximum-weight bipartite matching between output clusters and reference
/// classes, weighted by pairwise overlap size.
struct Matching {
  // (output index, reference index) over real clusters/classes only, sorted
  // by output index. Reference indices follow the sorted class-id order of
  // ReferenceLabels::classes.
  std::vector<std::pair<int, int>> pairs;
  long long total_overlap = 0;
};

/// Exact Hungarian matching on overlap counts. Rectangular shapes are
/// padded with zero-weight dummies; ties resolve deterministically toward
/// low index pairs.
Matching hungarian_match(const std::vector<std::set<std::string>>& outputs,
                         const ReferenceLabels& refs);

struct PerClassF1 {
  std::string class_id;
  int matched_output = -1;  // -1 when no output cluster was matched
  double f1 = 0.0;          // percent
};

struct F1Report {
  double macro = 0.0;  // percent
  std::vector<PerClassF1> per_class;
};

/// Macro F1 over reference classes: per matched pair, the F1 of predicting
/// reference membership from output membership over the labeled corpus;
/// unmatched reference classes score 0. Empty reference classes are
/// excluded (with a warning on stderr).
F1Report macro_f1_report(const std::vector<std::set<std::string>>& outputs,
                         const ReferenceLabels& refs, const Matching& matching);
double macro_f1(const std::vector<std::set<std::string>>& outputs, const ReferenceLabels& refs,
                const Matching& matching);

struct CoverageReport {
  double covered_pct = 0.0;       // samples in >= 1 cluster
  double exactly_once_pct = 0.0;  // samples in exactly 1 cluster
  double multi_pct = 0.0;         // samples in >= 2 clusters
};

/// Pre-commitment membership statistics of a cluster set over a corpus.
CoverageReport coverage_overlap(const ClusterSet& clusters, const std::vector<Sample>& corpus);

struct ClassScore {
  std::string class_id;
  double recall = 0.0;       // percent
  double specificity = 0.0;  // percent
  double score = 0.0;        // mean of the two
};

struct StageScores {
  std::vector<ClassScore> per_class;
  double aggregate = 0.0;  // mean class score, percent
};

/// Recall/specificity of one support set per reference class:
///   recall      = |C̄ ∩ C| / |C̄|
///   specificity = |(X−C̄) ∩ (X−C)| / |X−C̄|
/// Recall is insensitive to finding a superset of the class, specificity to
/// finding a subset; the class score averages the two.
StageScores stage_scores(const ReferenceLabels& refs,
                         const std::map<std::string, std::set<std::string>>& supported,
                         const std::vector<Sample>& corpus);

struct CandidatePoolScore {
  double score = 0.0;     // mean over classes of the best candidate recall, percent
  int matched_count = 0;  // distinct candidates that are some class's best
  std::vector<int> argmax_candidate;  // per class (sorted id order), -1 if none
};

/// Scores a candidate pool against the references by each class's best
/// achievable recall; used for both the proposal pool and the selected
/// subset.
CandidatePoolScore candidate_pool_score(const ReferenceLabels& refs,
                                        const std::vector<std::set<std::string>>& candidate_supports,
                                        const std::vector<Sample>& corpus);

/// Uniform seeded assignment of every sample to one of k clusters.
ClusterSet random_baseline(const std::vector<Sample>& corpus, int k, std::uint64_t seed);

/// Reference classes from the samples' ref_label fields.
ReferenceLabels reference_from_labels(const std::vector<Sample>& corpus);

/// Reference classes from one hidden-attribute dimension.
ReferenceLabels reference_from_attr(const std::vector<Sample>& corpus, const std::string& dim);

/// Member sets of a cluster set (pre-commitment, possibly overlapping).
std::vector<std::set<std::string>> output_sets(const ClusterSet& clusters);

/// Member sets induced by the committed map (a partition).
std::vector<std::set<std::string>> committed_sets(const ClusterSet& clusters);

}  // namespace goalclust
