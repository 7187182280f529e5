#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "goalclust/core.hpp"
#include "goalclust/pipeline.hpp"
#include "goalclust/select.hpp"

namespace goalclust {

// ---------------------------------------------------------------------------
// Synthetic corpora.
// ---------------------------------------------------------------------------

/// Deterministic multi-attribute corpus: the Cartesian product of all
/// dimension values, `per_combo` samples per combination. Every sample text
/// embeds one marker token per dimension plus seeded filler words, so the
/// keyword oracles can recover each dimension exactly. `label_dim` picks the
/// dimension copied into ref_label (default: first dimension).
std::vector<Sample> generate_synthetic(const std::map<std::string, std::vector<std::string>>& dims,
                                       int per_combo, std::uint64_t seed,
                                       const std::string& label_dim = "");

/// Imbalance perturbation: of the reference classes, 7 are sampled and
/// halved; 3 of those are sampled and halved again. Requires >= 7 classes.
std::vector<Sample> perturb_imbalance(const std::vector<Sample>& corpus,
                                      const ReferenceLabels& refs, std::uint64_t seed);

struct NoisyCorpus {
  std::vector<Sample> corpus;
  std::set<std::string> eval_mask;  // ids to evaluate on (noise excluded)
};

/// Noise perturbation: 4 sampled classes are cut to 1/8 of their size and
/// kept only as out-of-distribution noise; evaluation covers the remaining
/// classes. Requires >= 5 classes.
NoisyCorpus perturb_noise(const std::vector<Sample>& corpus, const ReferenceLabels& refs,
                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// Corpus files: JSONL with {id, text, labels?, attrs?} per line.
// ---------------------------------------------------------------------------

std::vector<Sample> load_corpus(const std::string& path);
void save_corpus(const std::string& path, const std::vector<Sample>& corpus);

// ---------------------------------------------------------------------------
// Artifact schemas (all versioned with "format": 1).
// ---------------------------------------------------------------------------

nlohmann::json task_to_json(const ClusteringTask& task);

nlohmann::json matrix_to_json(const AssignmentMatrix& matrix);  // sparse {n, m, ones, columns}
AssignmentMatrix matrix_from_json(const nlohmann::json& j);

nlohmann::json instance_to_json(const SelectionInstance& instance);
SelectionInstance instance_from_json(const nlohmann::json& j);

nlohmann::json selection_to_json(const SelectionSolution& solution);

nlohmann::json clusters_to_json(const ClusterSet& clusters);
ClusterSet clusters_from_json(const nlohmann::json& j);

nlohmann::json taxonomy_to_json(const TaxonomyNode& root);
TaxonomyNode taxonomy_from_json(const nlohmann::json& j);

std::string render_taxonomy_text(const TaxonomyNode& root);

/// The metrics.json report: coverage always; matching, macro F1 (pre- and
/// post-commitment), per-class tables and stage scores when references
/// exist; proposer/selector pool scores when the matrix (and selection) are
/// given.
nlohmann::json metrics_report(const ClusterSet& clusters, const std::vector<Sample>& corpus,
                              const ReferenceLabels& refs,
                              const AssignmentMatrix* matrix = nullptr,
                              const SelectionSolution* selection = nullptr);

/// Writes the run artifact directory (task.json, pool.jsonl,
/// matrix.sparse.json, selection.json, clusters.json, plus taxonomy.json /
/// metrics.json when given) and a manifest recording the config hash, seed
/// and backend ids. Returns the manifest.
nlohmann::json save_artifacts(const std::string& dir, const ClusteringTask& task,
                              const RunResult& result,
                              const std::map<std::string, std::string>& backend_ids,
                              const TaxonomyNode* taxonomy = nullptr,
                              const nlohmann::json* metrics = nullptr);

}  // namespace goalclust
