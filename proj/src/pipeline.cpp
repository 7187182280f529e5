#include "goalclust/pipeline.hpp"

#include <algorithm>
#include <cctype>

#include "goalclust/rng.hpp"

namespace goalclust {
namespace {

void require_backends(const PipelineBackends& backends) {
  if (!backends.proposer || !backends.assigner) {
    throw ValidationError("pipeline: proposer and assigner backends are required");
  }
}

ClusterSet clusters_from_selection(const AssignmentMatrix& matrix,
                                   const SelectionSolution& selection) {
  ClusterSet result;
  for (int j : selection.selected_indices()) {
    Cluster cluster;
    cluster.explanation = matrix.columns()[static_cast<std::size_t>(j)];
    cluster.members = cluster_of(matrix, j);
    result.clusters.push_back(std::move(cluster));
  }
  for (int x = 0; x < matrix.n_samples(); ++x) {
    if (selection.inclusion_counts[static_cast<std::size_t>(x)] == 0) {
      result.uncovered.insert(matrix.row_ids()[static_cast<std::size_t>(x)]);
    }
  }
  return result;
}

// First integer in the committer response, or -1.
int parse_commit_choice(std::string_view response) {
  std::size_t pos = 0;
  while (pos < response.size() && !std::isdigit(static_cast<unsigned char>(response[pos]))) ++pos;
  if (pos == response.size()) return -1;
  int value = 0;
  while (pos < response.size() && std::isdigit(static_cast<unsigned char>(response[pos]))) {
    value = value * 10 + (response[pos] - '0');
    ++pos;
  }
  return value;
}

}  // namespace

RunResult run_clustering(const ClusteringTask& task, const PipelineBackends& backends,
                         const RunOptions& options) {
  validated(task);
  require_backends(backends);

  JudgmentCache local_cache;
  JudgmentCache& cache = options.cache ? *options.cache : local_cache;

  RunResult result;
  bool have_selection = false;
  std::vector<Sample> focus = task.corpus;

  for (int iteration = 1; iteration <= task.iterations; ++iteration) {
    ProposeOptions propose_options = options.propose;
    if (propose_options.parallelism <= 1) propose_options.parallelism = options.parallelism;
    ProposeResult proposed =
        propose_candidates(task, focus, *backends.proposer, iteration, result.pool, propose_options);
    const bool pool_grew = !proposed.added.empty();
    for (Explanation& e : proposed.added) result.pool.push_back(std::move(e));

    IterationStats stats;
    stats.iteration = iteration;
    stats.prompts_sent = proposed.prompts_sent;
    stats.new_candidates = static_cast<int>(proposed.added.size());
    stats.pool_size = static_cast<int>(result.pool.size());

    if (result.pool.empty()) {
      throw SolverError("candidate pool is empty after iteration " + std::to_string(iteration));
    }

    AssignStats assign_stats;
    result.matrix = assign_matrix(task.corpus, result.pool, *backends.assigner, cache,
                                  options.parallelism, &assign_stats);
    result.assign_stats.backend_calls += assign_stats.backend_calls;
    result.assign_stats.cache_hits = assign_stats.cache_hits;
    result.assign_stats.unparseable += assign_stats.unparseable;

    std::set<std::string> uncovered_ids;
    if (static_cast<int>(result.pool.size()) >= task.k) {
      SelectionInstance instance;
      instance.matrix = result.matrix;
      instance.mode = SelectionMode::kConstrainedK;
      instance.k = task.k;
      instance.lambda = task.lambda;
      result.selection = solve_selection(instance, options.solver);
      have_selection = true;
      for (int x = 0; x < result.matrix.n_samples(); ++x) {
        if (result.selection.inclusion_counts[static_cast<std::size_t>(x)] == 0) {
          uncovered_ids.insert(result.matrix.row_ids()[static_cast<std::size_t>(x)]);
        }
      }
      stats.objective = result.selection.objective;
    } else {
      // Pool still smaller than K: no feasible selection yet, so the next
      // round proposes from samples no candidate supports at all.
      for (int x = 0; x < result.matrix.n_samples(); ++x) {
        bool supported = false;
        for (int j = 0; j < result.matrix.n_cols() && !supported; ++j) {
          supported = result.matrix.at(x, j) != 0;
        }
        if (!supported) uncovered_ids.insert(result.matrix.row_ids()[static_cast<std::size_t>(x)]);
      }
      stats.objective = static_cast<double>(task.corpus.size());
    }
    stats.uncovered = static_cast<int>(uncovered_ids.size());
    result.iterations.push_back(stats);

    if (have_selection && uncovered_ids.empty()) break;
    if (!pool_grew) break;  // proposer exhausted; further iterations cannot help
    if (iteration == task.iterations) break;

    focus.clear();
    for (const Sample& sample : task.corpus) {
      if (uncovered_ids.count(sample.id)) focus.push_back(sample);
    }
    if (focus.empty()) break;
  }

  if (!have_selection) {
    throw SolverError("candidate pool never reached K=" + std::to_string(task.k) + " columns (" +
                      std::to_string(result.pool.size()) + " found)");
  }
  result.clusters = clusters_from_selection(result.matrix, result.selection);
  return result;
}

std::string build_commit_prompt(const std::vector<Explanation>& predicates, const Sample& sample) {
  if (predicates.empty()) throw ValidationError("build_commit_prompt: no predicates");
  std::string prompt;
  for (std::size_t i = 0; i < predicates.size(); ++i) {
    prompt += "Predicate " + std::to_string(i) + ": " + predicates[i].text + "\n";
  }
  prompt += "Text: " + sample.text + "\nChoose the Predicate the matches the Text the most.";
  return prompt;
}

ClusterSet commit(const ClusterSet& clusters, const AssignmentMatrix& matrix,
                  const SelectionSolution& selection, const std::vector<Sample>& corpus,
                  Backend* committer, CommitStats* stats) {
  if (clusters.clusters.empty()) throw ValidationError("commit: no clusters to commit to");
  const std::vector<int> selected = selection.selected_indices();
  if (selected.size() != clusters.clusters.size()) {
    throw ValidationError("commit: selection and cluster set disagree on cluster count");
  }

  // Support counts of the selected columns, for the deterministic rule.
  std::vector<int> support(clusters.clusters.size());
  for (std::size_t c = 0; c < clusters.clusters.size(); ++c) {
    support[c] = matrix.column_sum(selected[c]);
  }

  CommitStats local;
  std::map<std::string, int> committed;
  for (const Sample& sample : corpus) {
    std::vector<int> supporters;  // cluster indices whose member set holds the sample
    for (std::size_t c = 0; c < clusters.clusters.size(); ++c) {
      if (clusters.clusters[c].members.count(sample.id)) supporters.push_back(static_cast<int>(c));
    }

    int choice = -1;
    if (supporters.size() == 1) {
      choice = supporters[0];
    } else {
      std::vector<int> pool_indices = supporters;
      if (pool_indices.empty()) {
        pool_indices.resize(clusters.clusters.size());
        for (std::size_t c = 0; c < pool_indices.size(); ++c) pool_indices[c] = static_cast<int>(c);
      }
      if (committer) {
        std::vector<Explanation> predicates;
        predicates.reserve(pool_indices.size());
        for (int c : pool_indices) {
          predicates.push_back(clusters.clusters[static_cast<std::size_t>(c)].explanation);
        }
        std::string response = committer->complete(
            {build_commit_prompt(predicates, sample), /*max_tokens=*/16, /*temperature=*/0.0, {}});
        int picked = parse_commit_choice(response);
        if (picked >= 0 && picked < static_cast<int>(pool_indices.size())) {
          choice = pool_indices[static_cast<std::size_t>(picked)];
          ++local.backend_choices;
        } else {
          ++local.fallbacks;
        }
      }
      if (choice < 0) {
        if (supporters.empty()) {
          choice = 0;
        } else {
          choice = supporters[0];
          for (int c : supporters) {
            if (support[static_cast<std::size_t>(c)] < support[static_cast<std::size_t>(choice)]) {
              choice = c;
            }
          }
        }
      }
    }
    committed[sample.id] = choice;
  }
  if (stats) *stats = local;
  ClusterSet result = clusters;
  result.committed = std::move(committed);
  return result;
}

namespace {

void grow_taxonomy(TaxonomyNode& node, const ClusteringTask& node_task,
                   const PipelineBackends& backends, int max_depth, int split_threshold,
                   const RunOptions& options) {
  RunResult run = run_clustering(node_task, backends, options);
  for (const Cluster& cluster : run.clusters.clusters) {
    TaxonomyNode child;
    child.explanation = cluster.explanation;
    child.members = cluster.members;
    child.depth = node.depth + 1;
    node.children.push_back(std::move(child));
  }
  for (std::size_t c = 0; c < node.children.size(); ++c) {
    TaxonomyNode& child = node.children[c];
    if (static_cast<int>(child.members.size()) <= split_threshold) continue;
    if (child.depth >= max_depth) continue;
    ClusteringTask subtask = node_task;
    subtask.goal = augment_goal(node_task.goal, child.explanation.text);
    subtask.seed = derive_seed(node_task.seed, c + 1, static_cast<std::uint64_t>(child.depth));
    subtask.corpus.clear();
    for (const Sample& sample : node_task.corpus) {
      if (child.members.count(sample.id)) subtask.corpus.push_back(sample);
    }
    grow_taxonomy(child, subtask, backends, max_depth, split_threshold, options);
  }
}

}  // namespace

TaxonomyNode build_taxonomy(const ClusteringTask& task, const PipelineBackends& backends,
                            int max_depth, int split_threshold, const RunOptions& options) {
  if (max_depth < 1) throw ValidationError("build_taxonomy: max_depth must be >= 1");
  if (split_threshold < 1) throw ValidationError("build_taxonomy: split_threshold must be >= 1");
  validated(task);

  TaxonomyNode root;
  root.explanation = Explanation{kTaxonomyRootLabel, {}};
  root.depth = 0;
  for (const Sample& sample : task.corpus) root.members.insert(sample.id);
  grow_taxonomy(root, task, backends, max_depth, split_threshold, options);
  return root;
}

}  // namespace goalclust
