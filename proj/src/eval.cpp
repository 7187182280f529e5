#include "goalclust/eval.hpp"

#include <algorithm>
#include <iostream>
#include <limits>

#include "goalclust/rng.hpp"

namespace goalclust {
namespace {

std::vector<std::string> sorted_class_ids(const ReferenceLabels& refs) {
  std::vector<std::string> ids;
  ids.reserve(refs.classes.size());
  for (const auto& [id, members] : refs.classes) ids.push_back(id);
  return ids;  // std::map iterates in sorted order
}

// Exact min-cost assignment on a square matrix (Hungarian with potentials).
// Integer costs keep every comparison exact; scanning order makes ties
// deterministic. Returns the column assigned to each row.
std::vector<int> hungarian_square(const std::vector<std::vector<long long>>& cost) {
  const int n = static_cast<int>(cost.size());
  const long long kInf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<long long> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0];
      int j1 = 0;
      long long delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        long long cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

double percent(double numerator, double denominator) {
  return denominator == 0.0 ? 0.0 : 100.0 * numerator / denominator;
}

long long intersection_size(const std::set<std::string>& a, const std::set<std::string>& b) {
  const std::set<std::string>& small = a.size() <= b.size() ? a : b;
  const std::set<std::string>& large = a.size() <= b.size() ? b : a;
  long long count = 0;
  for (const std::string& id : small) count += large.count(id);
  return count;
}

}  // namespace

Matching hungarian_match(const std::vector<std::set<std::string>>& outputs,
                         const ReferenceLabels& refs) {
  if (outputs.empty()) throw ValidationError("hungarian_match: outputs must be non-empty");
  const std::vector<std::string> class_ids = sorted_class_ids(refs);
  const int n_out = static_cast<int>(outputs.size());
  const int n_ref = static_cast<int>(class_ids.size());
  const int n = std::max(n_out, n_ref);

  std::vector<std::vector<long long>> overlap(static_cast<std::size_t>(n_out),
                                              std::vector<long long>(static_cast<std::size_t>(n_ref), 0));
  for (int i = 0; i < n_out; ++i) {
    for (int r = 0; r < n_ref; ++r) {
      overlap[i][r] = intersection_size(outputs[i], refs.classes.at(class_ids[r]));
    }
  }

  // Maximize overlap == minimize negated cost; dummies pad at zero weight.
  std::vector<std::vector<long long>> cost(static_cast<std::size_t>(n),
                                           std::vector<long long>(static_cast<std::size_t>(n), 0));
  for (int i = 0; i < n_out; ++i) {
    for (int r = 0; r < n_ref; ++r) cost[i][r] = -overlap[i][r];
  }

  std::vector<int> row_to_col = hungarian_square(cost);
  Matching matching;
  for (int i = 0; i < n_out; ++i) {
    int r = row_to_col[i];
    if (r >= 0 && r < n_ref) {
      matching.pairs.emplace_back(i, r);
      matching.total_overlap += overlap[i][r];
    }
  }
  return matching;
}

F1Report macro_f1_report(const std::vector<std::set<std::string>>& outputs,
                         const ReferenceLabels& refs, const Matching& matching) {
  const std::vector<std::string> class_ids = sorted_class_ids(refs);
  std::set<std::string> labeled;
  for (const auto& [id, members] : refs.classes) labeled.insert(members.begin(), members.end());

  std::vector<int> ref_to_output(class_ids.size(), -1);
  for (const auto& [out, ref] : matching.pairs) {
    if (ref >= 0 && ref < static_cast<int>(class_ids.size())) ref_to_output[ref] = out;
  }

  F1Report report;
  double sum = 0.0;
  int counted = 0;
  for (std::size_t r = 0; r < class_ids.size(); ++r) {
    const std::set<std::string>& ref_members = refs.classes.at(class_ids[r]);
    if (ref_members.empty()) {
      std::cerr << "warning: reference class \"" << class_ids[r]
                << "\" is empty; excluded from macro F1\n";
      continue;
    }
    PerClassF1 entry;
    entry.class_id = class_ids[r];
    entry.matched_output = ref_to_output[r];
    if (entry.matched_output >= 0) {
      const std::set<std::string>& out_members = outputs[static_cast<std::size_t>(entry.matched_output)];
      long long predicted = intersection_size(out_members, labeled);
      long long hits = intersection_size(out_members, ref_members);
      if (predicted > 0 && hits > 0) {
        double precision = static_cast<double>(hits) / static_cast<double>(predicted);
        double recall = static_cast<double>(hits) / static_cast<double>(ref_members.size());
        entry.f1 = 100.0 * 2.0 * precision * recall / (precision + recall);
      }
    }
    sum += entry.f1;
    ++counted;
    report.per_class.push_back(std::move(entry));
  }
  report.macro = counted > 0 ? sum / counted : 0.0;
  return report;
}

double macro_f1(const std::vector<std::set<std::string>>& outputs, const ReferenceLabels& refs,
                const Matching& matching) {
  return macro_f1_report(outputs, refs, matching).macro;
}

CoverageReport coverage_overlap(const ClusterSet& clusters, const std::vector<Sample>& corpus) {
  CoverageReport report;
  if (corpus.empty()) return report;
  long long covered = 0, once = 0, multi = 0;
  for (const Sample& sample : corpus) {
    int memberships = 0;
    for (const Cluster& cluster : clusters.clusters) {
      memberships += cluster.members.count(sample.id);
    }
    if (memberships >= 1) ++covered;
    if (memberships == 1) ++once;
    if (memberships >= 2) ++multi;
  }
  const double n = static_cast<double>(corpus.size());
  report.covered_pct = 100.0 * covered / n;
  report.exactly_once_pct = 100.0 * once / n;
  report.multi_pct = 100.0 * multi / n;
  return report;
}

StageScores stage_scores(const ReferenceLabels& refs,
                         const std::map<std::string, std::set<std::string>>& supported,
                         const std::vector<Sample>& corpus) {
  StageScores scores;
  const std::set<std::string> empty;
  double sum = 0.0;
  for (const auto& [class_id, ref_members] : refs.classes) {
    const std::size_t n_in = ref_members.size();
    const std::size_t n_out = corpus.size() - n_in;
    if (n_in == 0) {
      throw ValidationError("stage_scores: reference class \"" + class_id + "\" is empty");
    }
    if (corpus.size() < n_in || n_out == 0) {
      throw ValidationError("stage_scores: reference class \"" + class_id +
                            "\" covers the whole corpus");
    }
    auto it = supported.find(class_id);
    const std::set<std::string>& support = it == supported.end() ? empty : it->second;
    long long hits = 0;       // in class and supported
    long long rejected = 0;   // out of class and not supported
    for (const Sample& sample : corpus) {
      bool in_class = ref_members.count(sample.id) > 0;
      bool in_support = support.count(sample.id) > 0;
      if (in_class && in_support) ++hits;
      if (!in_class && !in_support) ++rejected;
    }
    ClassScore entry;
    entry.class_id = class_id;
    entry.recall = percent(static_cast<double>(hits), static_cast<double>(n_in));
    entry.specificity = percent(static_cast<double>(rejected), static_cast<double>(n_out));
    entry.score = (entry.recall + entry.specificity) / 2.0;
    sum += entry.score;
    scores.per_class.push_back(std::move(entry));
  }
  scores.aggregate = refs.classes.empty() ? 0.0 : sum / static_cast<double>(refs.classes.size());
  return scores;
}

CandidatePoolScore candidate_pool_score(
    const ReferenceLabels& refs, const std::vector<std::set<std::string>>& candidate_supports,
    const std::vector<Sample>&) {
  if (candidate_supports.empty()) {
    throw ValidationError("candidate_pool_score: candidate list must be non-empty");
  }
  CandidatePoolScore result;
  std::set<int> matched;
  double sum = 0.0;
  int counted = 0;
  for (const auto& [class_id, ref_members] : refs.classes) {
    if (ref_members.empty()) continue;
    double best = 0.0;
    int best_candidate = -1;
    for (std::size_t c = 0; c < candidate_supports.size(); ++c) {
      double recall = static_cast<double>(intersection_size(candidate_supports[c], ref_members)) /
                      static_cast<double>(ref_members.size());
      if (recall > best) {  // strict: ties keep the lowest candidate index
        best = recall;
        best_candidate = static_cast<int>(c);
      }
    }
    result.argmax_candidate.push_back(best_candidate);
    if (best_candidate >= 0) matched.insert(best_candidate);
    sum += 100.0 * best;
    ++counted;
  }
  result.score = counted > 0 ? sum / counted : 0.0;
  result.matched_count = static_cast<int>(matched.size());
  return result;
}

ClusterSet random_baseline(const std::vector<Sample>& corpus, int k, std::uint64_t seed) {
  if (k < 1) throw ValidationError("random_baseline: k must be >= 1");
  ClusterSet result;
  result.clusters.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    result.clusters[static_cast<std::size_t>(c)].explanation =
        Explanation{"randomly assigned to cluster " + std::to_string(c + 1), {}};
  }
  std::mt19937_64 rng = seeded_rng(seed);
  std::map<std::string, int> committed;
  for (const Sample& sample : corpus) {
    int c = static_cast<int>(bounded_draw(rng, static_cast<std::uint64_t>(k)));
    result.clusters[static_cast<std::size_t>(c)].members.insert(sample.id);
    committed[sample.id] = c;
  }
  result.committed = std::move(committed);
  return result;
}

ReferenceLabels reference_from_labels(const std::vector<Sample>& corpus) {
  ReferenceLabels refs;
  for (const Sample& sample : corpus) {
    if (sample.ref_label) refs.classes[*sample.ref_label].insert(sample.id);
  }
  return refs;
}

ReferenceLabels reference_from_attr(const std::vector<Sample>& corpus, const std::string& dim) {
  ReferenceLabels refs;
  for (const Sample& sample : corpus) {
    auto it = sample.hidden_attrs.find(dim);
    if (it == sample.hidden_attrs.end()) continue;
    refs.classes[it->second].insert(sample.id);
    refs.explanations.emplace(it->second, "has a " + dim + " of " + it->second);
  }
  return refs;
}

std::vector<std::set<std::string>> output_sets(const ClusterSet& clusters) {
  std::vector<std::set<std::string>> sets;
  sets.reserve(clusters.clusters.size());
  for (const Cluster& cluster : clusters.clusters) sets.push_back(cluster.members);
  return sets;
}

std::vector<std::set<std::string>> committed_sets(const ClusterSet& clusters) {
  if (!clusters.committed) {
    throw ValidationError("committed_sets: cluster set has no committed map");
  }
  std::vector<std::set<std::string>> sets(clusters.clusters.size());
  for (const auto& [id, index] : *clusters.committed) {
    if (index < 0 || index >= static_cast<int>(sets.size())) {
      throw ValidationError("committed_sets: committed index out of range for sample " + id);
    }
    sets[static_cast<std::size_t>(index)].insert(id);
  }
  return sets;
}

}  // namespace goalclust
