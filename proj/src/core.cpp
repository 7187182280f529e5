#include "goalclust/core.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>
#include <unordered_set>

namespace goalclust {

std::vector<std::string> validate_task(const ClusteringTask& task) {
  std::vector<std::string> violations;
  if (task.k < 1) {
    violations.push_back("k: must be >= 1 (got " + std::to_string(task.k) + ")");
  }
  if (task.j_total < task.k) {
    violations.push_back("j_total: candidate pool smaller than k (" + std::to_string(task.j_total) +
                         " < " + std::to_string(task.k) + ")");
  }
  if (task.lambda < 0.0) {
    violations.push_back("lambda: must be >= 0");
  }
  if (task.iterations < 1) {
    violations.push_back("iterations: must be >= 1");
  }
  if (task.j_per_prompt < 1) {
    violations.push_back("j_per_prompt: must be >= 1");
  }
  if (task.context_budget < 1) {
    violations.push_back("context_budget: must be >= 1");
  }
  if (task.goal.empty()) {
    violations.push_back("goal: must be non-empty");
  }
  if (task.corpus.empty()) {
    violations.push_back("corpus: must be non-empty");
  }
  std::unordered_set<std::string> seen_ids;
  for (const Sample& sample : task.corpus) {
    if (sample.text.empty()) {
      violations.push_back("corpus: sample \"" + sample.id + "\" has empty text");
    }
    if (!seen_ids.insert(sample.id).second) {
      violations.push_back("corpus: duplicate sample id \"" + sample.id + "\"");
    }
  }
  return violations;
}

const ClusteringTask& validated(const ClusteringTask& task) {
  std::vector<std::string> violations = validate_task(task);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid task:";
    for (const std::string& v : violations) msg << "\n  - " << v;
    throw ValidationError(msg.str());
  }
  return task;
}

AssignmentMatrix::AssignmentMatrix(std::vector<std::string> row_ids, std::vector<Explanation> columns)
    : row_ids_(std::move(row_ids)),
      columns_(std::move(columns)),
      cells_(row_ids_.size() * columns_.size(), 0) {}

void AssignmentMatrix::check_indices(int x, int j) const {
  if (x < 0 || x >= n_samples() || j < 0 || j >= n_cols()) {
    throw ValidationError("matrix index out of range: (" + std::to_string(x) + ", " +
                          std::to_string(j) + ") for " + std::to_string(n_samples()) + "x" +
                          std::to_string(n_cols()));
  }
}

int AssignmentMatrix::at(int x, int j) const {
  check_indices(x, j);
  return cells_[static_cast<std::size_t>(x) * columns_.size() + j];
}

void AssignmentMatrix::set(int x, int j, bool value) {
  check_indices(x, j);
  cells_[static_cast<std::size_t>(x) * columns_.size() + j] = value ? 1 : 0;
}

int AssignmentMatrix::column_sum(int j) const {
  check_indices(0, j);
  int sum = 0;
  for (int x = 0; x < n_samples(); ++x) {
    sum += cells_[static_cast<std::size_t>(x) * columns_.size() + j];
  }
  return sum;
}

std::vector<int> inclusion_counts(const AssignmentMatrix& matrix,
                                  const std::vector<std::uint8_t>& selected) {
  if (static_cast<int>(selected.size()) != matrix.n_cols()) {
    throw ValidationError("selection vector length " + std::to_string(selected.size()) +
                          " does not match column count " + std::to_string(matrix.n_cols()));
  }
  std::vector<int> m(matrix.n_samples(), 0);
  for (int j = 0; j < matrix.n_cols(); ++j) {
    if (!selected[j]) continue;
    for (int x = 0; x < matrix.n_samples(); ++x) {
      m[x] += matrix.at(x, j);
    }
  }
  return m;
}

std::vector<int> SelectionSolution::selected_indices() const {
  std::vector<int> indices;
  for (int j = 0; j < static_cast<int>(selected.size()); ++j) {
    if (selected[j]) indices.push_back(j);
  }
  return indices;
}

std::string to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::kConstrainedK: return "constrained-k";
    case SelectionMode::kPenalized: return "penalized";
  }
  return "unknown";
}

std::string to_string(SolverKind solver) {
  switch (solver) {
    case SolverKind::kExactIlp: return "exact-ilp";
    case SolverKind::kExhaustive: return "exhaustive";
    case SolverKind::kGreedy: return "greedy";
  }
  return "unknown";
}

SelectionMode selection_mode_from_string(std::string_view s) {
  if (s == "constrained-k") return SelectionMode::kConstrainedK;
  if (s == "penalized") return SelectionMode::kPenalized;
  throw ValidationError("unknown selection mode: " + std::string(s));
}

SolverKind solver_kind_from_string(std::string_view s) {
  if (s == "exact-ilp") return SolverKind::kExactIlp;
  if (s == "exhaustive") return SolverKind::kExhaustive;
  if (s == "greedy") return SolverKind::kGreedy;
  throw ValidationError("unknown solver: " + std::string(s));
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string fnv1a64_hex(std::string_view data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
  return std::string(buf);
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace goalclust
