#include "goalclust/select.hpp"

#include <algorithm>
#include <limits>

namespace goalclust {
namespace {

// Column support lists; the solvers track coverage with two integer
// counters (missed samples, total excess coverage) so every objective
// comparison is exact: loss = miss + lambda * overlap.
struct Columns {
  int n_samples = 0;
  std::vector<std::vector<int>> rows_of;

  explicit Columns(const AssignmentMatrix& m) : n_samples(m.n_samples()) {
    rows_of.resize(static_cast<std::size_t>(m.n_cols()));
    for (int j = 0; j < m.n_cols(); ++j) {
      for (int x = 0; x < m.n_samples(); ++x) {
        if (m.at(x, j)) rows_of[static_cast<std::size_t>(j)].push_back(x);
      }
    }
  }

  int n_cols() const { return static_cast<int>(rows_of.size()); }
};

std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    if (result > cap) return cap + 1;
    result = result * (n - k + i) / i;
  }
  return result;
}

// Depth-first search over selection vectors in lexicographic order of the
// selected index set (include-first). With bounding disabled this is plain
// exhaustive enumeration; the bound relaxes the column coupling, letting
// each sample independently take its best reachable inclusion count, so it
// never exceeds the true subtree optimum and exactness is preserved.
class SubsetSearch {
 public:
  SubsetSearch(const Columns& cols, double lambda, bool use_bound)
      : cols_(cols), lambda_(lambda), use_bound_(use_bound), base_(cols.n_samples, 0) {
    // suffix_deg_[j][x]: columns with index >= j that cover sample x.
    const std::size_t n = static_cast<std::size_t>(cols_.n_samples);
    suffix_deg_.assign(static_cast<std::size_t>(cols_.n_cols()) + 1, std::vector<int>(n, 0));
    for (int j = cols_.n_cols() - 1; j >= 0; --j) {
      suffix_deg_[j] = suffix_deg_[j + 1];
      for (int x : cols_.rows_of[j]) ++suffix_deg_[j][static_cast<std::size_t>(x)];
    }
  }

  // sum(s) = K mode.
  std::vector<int> solve_constrained(int k) {
    k_ = k;
    reset();
    dfs_constrained(0, 0);
    return best_set_;
  }

  // cost-per-column mode.
  std::vector<int> solve_penalized(double cost) {
    cost_ = cost;
    reset();
    dfs_penalized(0);
    return best_set_;
  }

 private:
  void reset() {
    best_value_ = std::numeric_limits<double>::infinity();
    best_set_.clear();
    found_ = false;
    chosen_.clear();
    miss_ = cols_.n_samples;
    overlap_ = 0;
  }

  double current_loss() const { return miss_ + lambda_ * overlap_; }

  void include(int j) {
    for (int x : cols_.rows_of[j]) {
      int& b = base_[static_cast<std::size_t>(x)];
      if (b == 0) {
        --miss_;
      } else {
        ++overlap_;
      }
      ++b;
    }
    chosen_.push_back(j);
  }

  void exclude(int j) {
    chosen_.pop_back();
    for (int x : cols_.rows_of[j]) {
      int& b = base_[static_cast<std::size_t>(x)];
      --b;
      if (b == 0) {
        ++miss_;
      } else {
        --overlap_;
      }
    }
  }

  // Misses no remaining column can repair; overlap can only grow.
  int unreachable_misses(int j) const {
    int count = 0;
    const std::vector<int>& deg = suffix_deg_[static_cast<std::size_t>(j)];
    for (int x = 0; x < cols_.n_samples; ++x) {
      if (base_[static_cast<std::size_t>(x)] == 0 && deg[static_cast<std::size_t>(x)] == 0) {
        ++count;
      }
    }
    return count;
  }

  // Constrained-mode bound: picking r more columns forces each sample's
  // extra coverage t into [max(0, r - #remaining-non-covering),
  // min(r, #remaining-covering)]; every sample independently takes the best
  // t in that window, which relaxes the column coupling and never exceeds
  // the true subtree optimum.
  double constrained_bound(int j, int kc) const {
    const int r = k_ - kc;
    const int remaining = cols_.n_cols() - j;
    const std::vector<int>& deg = suffix_deg_[static_cast<std::size_t>(j)];
    int bound_miss = 0;
    int bound_overlap = 0;
    for (int x = 0; x < cols_.n_samples; ++x) {
      const int base = base_[static_cast<std::size_t>(x)];
      const int d = deg[static_cast<std::size_t>(x)];
      const int t_min = std::max(0, r - (remaining - d));
      const int t_max = std::min(r, d);
      const int t = std::clamp(1 - base, t_min, t_max);
      const int m = base + t;
      if (m == 0) {
        ++bound_miss;
      } else if (m > 1) {
        bound_overlap += m - 1;
      }
    }
    return bound_miss + lambda_ * bound_overlap;
  }

  void dfs_constrained(int j, int kc) {
    if (kc == k_) {
      double value = current_loss();
      // First hit in DFS order is the lexicographically smallest optimum,
      // so replacement is on strict improvement only.
      if (value < best_value_) {
        best_value_ = value;
        best_set_ = chosen_;
        found_ = true;
      }
      return;
    }
    if (cols_.n_cols() - j < k_ - kc) return;
    if (use_bound_ && found_ && constrained_bound(j, kc) >= best_value_) return;
    include(j);
    dfs_constrained(j + 1, kc + 1);
    exclude(j);
    dfs_constrained(j + 1, kc);
  }

  void dfs_penalized(int j) {
    if (j == cols_.n_cols()) {
      double value = current_loss() + cost_ * static_cast<double>(chosen_.size());
      // Optima of different sizes can tie (a column whose coverage gain
      // exactly repays its cost). Ties prefer the fewest columns, then the
      // lexicographically smallest index set, so the returned optimum never
      // carries a droppable zero-gain column.
      if (value < best_value_ ||
          (found_ && value == best_value_ &&
           (chosen_.size() < best_set_.size() ||
            (chosen_.size() == best_set_.size() &&
             std::lexicographical_compare(chosen_.begin(), chosen_.end(), best_set_.begin(),
                                          best_set_.end()))))) {
        best_value_ = value;
        best_set_ = chosen_;
        found_ = true;
      }
      return;
    }
    if (use_bound_ && found_) {
      double bound =
          lambda_ * overlap_ + unreachable_misses(j) + cost_ * static_cast<double>(chosen_.size());
      if (bound > best_value_) return;  // keep ties reachable for the lex rule
    }
    include(j);
    dfs_penalized(j + 1);
    exclude(j);
    dfs_penalized(j + 1);
  }

  const Columns& cols_;
  double lambda_;
  bool use_bound_;
  int k_ = 0;
  double cost_ = 0.0;

  std::vector<int> base_;
  std::vector<std::vector<int>> suffix_deg_;
  std::vector<int> chosen_;
  int miss_ = 0;
  int overlap_ = 0;

  double best_value_ = 0.0;
  std::vector<int> best_set_;
  bool found_ = false;
};

SelectionSolution make_solution(const AssignmentMatrix& matrix, const std::vector<int>& indices,
                                SelectionMode mode, double lambda, double cost,
                                SolverKind solver) {
  SelectionSolution solution;
  solution.selected.assign(static_cast<std::size_t>(matrix.n_cols()), 0);
  for (int j : indices) solution.selected[static_cast<std::size_t>(j)] = 1;
  solution.inclusion_counts = inclusion_counts(matrix, solution.selected);
  solution.objective = selection_loss(matrix, solution.selected, lambda);
  if (mode == SelectionMode::kPenalized) {
    solution.objective += cost * static_cast<double>(indices.size());
  }
  solution.mode = mode;
  solution.lambda = lambda;
  solution.solver = solver;
  return solution;
}

}  // namespace

double piecewise_loss(int inclusion_count, double lambda) {
  if (inclusion_count < 0) {
    throw ValidationError("piecewise_loss: inclusion count must be >= 0");
  }
  if (inclusion_count < 1) return 1.0 - inclusion_count;
  if (inclusion_count == 1) return 0.0;
  return lambda * (inclusion_count - 1);
}

double selection_loss(const AssignmentMatrix& matrix, const std::vector<std::uint8_t>& selected,
                      double lambda) {
  std::vector<int> m = inclusion_counts(matrix, selected);
  double total = 0.0;
  for (int count : m) total += piecewise_loss(count, lambda);
  return total;
}

double linearized_loss(const AssignmentMatrix& matrix, const std::vector<std::uint8_t>& selected,
                       double lambda) {
  std::vector<int> m = inclusion_counts(matrix, selected);
  double total = 0.0;
  for (int count : m) {
    total += std::max(1.0 - count, lambda * (count - 1));
  }
  return total;
}

SelectionSolution solve_selection(const SelectionInstance& instance, SolverKind solver,
                                  const SolveOptions& options) {
  if (instance.lambda < 0.0) throw ValidationError("selection: lambda must be >= 0");
  const AssignmentMatrix& matrix = instance.matrix;
  const int n_cols = matrix.n_cols();
  if (n_cols == 0) throw ValidationError("selection: matrix has no columns");

  if (instance.mode == SelectionMode::kPenalized) {
    if (instance.cost < 0.0) throw ValidationError("selection: column cost must be >= 0");
    if (solver == SolverKind::kGreedy) {
      throw ValidationError("greedy solver applies to constrained-k mode only");
    }
    if (solver == SolverKind::kExhaustive) {
      if (n_cols >= 64 || (std::uint64_t{1} << n_cols) > options.exhaustive_cap) {
        throw SolverError("exhaustive enumeration over 2^" + std::to_string(n_cols) +
                          " subsets exceeds the cap");
      }
    }
    Columns cols(matrix);
    SubsetSearch search(cols, instance.lambda, solver == SolverKind::kExactIlp);
    std::vector<int> best = search.solve_penalized(instance.cost);
    return make_solution(matrix, best, SelectionMode::kPenalized, instance.lambda, instance.cost,
                         solver);
  }

  const int k = instance.k;
  if (k < 0) throw ValidationError("selection: k must be >= 0");
  if (k > n_cols) {
    throw SolverError("infeasible selection: K=" + std::to_string(k) + " exceeds candidate count " +
                      std::to_string(n_cols));
  }
  if (solver == SolverKind::kGreedy) {
    return greedy_select(matrix, k, instance.lambda);
  }
  if (solver == SolverKind::kExhaustive) {
    std::uint64_t subsets = binomial_capped(static_cast<std::uint64_t>(n_cols),
                                            static_cast<std::uint64_t>(k), options.exhaustive_cap);
    if (subsets > options.exhaustive_cap) {
      throw SolverError("exhaustive enumeration over C(" + std::to_string(n_cols) + "," +
                        std::to_string(k) + ") subsets exceeds the cap");
    }
  }
  Columns cols(matrix);
  SubsetSearch search(cols, instance.lambda, solver == SolverKind::kExactIlp);
  std::vector<int> best = search.solve_constrained(k);
  return make_solution(matrix, best, SelectionMode::kConstrainedK, instance.lambda, 0.0, solver);
}

SelectionSolution solve_penalized(const SelectionInstance& instance, double cost,
                                  SolverKind solver, const SolveOptions& options) {
  SelectionInstance penalized = instance;
  penalized.mode = SelectionMode::kPenalized;
  penalized.cost = cost;
  return solve_selection(penalized, solver, options);
}

SelectionSolution greedy_select(const AssignmentMatrix& matrix, int k, double lambda) {
  const int n_cols = matrix.n_cols();
  if (k < 0) throw ValidationError("greedy_select: k must be >= 0");
  if (k > n_cols) {
    throw SolverError("infeasible selection: K=" + std::to_string(k) + " exceeds candidate count " +
                      std::to_string(n_cols));
  }
  Columns cols(matrix);
  std::vector<char> covered(static_cast<std::size_t>(cols.n_samples), 0);
  std::vector<char> selected(static_cast<std::size_t>(n_cols), 0);
  std::vector<int> picks;
  for (int round = 0; round < k; ++round) {
    int best_j = -1;
    int best_gain = -1;
    for (int j = 0; j < n_cols; ++j) {
      if (selected[static_cast<std::size_t>(j)]) continue;
      int gain = 0;
      for (int x : cols.rows_of[static_cast<std::size_t>(j)]) {
        if (!covered[static_cast<std::size_t>(x)]) ++gain;
      }
      if (gain > best_gain) {  // strict: ties keep the lowest index
        best_gain = gain;
        best_j = j;
      }
    }
    selected[static_cast<std::size_t>(best_j)] = 1;
    picks.push_back(best_j);
    for (int x : cols.rows_of[static_cast<std::size_t>(best_j)]) {
      covered[static_cast<std::size_t>(x)] = 1;
    }
  }
  std::sort(picks.begin(), picks.end());
  return make_solution(matrix, picks, SelectionMode::kConstrainedK, lambda, 0.0,
                       SolverKind::kGreedy);
}

}  // namespace goalclust
