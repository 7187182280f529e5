#pragma once

// Test-only reference implementations and fixture builders. The reference
// evaluators here are written from the definitions and stay independent of
// the library code paths they check (solvers, matcher, losses).

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "goalclust/core.hpp"

namespace testsupport {

/// Matrix from explicit column support lists (sample ids x1..xN, columns
/// e1..eM).
inline goalclust::AssignmentMatrix make_matrix(int n_samples,
                                               const std::vector<std::vector<int>>& column_rows) {
  std::vector<std::string> ids;
  for (int x = 0; x < n_samples; ++x) ids.push_back("x" + std::to_string(x + 1));
  std::vector<goalclust::Explanation> columns;
  for (std::size_t j = 0; j < column_rows.size(); ++j) {
    columns.push_back(goalclust::Explanation{"e" + std::to_string(j + 1), {}});
  }
  goalclust::AssignmentMatrix matrix(std::move(ids), std::move(columns));
  for (std::size_t j = 0; j < column_rows.size(); ++j) {
    for (int x : column_rows[j]) matrix.set(x, static_cast<int>(j), true);
  }
  return matrix;
}

/// The canonical 4-sample fixture: e1={x1,x2}, e2={x3,x4}, e3={x1..x4},
/// e4={x1}.
inline goalclust::AssignmentMatrix four_column_fixture() {
  return make_matrix(4, {{0, 1}, {2, 3}, {0, 1, 2, 3}, {0}});
}

/// Reference objective, evaluated from the definition: count how many chosen
/// columns hold each sample, charge 1 per miss and lambda per extra cover.
inline double ref_loss(const goalclust::AssignmentMatrix& matrix, const std::vector<int>& subset,
                       double lambda) {
  double total = 0.0;
  for (int x = 0; x < matrix.n_samples(); ++x) {
    int m = 0;
    for (int j : subset) m += matrix.at(x, j);
    if (m == 0) {
      total += 1.0;
    } else if (m > 1) {
      total += lambda * (m - 1);
    }
  }
  return total;
}

/// Exhaustive reference solver, constrained mode: first strict minimum over
/// combinations enumerated in lexicographic order.
inline std::pair<std::vector<int>, double> brute_force_constrained(
    const goalclust::AssignmentMatrix& matrix, int k, double lambda) {
  const int n_cols = matrix.n_cols();
  std::vector<int> combo(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) combo[static_cast<std::size_t>(i)] = i;
  std::vector<int> best;
  double best_value = std::numeric_limits<double>::infinity();
  while (true) {
    double value = ref_loss(matrix, combo, lambda);
    if (value < best_value) {
      best_value = value;
      best = combo;
    }
    // next combination in lexicographic order
    int i = k - 1;
    while (i >= 0 && combo[static_cast<std::size_t>(i)] == n_cols - k + i) --i;
    if (i < 0) break;
    ++combo[static_cast<std::size_t>(i)];
    for (int t = i + 1; t < k; ++t) {
      combo[static_cast<std::size_t>(t)] = combo[static_cast<std::size_t>(t - 1)] + 1;
    }
  }
  return {best, best_value};
}

/// Exhaustive reference solver, penalized mode: minimum of ref_loss +
/// cost * |subset| over all subsets, ties toward the fewest columns and then
/// the lexicographically smallest index set.
inline std::pair<std::vector<int>, double> brute_force_penalized(
    const goalclust::AssignmentMatrix& matrix, double cost, double lambda) {
  const int n_cols = matrix.n_cols();
  std::vector<int> best;
  double best_value = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n_cols); ++mask) {
    std::vector<int> subset;
    for (int j = 0; j < n_cols; ++j) {
      if (mask & (std::uint64_t{1} << j)) subset.push_back(j);
    }
    double value = ref_loss(matrix, subset, lambda) + cost * static_cast<double>(subset.size());
    bool better = value < best_value;
    if (!better && found && value == best_value) {
      better = subset.size() < best.size() ||
               (subset.size() == best.size() &&
                std::lexicographical_compare(subset.begin(), subset.end(), best.begin(),
                                             best.end()));
    }
    if (better) {
      best_value = value;
      best = subset;
      found = true;
    }
  }
  return {best, best_value};
}

/// Maximum matching weight by brute-force permutation, for matrices up to
/// ~8x8.
inline long long brute_force_matching(const std::vector<std::vector<long long>>& overlap) {
  const int n_out = static_cast<int>(overlap.size());
  const int n_ref = n_out > 0 ? static_cast<int>(overlap[0].size()) : 0;
  const int n = std::max(n_out, n_ref);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  long long best = 0;
  do {
    long long total = 0;
    for (int i = 0; i < n_out; ++i) {
      int r = perm[static_cast<std::size_t>(i)];
      if (r < n_ref) total += overlap[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)];
    }
    best = std::max(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Seeded random instance with the acceptance-scale shape: |X| <= 40,
/// J <= 16, K <= 5, cell density 0.3.
struct RandomInstance {
  goalclust::AssignmentMatrix matrix;
  int k = 0;
};

inline RandomInstance random_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto draw = [&rng](std::uint64_t n) { return rng() % n; };
  const int n = 5 + static_cast<int>(draw(36));   // 5..40
  const int j = 3 + static_cast<int>(draw(14));   // 3..16
  const int k = 1 + static_cast<int>(draw(std::min(j, 5)));
  std::vector<std::vector<int>> columns(static_cast<std::size_t>(j));
  for (int c = 0; c < j; ++c) {
    for (int x = 0; x < n; ++x) {
      if (draw(10) < 3) columns[static_cast<std::size_t>(c)].push_back(x);
    }
  }
  return RandomInstance{make_matrix(n, columns), k};
}

inline std::vector<std::uint8_t> to_selected(int n_cols, const std::vector<int>& subset) {
  std::vector<std::uint8_t> s(static_cast<std::size_t>(n_cols), 0);
  for (int j : subset) s[static_cast<std::size_t>(j)] = 1;
  return s;
}

}  // namespace testsupport
