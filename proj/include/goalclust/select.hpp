#pragma once

#include <cstdint>
#include <vector>

#include "goalclust/core.hpp"

namespace goalclust {

// The selection stage minimizes, over binary column choices s,
//
//   L(s) = sum_x f_lambda(m_x)          with m = A s^T,
//
// where f penalizes samples missed by every selected cluster (m_x < 1,
// loss 1 - m_x) and samples covered more than once (m_x > 1, loss
// lambda * (m_x - 1)); f(1) = 0. Constrained mode fixes sum(s) = K;
// penalized mode instead adds cost * sum(s) to the objective.

/// f_lambda(m): the per-sample miss/overlap loss.
double piecewise_loss(int inclusion_count, double lambda);

/// Direct evaluation of L(s) on a fixed selection vector.
double selection_loss(const AssignmentMatrix& matrix, const std::vector<std::uint8_t>& selected,
                      double lambda);

/// Same quantity through the linear reduction: the minimal feasible
/// auxiliary vector under a >= 1 - m and a >= lambda * (m - 1), summed.
/// Equal to selection_loss for every binary s; both paths are kept so the
/// linearization stays testable against the piecewise form.
double linearized_loss(const AssignmentMatrix& matrix, const std::vector<std::uint8_t>& selected,
                       double lambda);

struct SelectionInstance {
  AssignmentMatrix matrix;
  SelectionMode mode = SelectionMode::kConstrainedK;
  int k = 0;          // constrained mode: number of columns to select
  double cost = 0.0;  // penalized mode: price per selected column
  double lambda = 0.5;
};

struct SolveOptions {
  // Subset count above which an explicit exhaustive request is refused.
  std::uint64_t exhaustive_cap = 10'000'000;
};

/// Solves the selection problem. exact-ilp (branch-and-bound with a
/// relaxation lower bound) and exhaustive both return a global optimum;
/// ties break toward the lexicographically smallest selected index set.
/// greedy runs the max-coverage heuristic and reports its (generally
/// suboptimal) objective.
SelectionSolution solve_selection(const SelectionInstance& instance,
                                  SolverKind solver = SolverKind::kExactIlp,
                                  const SolveOptions& options = {});

/// Penalized variant: minimizes L(s) + cost * sum(s) with no cardinality
/// constraint. Ties (possible across set sizes here) prefer the fewest
/// selected columns, then the lexicographically smallest index set.
SelectionSolution solve_penalized(const SelectionInstance& instance, double cost,
                                  SolverKind solver = SolverKind::kExactIlp,
                                  const SolveOptions& options = {});

/// Max-coverage baseline: K rounds, each picking the column that covers the
/// most currently-uncovered samples, ties to the lowest column index.
SelectionSolution greedy_select(const AssignmentMatrix& matrix, int k, double lambda);

}  // namespace goalclust
