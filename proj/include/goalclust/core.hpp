#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace goalclust {

// ---------------------------------------------------------------------------
// Error taxonomy. The CLI maps these onto exit codes (validation=1,
// backend=2, solver=3), so keep new error types under one of the bases.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

class AuthError : public BackendError {
 public:
  using BackendError::BackendError;
};

class BudgetExceededError : public BackendError {
 public:
  using BackendError::BackendError;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Domain types.
// ---------------------------------------------------------------------------

/// One text sample of a corpus. `hidden_attrs` is only read by the synthetic
/// data generator and the evaluation harness; the clustering stages must
/// treat samples as opaque text.
struct Sample {
  std::string id;
  std::string text;
  std::map<std::string, std::string> hidden_attrs;
  std::optional<std::string> ref_label;

  bool operator==(const Sample&) const = default;
};

/// A full clustering problem: corpus, natural-language goal, target cluster
/// count and the hyperparameters of the propose/assign/select loop.
struct ClusteringTask {
  std::vector<Sample> corpus;
  std::string goal;
  int k = 1;                  // number of output clusters
  double lambda = 0.5;        // overlap penalty weight
  int j_total = 30;           // candidate pool target across all iterations
  int j_per_prompt = 8;       // explanations requested per proposal prompt
  int iterations = 5;
  int context_budget = 8192;  // prompt budget in length units (~tokens)
  std::uint64_t seed = 0;
};

/// Checks every task invariant and returns one message per violation
/// (empty means valid). Each message names the offending field.
std::vector<std::string> validate_task(const ClusteringTask& task);

/// Returns `task` unchanged, or throws ValidationError listing all
/// violations at once.
const ClusteringTask& validated(const ClusteringTask& task);

struct ExplanationOrigin {
  int iteration = 0;     // 1-based iteration of the propose/assign/select loop
  int prompt_index = 0;  // global prompt counter within the run
  int position = 0;      // position within the parsed response

  auto operator<=>(const ExplanationOrigin&) const = default;
};

/// A natural-language predicate evaluable as true/false on a single sample.
struct Explanation {
  std::string text;
  ExplanationOrigin origin;

  bool operator==(const Explanation&) const = default;
};

/// Binary samples-by-candidates matrix of assigner verdicts. Column j's
/// support set is the j-th candidate cluster.
class AssignmentMatrix {
 public:
  AssignmentMatrix() = default;
  AssignmentMatrix(std::vector<std::string> row_ids, std::vector<Explanation> columns);

  int n_samples() const { return static_cast<int>(row_ids_.size()); }
  int n_cols() const { return static_cast<int>(columns_.size()); }

  int at(int x, int j) const;
  void set(int x, int j, bool value);

  const std::vector<std::string>& row_ids() const { return row_ids_; }
  const std::vector<Explanation>& columns() const { return columns_; }

  /// Support size of column j, |{x : A[x,j] = 1}|.
  int column_sum(int j) const;

  bool operator==(const AssignmentMatrix&) const = default;

 private:
  void check_indices(int x, int j) const;

  std::vector<std::string> row_ids_;
  std::vector<Explanation> columns_;
  std::vector<std::uint8_t> cells_;  // row-major, n_samples x n_cols
};

/// m = A s^T: per-sample count of selected columns containing it.
std::vector<int> inclusion_counts(const AssignmentMatrix& matrix,
                                  const std::vector<std::uint8_t>& selected);

enum class SelectionMode { kConstrainedK, kPenalized };
enum class SolverKind { kExactIlp, kExhaustive, kGreedy };

std::string to_string(SelectionMode mode);
std::string to_string(SolverKind solver);
SelectionMode selection_mode_from_string(std::string_view s);
SolverKind solver_kind_from_string(std::string_view s);

/// Result of the selection stage over one assignment matrix.
struct SelectionSolution {
  std::vector<std::uint8_t> selected;  // s, length n_cols, entries in {0,1}
  std::vector<int> inclusion_counts;   // m = A s^T, length n_samples
  double objective = 0.0;              // minimized loss (plus cost term in penalized mode)
  SelectionMode mode = SelectionMode::kConstrainedK;
  double lambda = 0.0;
  SolverKind solver = SolverKind::kExactIlp;

  std::vector<int> selected_indices() const;

  bool operator==(const SelectionSolution&) const = default;
};

struct Cluster {
  Explanation explanation;
  std::set<std::string> members;

  bool operator==(const Cluster&) const = default;
};

/// Output of a clustering run: one cluster per selected explanation, the
/// samples no selected explanation supports, and (after commitment) a total
/// sample -> cluster map.
struct ClusterSet {
  std::vector<Cluster> clusters;
  std::set<std::string> uncovered;
  std::optional<std::map<std::string, int>> committed;

  bool operator==(const ClusterSet&) const = default;
};

inline constexpr const char* kTaxonomyRootLabel = "ROOT";

struct TaxonomyNode {
  Explanation explanation;  // root holds the sentinel label
  std::set<std::string> members;
  std::vector<TaxonomyNode> children;
  int depth = 0;

  bool operator==(const TaxonomyNode&) const = default;
};

/// Known reference classes over (a labeled subset of) a corpus, optionally
/// with the reference predicate for each class.
struct ReferenceLabels {
  std::map<std::string, std::set<std::string>> classes;
  std::map<std::string, std::string> explanations;

  bool operator==(const ReferenceLabels&) const = default;
};

// ---------------------------------------------------------------------------
// Small shared utilities.
// ---------------------------------------------------------------------------

/// FNV-1a 64-bit hash, used for cache keys and config fingerprints.
std::uint64_t fnv1a64(std::string_view data);

/// Hash rendered as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view data);

/// ASCII-only lowercase copy (non-ASCII bytes pass through).
std::string ascii_lower(std::string_view s);

}  // namespace goalclust
