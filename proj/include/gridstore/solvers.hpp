#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gridstore/arrangement.hpp"
#include "gridstore/grid.hpp"

namespace gridstore {

/// Step-by-step record of the column-pair procedure, for diagnostics and tests.
struct TraceEvent {
  enum class Kind {
    PairStarted,   // bottoms of a pair assigned: y = left bottom, x = right bottom
    XSkipped,      // x fails the quick departure check against its lower neighbors
    YRejected,     // (x, y) fails joint validity
    YEqualsX,      // y reached x in the arrival scan
    PairAccepted,  // x assigned to the right column and y to the left at `row`
    XExhausted,    // no more candidates for x: failure
  };
  Kind kind;
  int x = 0;
  int y = 0;
  int row = 0;
  int left_col = 0;
  int right_col = 0;
};

struct SolverConfig {
  /// Start offset into the reversed arrival order for the first column pair.
  int offset = 0;
  /// Node limit for the backtracking fallback.
  long long backtrack_budget = 1'000'000;
  /// Threads for the offset sweep; 0 reads GRIDSTORE_WORKERS, then falls back
  /// to the hardware concurrency.
  int workers = 0;
  /// Optional observer of the column-pair procedure.
  std::function<void(const TraceEvent&)> trace;
};

enum class SolveStatus { Success, Failure, BudgetExceeded };

std::string to_string(SolveStatus status);

struct SolveOutcome {
  std::optional<Arrangement> arrangement;
  SolveStatus status = SolveStatus::Failure;
  int achieved_k = 0;
  int offset_used = 0;
  double wall_ms = 0.0;
  /// Which construction produced the arrangement: "pairs", "backtrack",
  /// "front-row", "base".
  std::string method;

  bool ok() const noexcept { return status == SolveStatus::Success; }
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Column layout of the pair procedure: the ordered (left, right) pairs and,
/// for odd column counts, the final single column (3).
struct ColumnPlan {
  std::vector<std::pair<int, int>> pairs;
  std::optional<int> single;
};
ColumnPlan column_plan(int cols);

/// Column-pair construction for a k-robust arrangement that also satisfies
/// `arrivals`. Grids with fewer than 5 columns use the backtracking search;
/// a single row is trivially valid. Failure does not prove infeasibility.
SolveOutcome find_robust_arrangement(std::span<const Load> arrivals, const GridSpec& spec, int k,
                                     const SolverConfig& config = {});

/// Runs find_robust_arrangement for every first-pair offset 0..n-r and
/// returns the success with the smallest offset. Offsets may run on several
/// threads; the result does not depend on scheduling.
SolveOutcome find_robust_enhanced(std::span<const Load> arrivals, const GridSpec& spec, int k,
                                  const SolverConfig& config = {});

/// Splits loads into k+1 classes by label modulo k+1 (the class holding
/// load 1 first) and solves each as a deterministic instance on its own
/// block of contiguous columns. Needs c >= 3(k+1) with k+1 dividing c.
/// Throws std::invalid_argument on unsupported shapes and BudgetExceeded if
/// a block solve runs out of budget.
Arrangement congruence_partition_storage(std::span<const Load> arrivals, const GridSpec& spec,
                                         int k, const SolverConfig& config = {});

/// Arrangement that satisfies the arrival order and the unperturbed
/// departure order: column pairs at k = 0 over all offsets, then budgeted
/// backtracking. Throws BudgetExceeded when the budget runs out.
Arrangement base_storage(std::span<const Load> arrivals, const GridSpec& spec,
                         const SolverConfig& config = {});

/// Adversarial arrival order whose reverse starts n, k+2, k+3, ..., 2k+2;
/// the remaining loads follow in seeded random order. Needs r >= 2 and
/// n = r*c >= 2k+3.
Sequence lower_bound_instance(int k, const GridSpec& spec, std::uint64_t seed);

/// Tries find_robust_enhanced at k_start, k_start-1, ..., 1 and finally
/// base_storage at k = 0. Never fails short of BudgetExceeded.
SolveOutcome max_k_search(std::span<const Load> arrivals, const GridSpec& spec, int k_start,
                          const SolverConfig& config = {});

/// Worker count resolution shared by the solvers and the experiment runner.
int resolve_workers(int requested);

}  // namespace gridstore
