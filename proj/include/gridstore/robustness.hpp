#pragma once

#include <optional>
#include <span>

#include "gridstore/arrangement.hpp"
#include "gridstore/grid.hpp"

namespace gridstore {

/// Adjacency characterization: every load of `order` is on the front row or
/// next to a load that appears earlier in `order`.
bool satisfies_departure(const Arrangement& arr, std::span<const Load> order);

/// Retrieves the loads of `order` one by one along empty paths with no
/// relocations; true iff every retrieval finds a path.
bool simulate_satisfies(const Arrangement& arr, std::span<const Load> order);

/// True iff `arr` satisfies every k-bounded perturbation of the ascending
/// departure order. At full density this is the local test: every load x off
/// the front row has a neighbor y with x - y >= k + 1. Below full density it
/// falls back to simulating all perturbations of the placed loads and throws
/// std::invalid_argument when more than 10 loads are placed.
bool is_k_robust(const Arrangement& arr, int k);

/// Satisfies the arrival order `arrivals` and is k-robust for departures.
bool is_valid_arrangement(const Arrangement& arr, std::span<const Load> arrivals, int k);

struct SearchResult {
  std::optional<Arrangement> arrangement;
  long long nodes = 0;
  /// The search space was fully explored (or a solution found) within budget.
  bool complete = false;
};

/// Depth-first search for a full-density valid arrangement, filled row by
/// row from the front. Each row must contain the loads whose parents can only
/// sit directly below it. Stops after `node_budget` placements (negative:
/// unlimited).
SearchResult search_valid_arrangement(const GridSpec& spec, std::span<const Load> arrivals, int k,
                                      long long node_budget);

/// Exhaustive existence check for a zero-relocation arrangement. Intended
/// for small grids; throws std::invalid_argument above 12 cells.
bool brute_force_zero_reloc_exists(const GridSpec& spec, std::span<const Load> arrivals, int k);

}  // namespace gridstore
