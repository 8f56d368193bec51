#pragma once

#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "gridstore/grid.hpp"
#include "gridstore/sequence.hpp"
#include "gridstore/world.hpp"

namespace gridstore {

enum class RetrievalPolicy {
  BaseR,  // park every blocker on the I/O row, then put it back
  ImpR,   // relocate blockers greedily inside W
};

std::string_view to_string(RetrievalPolicy policy);

/// More blockers must be parked than the I/O row has free cells.
class InfeasibleRelocation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Assignment {
  Load load = kNoLoad;
  Cell destination;
  bool io_park = false;
};

struct BlockerPlan {
  Load target = kNoLoad;
  Path path;                  // target cell first, I/O cell last
  std::vector<Load> blockers; // outermost first
  std::vector<Assignment> assignments;
};

struct RetrievalStep {
  BlockerPlan plan;
  std::vector<Action> actions;
};

/// Path from the target's cell to the I/O row minimizing the number of
/// occupied cells on it (target excluded), then its length. Among equal
/// paths each step takes the smallest (row, col) neighbor.
Path min_blocker_path(const WorldState& state, Load target);

/// Loads in W with a path of empty cells to some I/O cell, ascending.
std::vector<Load> unblocked_set(const WorldState& state);

/// Destination for the relocation of `blocker`, which lies on `pi`, given
/// that `remaining_blockers` more blockers still wait on `pi`. Candidates
/// are empty storage cells off `pi` reachable through empty cells (cleared
/// cells of `pi` and the I/O row included), nearest first. Returns the move
/// path (ending at the chosen W cell) or nullopt for I/O parking.
std::optional<Path> choose_destination(const WorldState& state, Load blocker, const Path& pi,
                                       int remaining_blockers);

/// Retrieves `target`, relocating blockers per `policy`, and applies every
/// action to `state`. Requires an empty I/O row and leaves it empty.
RetrievalStep retrieve_step(WorldState& state, Load target, RetrievalPolicy policy);

inline std::vector<Action> retrieve_one(WorldState& state, Load target, RetrievalPolicy policy) {
  return retrieve_step(state, target, policy).actions;
}

struct RetrievalResult {
  MetricsRecord metrics;
  std::vector<Action> log;
  Sequence departures;
  double max_step_ms = 0.0;
};

/// Retrieves every stored load in the order revealed by `stream`.
RetrievalResult run_retrieval(const WorldState& start, OnlinePerturbationStream& stream,
                              RetrievalPolicy policy);

}  // namespace gridstore
