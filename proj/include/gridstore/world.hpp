#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gridstore/arrangement.hpp"
#include "gridstore/grid.hpp"

namespace gridstore {

enum class ActionKind { Store, Retrieve, Relocate };

std::string_view to_string(ActionKind kind);

/// One move of one load along a path of cells. The first cell of the path
/// is where the load starts (for a Store, the I/O cell it appears on).
struct Action {
  ActionKind kind = ActionKind::Store;
  Load load = kNoLoad;
  Path path;

  friend bool operator==(const Action&, const Action&) = default;
};

enum class ActionErrorKind { IllegalPath, WrongArrivalOrder, LoadAbsent };

class ActionError : public std::runtime_error {
 public:
  ActionError(ActionErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ActionErrorKind kind() const noexcept { return kind_; }

 private:
  ActionErrorKind kind_;
};

/// Occupancy of W+ together with the pending arrivals and the set of
/// departed loads. Only mutated through apply().
class WorldState {
 public:
  /// Empty grid; `arrivals` is the arrival order of loads 1..arrivals.size().
  WorldState(GridSpec spec, Sequence arrivals);

  /// World holding `arr` in W with nothing pending. Loads of the label range
  /// that are not placed count as departed.
  static WorldState from_arrangement(const Arrangement& arr);

  const GridSpec& spec() const noexcept { return spec_; }
  int num_loads() const noexcept { return num_loads_; }

  Load at(Cell cell) const { return occupancy_[spec_.index(cell)]; }
  bool empty(Cell cell) const { return at(cell) == kNoLoad; }
  std::optional<Cell> position(Load load) const;

  std::span<const Load> pending_arrivals() const noexcept {
    return std::span<const Load>(arrivals_).subspan(next_arrival_);
  }
  bool departed(Load load) const;
  int departed_count() const noexcept { return departed_count_; }
  /// Loads currently in W+ (storage and I/O row).
  int placed_count() const noexcept { return placed_count_; }
  int io_count() const noexcept { return io_count_; }
  bool io_occupied() const noexcept { return io_count_ > 0; }

  /// Throws ActionError and leaves the state untouched when illegal.
  void apply(const Action& action);

  /// Snapshot of the storage rows. Requires an empty I/O row.
  Arrangement arrangement() const;

 private:
  void check_path(const Action& action) const;

  GridSpec spec_;
  int num_loads_;
  std::vector<Load> occupancy_;   // indexed by GridSpec::index over W+
  std::vector<int> positions_;    // by label; -1 when not in W+
  std::vector<char> departed_;    // by label
  Sequence arrivals_;
  std::size_t next_arrival_ = 0;
  int departed_count_ = 0;
  int placed_count_ = 0;
  int io_count_ = 0;
};

/// Pure form of WorldState::apply.
WorldState apply_action(WorldState state, const Action& action);

struct MetricsRecord {
  long long relocations = 0;
  long long io_usage = 0;
  long long total_distance = 0;
  long long distance_subopt = 0;
  long long actions = 0;
};

/// Replays `log` from `start`, validating every action, and tallies metrics.
/// io_usage counts actions at whose start some load is on the I/O row.
MetricsRecord measure(std::span<const Action> log, const WorldState& start);

/// Replays `log` from the empty world. The arrival order is the order of the
/// Store actions in the log.
MetricsRecord measure(std::span<const Action> log, const GridSpec& spec);

/// Store actions that build `arr` following `arrivals`, each along a
/// shortest empty path from the I/O row. Throws std::invalid_argument when
/// some load cannot be reached at its turn (arr does not satisfy arrivals).
std::vector<Action> plan_storage(const Arrangement& arr, std::span<const Load> arrivals);

/// Shortest path (ties by smallest cell sequence) from `from` to any I/O
/// cell using only empty cells after `from`. Empty optional when none.
std::optional<Path> shortest_exit_path(const WorldState& state, Cell from);

}  // namespace gridstore
