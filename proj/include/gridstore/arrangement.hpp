#pragma once

#include <optional>
#include <vector>

#include "gridstore/grid.hpp"

namespace gridstore {

/// Injective placement of loads 1..num_loads onto storage cells. Partial
/// arrangements (some loads unplaced) are allowed; solvers build them
/// incrementally.
class Arrangement {
 public:
  Arrangement(GridSpec spec, int num_loads);

  const GridSpec& spec() const noexcept { return spec_; }
  int num_loads() const noexcept { return num_loads_; }
  int placed_count() const noexcept { return placed_; }
  bool is_complete() const noexcept { return placed_ == num_loads_; }
  /// Every load placed and every storage cell occupied.
  bool is_full_density() const noexcept {
    return is_complete() && num_loads_ == spec_.capacity();
  }

  /// Load at a storage cell or kNoLoad.
  Load at(Cell cell) const;
  std::optional<Cell> position(Load load) const;
  bool contains(Load load) const { return position(load).has_value(); }

  /// Throws std::invalid_argument on an occupied or out-of-range cell, a
  /// label outside 1..num_loads, or a load that is already placed.
  void place(Load load, Cell cell);
  void remove(Load load);

  /// Placed loads in ascending label order.
  std::vector<Load> loads() const;

  /// Calls fn(Load) for every load in a storage cell adjacent to `cell`.
  template <typename Fn>
  void for_each_adjacent_load(Cell cell, Fn&& fn) const {
    for_each_storage_neighbor(cell, spec_, [&](Cell n) {
      const Load l = cells_[storage_index(n)];
      if (l != kNoLoad) fn(l);
    });
  }

  friend bool operator==(const Arrangement&, const Arrangement&) = default;

 private:
  std::size_t storage_index(Cell cell) const noexcept {
    return static_cast<std::size_t>(cell.row - 1) * spec_.cols() + (cell.col - 1);
  }

  GridSpec spec_;
  int num_loads_;
  int placed_ = 0;
  std::vector<Load> cells_;       // r*c, storage rows only
  std::vector<int> positions_;    // index by label; -1 when unplaced
};

}  // namespace gridstore
