#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace gridstore {

/// Load label. Labels are 1..n; 0 marks an empty cell.
using Load = int;
inline constexpr Load kNoLoad = 0;

/// An ordered list of load labels (arrival order, departure order, ...).
using Sequence = std::vector<Load>;

/// A cell of the extended area W+. Row 0 is the I/O row, rows 1..r are
/// storage rows with row 1 at the open (front) side. Columns are 1..c.
struct Cell {
  int row = 0;
  int col = 0;

  bool in_io() const noexcept { return row == 0; }
  bool in_storage() const noexcept { return row >= 1; }

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Dimensions of the storage area W.
class GridSpec {
 public:
  GridSpec(int rows, int cols);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int capacity() const noexcept { return rows_ * cols_; }

  bool contains(Cell cell) const noexcept {
    return cell.row >= 0 && cell.row <= rows_ && cell.col >= 1 && cell.col <= cols_;
  }
  bool in_storage(Cell cell) const noexcept { return contains(cell) && cell.row >= 1; }

  /// Dense index over W+ (I/O row first), in (row, col) order.
  std::size_t index(Cell cell) const noexcept {
    return static_cast<std::size_t>(cell.row) * cols_ + (cell.col - 1);
  }
  Cell cell_at(std::size_t index) const noexcept {
    return Cell{static_cast<int>(index) / cols_, static_cast<int>(index) % cols_ + 1};
  }
  std::size_t extended_size() const noexcept {
    return static_cast<std::size_t>(rows_ + 1) * cols_;
  }

  /// Sum of round-trip depths over a fully packed grid: c * r * (r + 1).
  long long full_distance_bound() const noexcept {
    return static_cast<long long>(cols_) * rows_ * (rows_ + 1);
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int rows_;
  int cols_;
};

/// In-bounds cardinal neighbors of `cell` within W+.
std::vector<Cell> neighbors(Cell cell, const GridSpec& spec);

/// Neighbor iteration without allocation. Calls fn(Cell) for each neighbor.
template <typename Fn>
void for_each_neighbor(Cell cell, const GridSpec& spec, Fn&& fn) {
  if (cell.row > 0) fn(Cell{cell.row - 1, cell.col});
  if (cell.row < spec.rows()) fn(Cell{cell.row + 1, cell.col});
  if (cell.col > 1) fn(Cell{cell.row, cell.col - 1});
  if (cell.col < spec.cols()) fn(Cell{cell.row, cell.col + 1});
}

/// Same as for_each_neighbor but restricted to storage cells.
template <typename Fn>
void for_each_storage_neighbor(Cell cell, const GridSpec& spec, Fn&& fn) {
  for_each_neighbor(cell, spec, [&](Cell n) {
    if (n.row >= 1) fn(n);
  });
}

inline bool adjacent(Cell a, Cell b) noexcept {
  const int dr = a.row > b.row ? a.row - b.row : b.row - a.row;
  const int dc = a.col > b.col ? a.col - b.col : b.col - a.col;
  return dr + dc == 1;
}

/// A sequence of cells joined by cardinal steps.
struct Path {
  std::vector<Cell> cells;

  bool empty() const noexcept { return cells.empty(); }
  std::size_t size() const noexcept { return cells.size(); }
  /// Number of steps (cells - 1).
  int steps() const noexcept { return cells.empty() ? 0 : static_cast<int>(cells.size()) - 1; }
  Cell front() const { return cells.front(); }
  Cell back() const { return cells.back(); }
  bool contains(Cell cell) const;

  friend bool operator==(const Path&, const Path&) = default;
};

/// True iff every cell is in bounds, consecutive cells are one cardinal step
/// apart and no cell repeats.
bool is_well_formed(const Path& path, const GridSpec& spec);

/// True iff `seq` is a permutation of 1..seq.size().
bool is_permutation_of_labels(std::span<const Load> seq);

}  // namespace gridstore
