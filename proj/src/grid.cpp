#include "gridstore/grid.hpp"

#include <algorithm>
#include <string>

namespace gridstore {

GridSpec::GridSpec(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("grid dimensions must be positive, got " +
                                std::to_string(rows) + "x" + std::to_string(cols));
  }
}

std::vector<Cell> neighbors(Cell cell, const GridSpec& spec) {
  std::vector<Cell> out;
  out.reserve(4);
  for_each_neighbor(cell, spec, [&](Cell n) { out.push_back(n); });
  return out;
}

bool Path::contains(Cell cell) const {
  return std::find(cells.begin(), cells.end(), cell) != cells.end();
}

bool is_well_formed(const Path& path, const GridSpec& spec) {
  if (path.empty()) return false;
  std::vector<char> seen(spec.extended_size(), 0);
  for (std::size_t i = 0; i < path.cells.size(); ++i) {
    const Cell c = path.cells[i];
    if (!spec.contains(c)) return false;
    char& s = seen[spec.index(c)];
    if (s) return false;
    s = 1;
    if (i > 0 && !adjacent(path.cells[i - 1], c)) return false;
  }
  return true;
}

bool is_permutation_of_labels(std::span<const Load> seq) {
  std::vector<char> seen(seq.size() + 1, 0);
  for (Load l : seq) {
    if (l < 1 || static_cast<std::size_t>(l) > seq.size() || seen[l]) return false;
    seen[l] = 1;
  }
  return true;
}

}  // namespace gridstore
